#include "tfa/factor.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tfa/errors.hpp"

namespace tfa {

namespace {

int grid_for(int k_max) {
  int G = 16;
  while (G < 2 * (k_max + 1)) G *= 2;
  return G;
}

}  // namespace

double factor_weight(const std::vector<int>& k) {
  double s = 0;
  for (int x : k) s += static_cast<double>(x) * x;
  return std::pow(1 + std::sqrt(s), -10.0 * static_cast<double>(k.size()));
}

double factor_cutoff(const Cube& q, int i, double x) {
  double s = q.side().to_double();
  double d = std::fabs(x - q.center[i].to_double());
  return smooth_step((s / 2 - d) / (s / 4));
}

cplx FactoredSymbol::factor(const FactorTerm& t, int i, double x) const {
  double s = cube.side().to_double();
  double phase = 2 * std::numbers::pi * t.k[i] * (x - cube.center[i].to_double()) / (2 * s);
  cplx v = factor_cutoff(cube, i, x) * std::polar(1.0, phase);
  return i == 0 ? v * t.coef / t.weight : v;
}

cplx FactoredSymbol::evaluate(const std::vector<double>& x) const {
  cplx sum(0, 0);
  for (const auto& t : terms) {
    cplx p = t.weight;
    for (int i = 0; i < cube.n() && p != cplx(0, 0); ++i) p *= factor(t, i, x[i]);
    sum += p;
  }
  return sum;
}

FactoredSymbol tensor_factorize(const Cube& q, const Piece& piece, int k_max, double tol) {
  const int n = q.n();
  const int G = grid_for(k_max);
  const double s = q.side().to_double();
  std::vector<int> dims(n, G);
  size_t total = 1;
  for (int i = 0; i < n; ++i) total *= G;
  // samples of the piece on 2Q~ (torus of side 2s), grid point m -> c - s + m 2s/G
  std::vector<cplx> data(total);
  std::vector<double> x(n);
  std::vector<int> m(n, 0);
  for (size_t idx = 0; idx < total; ++idx) {
    size_t r = idx;
    for (int i = n - 1; i >= 0; --i) {
      m[i] = static_cast<int>(r % G);
      r /= G;
      x[i] = q.center[i].to_double() - s + m[i] * 2 * s / G;
    }
    data[idx] = piece(x);
  }
  std::vector<cplx> samples = data;
  fft_nd(data, dims, -1);
  // coefficient of e^{2 pi i k (x - c)/(2s)}: the grid starts at c - s, a phase of (-1)^k
  FactoredSymbol out;
  out.cube = q;
  out.k_max = k_max;
  std::vector<cplx> kept(total, cplx(0, 0));
  for (size_t idx = 0; idx < total; ++idx) {
    size_t r = idx;
    std::vector<int> k(n);
    bool inside = true;
    int parity = 0;
    for (int i = n - 1; i >= 0; --i) {
      int b = static_cast<int>(r % G);
      r /= G;
      k[i] = b < G / 2 ? b : b - G;
      if (std::abs(k[i]) > k_max) inside = false;
      parity += k[i];
    }
    if (!inside) continue;
    kept[idx] = data[idx];
    cplx a = data[idx] / static_cast<double>(total) * ((parity & 1) ? -1.0 : 1.0);
    if (std::abs(a) == 0) continue;
    FactorTerm t;
    t.k = k;
    t.weight = factor_weight(k);
    t.coef = a;
    out.terms.push_back(std::move(t));
  }
  // residual on the grid points of (1/2)Q~
  fft_nd(kept, dims, +1);
  double worst = 0;
  for (size_t idx = 0; idx < total; ++idx) {
    size_t r = idx;
    bool inside = true;
    for (int i = n - 1; i >= 0; --i) {
      int b = static_cast<int>(r % G);
      r /= G;
      double off = -s + b * 2 * s / G;
      if (std::fabs(off) > s / 4) inside = false;
    }
    if (!inside) continue;
    worst = std::max(worst, std::abs(kept[idx] / static_cast<double>(total) - samples[idx]));
  }
  out.residual = worst;
  if (worst > tol) {
    std::ostringstream os;
    os << "tensor factorisation residual " << worst << " exceeds " << tol << " at k_max " << k_max;
    throw StructuralError(os.str());
  }
  return out;
}

FactoredSymbol tensor_factorize_converged(const Cube& q, const Piece& piece, double tol, int k_start,
                                          int k_limit) {
  for (int k = std::max(k_start, 1);; k *= 2) {
    try {
      return tensor_factorize(q, piece, k, tol);
    } catch (const StructuralError&) {
      if (2 * k > k_limit) throw;
    }
  }
}

}  // namespace tfa
