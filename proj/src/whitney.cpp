#include "tfa/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tfa {

namespace {

// floor(x / 2^e) as an integer
long long floor_div_pow2(Dyadic x, int e) {
  int s = Dyadic::kFrac + e;
  __int128 r = x.raw();
  if (s <= 0) return static_cast<long long>(r << (-s));
  __int128 unit = static_cast<__int128>(1) << s;
  __int128 q = r / unit;
  if (r % unit != 0 && r < 0) --q;
  return static_cast<long long>(q);
}

long long ceil_div_pow2(Dyadic x, int e) { return -floor_div_pow2(-x, e); }

}  // namespace

DInterval Cube::interval(int i) const {
  Dyadic h = Dyadic::pow2(j - 1);
  return {center[i] - h, center[i] + h};
}

DInterval Cube::support(int i) const {
  Dyadic q = Dyadic::pow2(j - 2);
  return {center[i] - q, center[i] + q};
}

DInterval Cube::hull10() const {
  if (adjusted.empty()) throw std::logic_error("hull of a cube without adjusted intervals");
  DInterval h = adjusted[0].dilate(10);
  for (size_t i = 1; i < adjusted.size(); ++i) h = hull(h, adjusted[i].dilate(10));
  return h;
}

bool cube_less(const Cube& a, const Cube& b) {
  if (a.j != b.j) return a.j < b.j;
  return a.center < b.center;
}

Dyadic distance_to_diagonal(const std::vector<Dyadic>& c) {
  Dyadic lo = c[0], hi = c[0];
  for (const auto& x : c) {
    lo = dmin(lo, x);
    hi = dmax(hi, x);
  }
  return (hi - lo).half();
}

bool is_whitney(const std::vector<Dyadic>& center, int j, const GridConstants& gc) {
  // C0 Q misses the diagonal and 4 C0 Q meets it, in the sup metric
  Dyadic d = distance_to_diagonal(center);
  Dyadic s = Dyadic::pow2(j);
  Dyadic lower = (s * gc.C0).half();
  Dyadic upper = s * (2LL * gc.C0);
  return lower < d && d <= upper;
}

namespace {

struct Enumerator {
  const WhitneyRequest& req;
  const GridConstants& gc;
  int n, j;
  long long spread_lo, spread_hi;  // spread must lie in (spread_lo, spread_hi]
  std::vector<long long> amin, amax;
  double plane_radius = 0;
  std::vector<long long> a;
  std::vector<Cube>& out;

  void emit() {
    Cube q;
    q.j = j;
    q.jq = j / gc.K;
    q.center.resize(n);
    for (int i = 0; i < n; ++i) q.center[i] = Dyadic::ratio(a[i], gc.lattice_shift - j);
    out.push_back(std::move(q));
  }

  void recurse(int i, long long lo, long long hi) {
    if (i == n) {
      long long spread = hi - lo;
      if (spread > spread_lo && spread <= spread_hi) emit();
      return;
    }
    long long from = amin[i], to = amax[i];
    if (i > 0) {
      from = std::max(from, hi - spread_hi);
      to = std::min(to, lo + spread_hi);
    }
    if (i == n - 1 && !req.plane_normal.empty()) {
      double S = 0;
      for (int k = 0; k < n - 1; ++k) S += req.plane_normal[k] * static_cast<double>(a[k]);
      double w = req.plane_normal[n - 1];
      double r = plane_radius * (1 + 1e-12) + 1e-9;
      double x1 = (-r - S) / w, x2 = (r - S) / w;
      if (x1 > x2) std::swap(x1, x2);
      from = std::max(from, static_cast<long long>(std::ceil(x1)));
      to = std::min(to, static_cast<long long>(std::floor(x2)));
    }
    for (long long x = from; x <= to; ++x) {
      a[i] = x;
      recurse(i + 1, i == 0 ? x : std::min(lo, x), i == 0 ? x : std::max(hi, x));
    }
  }
};

}  // namespace

std::vector<Cube> generate_whitney_cubes(const WhitneyRequest& req, const GridConstants& gc) {
  gc.validate();
  const int n = static_cast<int>(req.bounds.size());
  if (n < 2) throw std::invalid_argument("bounds need at least two coordinates");
  if (req.jq_min > req.jq_max) return {};
  if (!req.plane_normal.empty() && static_cast<int>(req.plane_normal.size()) != n)
    throw std::invalid_argument("plane normal dimension mismatch");
  std::vector<Cube> out;
  for (int jq = req.jq_min; jq <= req.jq_max; ++jq) {
    const int j = gc.K * jq;
    const int e = j - gc.lattice_shift;
    Enumerator en{req, gc, n, j, static_cast<long long>(gc.C0) << gc.lattice_shift,
                  static_cast<long long>(4 * gc.C0) << gc.lattice_shift, {}, {}, 0, {}, out};
    en.amin.resize(n);
    en.amax.resize(n);
    Dyadic margin = req.rule == CenterRule::support_meets ? Dyadic::pow2(j - 2) : Dyadic();
    bool empty = false;
    for (int i = 0; i < n; ++i) {
      en.amin[i] = ceil_div_pow2(req.bounds[i].lo - margin, e);
      en.amax[i] = floor_div_pow2(req.bounds[i].hi + margin, e);
      if (en.amin[i] > en.amax[i]) empty = true;
    }
    if (empty) continue;
    if (!req.plane_normal.empty()) {
      double sw = 0;
      for (double w : req.plane_normal) sw += std::fabs(w);
      en.plane_radius = std::ldexp(sw, gc.lattice_shift - 2);
    }
    en.a.assign(n, 0);
    en.recurse(0, 0, 0);
  }
  return out;
}

double lattice_volume(const WhitneyRequest& req, const GridConstants& gc) {
  double total = 0;
  for (int jq = req.jq_min; jq <= req.jq_max; ++jq) {
    int e = gc.K * jq - gc.lattice_shift;
    double v = 1;
    for (const auto& b : req.bounds)
      v *= std::max(0.0, std::floor(std::ldexp(b.length().to_double(), -e)) + 1);
    total += v;
  }
  return total;
}

double partition_bump(double t) {
  t = std::fabs(t);
  if (t >= 1) return 0;
  if (t == 0) return 1;
  double a = std::exp(-1.0 / (1 - t));
  double b = std::exp(-1.0 / t);
  return a / (a + b);
}

double cube_piece_factor(const Cube& q, int i, double x, const GridConstants& gc) {
  double h = std::ldexp(1.0, q.j - gc.lattice_shift);
  return partition_bump((x - q.center[i].to_double()) / h);
}

double cube_piece(const Cube& q, const std::vector<double>& x, const GridConstants& gc) {
  double p = 1;
  for (int i = 0; i < q.n() && p != 0; ++i) p *= cube_piece_factor(q, i, x[i], gc);
  return p;
}

std::optional<std::vector<double>> support_plane_point(const Cube& q,
                                                       const std::vector<double>& w) {
  const int n = q.n();
  double r = std::ldexp(1.0, q.j - 2);
  std::vector<double> lo(n), x(n);
  double F = 0, span = 0;
  for (int i = 0; i < n; ++i) {
    double c = q.center[i].to_double();
    lo[i] = w[i] >= 0 ? c - r : c + r;
    F += w[i] * lo[i];
    span += 2 * r * std::fabs(w[i]);
  }
  if (F > 1e-12 * span || F + span < -1e-12 * span) return std::nullopt;
  x = lo;
  for (int i = 0; i < n; ++i) {
    double step = 2 * r * std::fabs(w[i]);
    double sgn = w[i] >= 0 ? 1 : -1;
    if (F + step >= 0) {
      double t = step > 0 ? -F / step : 0;
      x[i] = lo[i] + sgn * 2 * r * std::clamp(t, 0.0, 1.0);
      return x;
    }
    F += step;
    x[i] = lo[i] + sgn * 2 * r;
  }
  return x;
}

}  // namespace tfa
