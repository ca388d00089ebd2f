#include "tfa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tfa/errors.hpp"

namespace tfa {

void GridConstants::validate() const {
  if (C0 < 2) throw ConfigError("constants.C0", "must be >= 2");
  if (K < 2) throw ConfigError("constants.K", "must be >= 2");
  if (Ndecay < 4) throw ConfigError("constants.Ndecay", "must be >= 4");
  if (lattice_shift < 2 || lattice_shift > 12)
    throw ConfigError("constants.lattice_shift", "must lie in [2, 12]");
}

DegeneracyVector::DegeneracyVector(const std::vector<double>& raw, int K) {
  const int n = static_cast<int>(raw.size());
  if (n < 3) throw std::invalid_argument("degeneracy vector needs n >= 3");
  for (double x : raw)
    if (!(std::isfinite(x)) || x == 0.0)
      throw std::invalid_argument("degeneracy vector entries must be finite and nonzero");
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), 0);
  std::stable_sort(perm_.begin(), perm_.end(),
                   [&](int a, int b) { return std::fabs(raw[a]) > std::fabs(raw[b]); });
  scale_ = std::fabs(raw[perm_[n - 1]]);
  v_.resize(n);
  double sum = 0, mag = 0;
  for (int i = 0; i < n; ++i) {
    v_[i] = raw[perm_[i]] / scale_;
    sum += v_[i];
    mag = std::max(mag, std::fabs(v_[i]));
  }
  if (std::fabs(sum) > 1e-12 * mag) throw std::invalid_argument("degeneracy vector must sum to 0");
  v_[n - 1] = v_[n - 1] > 0 ? 1.0 : -1.0;
  M_.resize(n);
  m_.resize(n);
  for (int i = 0; i < n; ++i) {
    M_[i] = std::log2(std::fabs(v_[i]));
    m_[i] = M_[i] / K;
  }
  M_[n - 1] = 0;
  m_[n - 1] = 0;
}

std::vector<double> DegeneracyVector::to_sorted(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n()) throw std::invalid_argument("dimension mismatch");
  std::vector<double> out(x.size());
  for (int i = 0; i < n(); ++i) out[i] = x[perm_[i]];
  return out;
}

std::vector<double> beta_to_v(const std::vector<double>& beta) {
  if (beta.size() != 3) throw std::invalid_argument("beta must have 3 entries");
  return {beta[1] - beta[2], beta[2] - beta[0], beta[0] - beta[1]};
}

namespace {
void check_on_plane(const std::vector<double>& x) {
  double s = 0, mag = 1;
  for (double c : x) {
    s += c;
    mag = std::max(mag, std::fabs(c));
  }
  if (std::fabs(s) > 1e-9 * mag) throw std::invalid_argument("point is not on the hyperplane");
}
}  // namespace

double dv_distance(const std::vector<double>& x, const std::vector<double>& y,
                   const DegeneracyVector& v) {
  if (static_cast<int>(x.size()) != v.n() || static_cast<int>(y.size()) != v.n())
    throw std::invalid_argument("dimension mismatch");
  check_on_plane(x);
  check_on_plane(y);
  double d = 0;
  for (int i = 0; i < v.n(); ++i) d = std::max(d, std::fabs(x[i] - y[i]) / std::fabs(v.v(i)));
  return d;
}

LineDistance dv_distance_to_line(const std::vector<double>& x, const DegeneracyVector& v) {
  // max_i |x_i/v_i - t| is minimized at the midpoint of the ratio range
  double lo = x[0] / v.v(0), hi = lo;
  for (int i = 1; i < v.n(); ++i) {
    double r = x[i] / v.v(i);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {(hi - lo) / 2, (hi + lo) / 2};
}

std::vector<double> rescale(const std::vector<double>& x, const DegeneracyVector& v,
                            RescaleDirection dir) {
  if (static_cast<int>(x.size()) != v.n()) throw std::invalid_argument("dimension mismatch");
  std::vector<double> out(x.size());
  for (int i = 0; i < v.n(); ++i)
    out[i] = dir == RescaleDirection::forward ? x[i] * v.v(i) : x[i] / v.v(i);
  return out;
}

}  // namespace tfa
