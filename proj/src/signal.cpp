#include "tfa/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tfa {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan1D {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// Plans are made once per size on fftw_malloc'd buffers and reused with
// fftw_execute_dft on other aligned buffers.
const Plan1D& plan_for(int N) {
  static std::map<int, Plan1D> plans;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = plans.find(N);
  if (it != plans.end()) return it->second;
  auto* in = fftw_alloc_complex(N);
  auto* out = fftw_alloc_complex(N);
  Plan1D p;
  p.fwd = fftw_plan_dft_1d(N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_1d(N, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  return plans.emplace(N, p).first->second;
}

struct FftwBuffer {
  explicit FftwBuffer(int n) : p(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* p;
};

void run(const std::vector<cplx>& in, std::vector<cplx>& out, bool fwd) {
  const int N = static_cast<int>(in.size());
  const Plan1D& plan = plan_for(N);
  FftwBuffer a(N), b(N);
  std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(a.p));
  fftw_execute_dft(fwd ? plan.fwd : plan.bwd, a.p, b.p);
  out.assign(reinterpret_cast<cplx*>(b.p), reinterpret_cast<cplx*>(b.p) + N);
}

double rho(double u) { return u <= 0 ? 0.0 : std::exp(-1.0 / u); }

}  // namespace

void check_grid(int N) {
  if (N < 16 || (N & (N - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 16");
}

Signal make_signal(int N, double period, double origin) {
  check_grid(N);
  if (!(period > 0)) throw std::invalid_argument("period must be positive");
  Signal s;
  s.x.assign(N, cplx(0, 0));
  s.period = period;
  s.origin = origin;
  return s;
}

std::vector<cplx> forward(const Signal& f) {
  check_grid(f.size());
  std::vector<cplx> c;
  run(f.x, c, true);
  const double s = 1.0 / f.size();
  for (auto& z : c) z *= s;
  return c;
}

Signal inverse(const std::vector<cplx>& c, double period, double origin) {
  check_grid(static_cast<int>(c.size()));
  Signal f;
  f.period = period;
  f.origin = origin;
  run(c, f.x, false);
  return f;
}

void fft_nd(std::vector<cplx>& data, const std::vector<int>& dims, int sign) {
  size_t total = 1;
  for (int d : dims) total *= static_cast<size_t>(d);
  if (total != data.size()) throw std::invalid_argument("fft_nd: size mismatch");
  FftwBuffer a(static_cast<int>(total));
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), a.p, a.p,
                      sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  std::copy(data.begin(), data.end(), reinterpret_cast<cplx*>(a.p));
  fftw_execute(p);
  std::copy(reinterpret_cast<cplx*>(a.p), reinterpret_cast<cplx*>(a.p) + total, data.begin());
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(p);
}

std::vector<cplx> apply_multiplier(const SpectralSymbol1D& sym, const std::vector<cplx>& c,
                                   double period) {
  const int N = static_cast<int>(c.size());
  std::vector<cplx> out(N, cplx(0, 0));
  for (int idx = 0; idx < N; ++idx) {
    double xi = bin_frequency(idx, N) / period;
    if (xi < sym.lo || xi > sym.hi || c[idx] == cplx(0, 0)) continue;
    out[idx] = c[idx] * sym.eval(xi);
  }
  return out;
}

Signal apply_multiplier(const SpectralSymbol1D& sym, const Signal& f) {
  return inverse(apply_multiplier(sym, forward(f), f.period), f.period, f.origin);
}

void check_same_grid(const Signal& a, const Signal& b) {
  if (a.size() != b.size() || a.period != b.period || a.origin != b.origin)
    throw std::invalid_argument("signals live on different grids");
}

cplx integral(const Signal& f) {
  cplx s(0, 0);
  for (const auto& z : f.x) s += z;
  return s * f.dx();
}

double lp_norm(const Signal& f, double p) {
  if (!(p > 0) || std::isinf(p)) {
    double m = 0;
    for (const auto& z : f.x) m = std::max(m, std::abs(z));
    return m;
  }
  double s = 0;
  for (const auto& z : f.x) s += std::pow(std::abs(z), p);
  return std::pow(s * f.dx(), 1.0 / p);
}

double l2_norm(const Signal& f) {
  double s = 0;
  for (const auto& z : f.x) s += std::norm(z);
  return std::sqrt(s * f.dx());
}

Signal operator+(const Signal& a, const Signal& b) {
  check_same_grid(a, b);
  Signal r = a;
  for (int n = 0; n < a.size(); ++n) r.x[n] += b.x[n];
  return r;
}

Signal operator-(const Signal& a, const Signal& b) {
  check_same_grid(a, b);
  Signal r = a;
  for (int n = 0; n < a.size(); ++n) r.x[n] -= b.x[n];
  return r;
}

Signal operator*(const Signal& a, const Signal& b) {
  check_same_grid(a, b);
  Signal r = a;
  for (int n = 0; n < a.size(); ++n) r.x[n] *= b.x[n];
  return r;
}

Signal operator*(cplx s, const Signal& a) {
  Signal r = a;
  for (auto& z : r.x) z *= s;
  return r;
}

double smooth_step(double u) {
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  double a = rho(u), b = rho(1 - u);
  return a / (a + b);
}

// ---- eta ------------------------------------------------------------------

namespace {
constexpr int kEtaTable = 4096;

double bump(double t) {  // supported in (-1/2, 1/2)
  double s = 1 - 4 * t * t;
  return s <= 0 ? 0.0 : std::exp(-1.0 / s);
}
}  // namespace

EtaKernel::EtaKernel(int K) : K_(K), table_(kEtaTable + 1) {
  if (K < 1) throw std::invalid_argument("EtaKernel: K must be positive");
  // A(u) = int b(t) b(t + u) dt / int b^2, tabulated on [0, 1]
  const int M = 8192;
  const double h = 1.0 / M;
  std::vector<double> b(M + 1);
  for (int m = 0; m <= M; ++m) b[m] = bump(-0.5 + m * h);
  auto corr = [&](int shift) {
    double s = 0;
    for (int m = 0; m + shift <= M; ++m) s += b[m] * b[m + shift];
    return s;
  };
  double z = corr(0);
  for (int k = 0; k <= kEtaTable; ++k) table_[k] = corr(k * (M / kEtaTable)) / z;
}

double EtaKernel::profile(double u) const {
  u = std::fabs(u);
  if (u >= 1) return 0;
  double x = u * kEtaTable;
  int k = static_cast<int>(x);
  double t = x - k;
  return table_[k] * (1 - t) + table_[std::min(k + 1, kEtaTable)] * t;
}

double EtaKernel::hat(double xi, double j) const {
  // two dilates of the autocorrelation: both nonnegative-definite, and their
  // spatial zeros do not coincide
  double r = std::ldexp(1.0, -2 * K_) * std::exp2(K_ * j);
  return 0.5 * profile(xi / r) + 0.5 * profile(xi / (0.7 * r));
}

Signal EtaKernel::sampled(int N, double j, double period) const {
  check_grid(N);
  std::vector<cplx> c(N);
  for (int idx = 0; idx < N; ++idx) c[idx] = hat(bin_frequency(idx, N) / period, j) / period;
  return inverse(c, period, 0.0);
}

Signal indicator(const std::vector<Arc>& E, int N, double period, double origin) {
  Signal s = make_signal(N, period, origin);
  for (const auto& arc : E) {
    double len = arc.b - arc.a;
    if (len < 0 || len > period) throw std::invalid_argument("arc length outside [0, period]");
    for (int n = 0; n < N; ++n) {
      double x = s.point(n) - arc.a;
      x -= period * std::floor(x / period);
      if (x < len) s.x[n] += 1.0;
    }
  }
  return s;
}

Signal smooth_indicator(const std::vector<Arc>& E, double j, const EtaKernel& eta, int N,
                        double period, double origin) {
  Signal chi = indicator(E, N, period, origin);
  auto c = forward(chi);
  for (int idx = 0; idx < N; ++idx) c[idx] *= eta.hat(bin_frequency(idx, N) / period, j);
  return inverse(c, period, origin);
}

double periodic_distance(double x, double a, double b, double period) {
  double len = b - a;
  if (len >= period) return 0;
  double t = x - a;
  t -= period * std::floor(t / period);
  if (t <= len) return 0;
  return std::min(t - len, period - t);
}

DecayFit fit_indicator_decay(const std::vector<Arc>& E, double j, const EtaKernel& eta, int N) {
  Signal chi = indicator(E, N);
  Signal sm = smooth_indicator(E, j, eta, N);
  const double scale = std::exp2(eta.K() * j);
  // envelope of the residual over distance bins, then a log-log fit of the envelope
  std::map<int, double> env;
  for (int n = 0; n < N; ++n) {
    double x = chi.point(n), d = 1e300;
    for (const auto& arc : E) {
      d = std::min(d, periodic_distance(x, arc.a, arc.a, 1.0));
      d = std::min(d, periodic_distance(x, arc.b, arc.b, 1.0));
    }
    double r = std::abs(sm.x[n] - chi.x[n]);
    int bin = static_cast<int>(std::floor(std::log2(1 + scale * d) * 4));
    env[bin] = std::max(env[bin], r);
  }
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [bin, r] : env) {
    if (r <= 1e-14) continue;
    double lx = bin / 4.0, ly = std::log2(r);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++fit.points;
  }
  if (fit.points >= 2) {
    double k = fit.points;
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    fit.q = -slope;
    double C = 0;
    for (const auto& [bin, r] : env) C = std::max(C, r * std::exp2(fit.q * bin / 4.0));
    fit.C = C;
  } else if (fit.points == 1) {
    for (const auto& [bin, r] : env) fit.C = std::max(fit.C, r);
  }
  return fit;
}

Signal riesz_projection(const Signal& f, double xi, RieszSign sign) {
  auto c = forward(f);
  const int N = f.size();
  for (int idx = 0; idx < N; ++idx) {
    double k = bin_frequency(idx, N) / f.period;
    bool keep = sign == RieszSign::plus ? k >= xi : k < xi;
    if (!keep) c[idx] = 0;
  }
  return inverse(c, f.period, f.origin);
}

double lp_profile(double t) { return smooth_step((4 - std::fabs(t)) / 2); }

double lp_symbol(double xi, double j, int K, LPKind kind, double center) {
  double t = (xi - center) / std::exp2(K * j);
  double T = lp_profile(t);
  if (kind == LPKind::T) return T;
  return T - lp_profile(t * std::exp2(K));
}

Signal littlewood_paley(const Signal& f, double j, int K, LPKind kind, double center) {
  SpectralSymbol1D sym;
  sym.eval = [=](double xi) { return cplx(lp_symbol(xi, j, K, kind, center), 0); };
  return apply_multiplier(sym, f);
}

Signal weight_profile(double a, double b, double p, int N, double period, double origin) {
  Signal w = make_signal(N, period, origin);
  double len = b - a;
  if (!(len > 0)) throw std::invalid_argument("weight interval must have positive length");
  for (int n = 0; n < N; ++n)
    w.x[n] = std::pow(1 + periodic_distance(w.point(n), a, b, period) / len, -p);
  return w;
}

}  // namespace tfa
