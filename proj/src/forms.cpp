#include "tfa/forms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tfa/parallel.hpp"
#include "tfa/size.hpp"

namespace tfa {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grids(const std::vector<Signal>& f) {
  if (f.empty()) throw std::invalid_argument("no signals");
  for (size_t i = 1; i < f.size(); ++i) {
    if (f[i].x.size() != f[0].x.size() || f[i].period != f[0].period)
      throw std::invalid_argument("signals on different grids");
  }
}

double piece_radius(const Cube& q, const GridConstants& gc) {
  return std::ldexp(1.0, q.j - gc.lattice_shift);
}

}  // namespace

double sgn0(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// ---------------------------------------------------------------- WhitneySymbol

size_t WhitneySymbol::KeyHash::operator()(const std::vector<long long>& k) const {
  size_t h = 1469598103934665603ULL;
  for (long long x : k) h = (h ^ static_cast<size_t>(x)) * 1099511628211ULL;
  return h;
}

WhitneySymbol::WhitneySymbol(const TileSet& ts, std::vector<double> beta)
    : ts_(std::make_shared<TileSet>(ts)), beta_(std::move(beta)) {
  const int n = ts.n();
  if (static_cast<int>(beta_.size()) != n) throw std::invalid_argument("beta arity differs from v");
  const auto& v = ts.v();
  const auto& gc = ts.gc();
  sigma_.assign(ts.cubes().size(), 0.0);
  for (size_t c = 0; c < ts.cubes().size(); ++c) {
    const Cube& q = ts.cubes()[c];
    auto x = support_plane_point(q, v.v());
    if (!x) continue;  // support misses the plane: phi_Q vanishes on it
    double s = 0;
    for (int i = 0; i < n; ++i) s += beta_[v.perm()[i]] * v.v(i) * (*x)[i];
    sigma_[c] = sgn0(s);
    std::vector<long long> key{q.jq};
    double h = piece_radius(q, gc);
    for (int i = 0; i < n; ++i) key.push_back(std::llround(q.center[i].to_double() / h));
    index_[key] = static_cast<int>(c);
    if (std::find(scales_.begin(), scales_.end(), q.jq) == scales_.end()) scales_.push_back(q.jq);
  }
  std::sort(scales_.begin(), scales_.end());
}

double WhitneySymbol::operator()(const std::vector<double>& xi) const {
  const auto& v = ts_->v();
  const auto& gc = ts_->gc();
  const int n = v.n();
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = xi[v.perm()[i]] / v.v(i);
  double total = 0;
  std::vector<long long> key(n + 1);
  std::vector<long long> base(n);
  for (int jq : scales_) {
    // centers on h Z, pieces of radius h: two candidates per coordinate
    double h = std::ldexp(1.0, gc.K * jq - gc.lattice_shift);
    for (int i = 0; i < n; ++i) base[i] = static_cast<long long>(std::floor(x[i] / h));
    key[0] = jq;
    for (int mask = 0; mask < (1 << n); ++mask) {
      for (int i = 0; i < n; ++i) key[i + 1] = base[i] + ((mask >> i) & 1);
      auto it = index_.find(key);
      if (it == index_.end()) continue;
      const Cube& q = ts_->cubes()[it->second];
      double p = sigma_[it->second];
      for (int i = 0; i < n && p != 0; ++i) p *= cube_piece_factor(q, i, x[i], gc);
      total += p;
    }
  }
  return total;
}

// ---------------------------------------------------------------- MultiplierSpec

MultiplierSpec MultiplierSpec::constant(cplx c, int n) {
  MultiplierSpec m;
  m.kind = Kind::constant;
  m.value = c;
  m.arity = n;
  return m;
}

MultiplierSpec MultiplierSpec::sgn_beta(std::vector<double> beta) {
  for (size_t a = 0; a < beta.size(); ++a)
    for (size_t b = a + 1; b < beta.size(); ++b)
      if (beta[a] == beta[b]) throw std::invalid_argument("beta entries must be pairwise distinct");
  MultiplierSpec m;
  m.kind = Kind::sgn_beta;
  m.arity = static_cast<int>(beta.size());
  m.beta = std::move(beta);
  return m;
}

MultiplierSpec MultiplierSpec::whitney_synthetic(std::shared_ptr<const WhitneySymbol> w) {
  MultiplierSpec m;
  m.kind = Kind::whitney_synthetic;
  m.arity = w->tiles().n();
  m.whitney = std::move(w);
  return m;
}

MultiplierSpec MultiplierSpec::custom_table(std::map<std::vector<int>, cplx> table, int n) {
  MultiplierSpec m;
  m.kind = Kind::custom;
  m.arity = n;
  m.table = std::move(table);
  return m;
}

MultiplierSpec MultiplierSpec::custom(std::function<cplx(const std::vector<double>&)> fn, int n) {
  MultiplierSpec m;
  m.kind = Kind::custom;
  m.arity = n;
  m.fn = std::move(fn);
  return m;
}

cplx MultiplierSpec::at(const std::vector<int>& k, double period) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::sgn_beta: {
      // exact in integers when beta is integral
      double s = 0;
      for (size_t i = 0; i < k.size(); ++i) s += beta[i] * k[i];
      return sgn0(s);
    }
    case Kind::whitney_synthetic: {
      std::vector<double> xi(k.size());
      for (size_t i = 0; i < k.size(); ++i) xi[i] = k[i] / period;
      return (*whitney)(xi);
    }
    case Kind::custom: {
      if (fn) {
        std::vector<double> xi(k.size());
        for (size_t i = 0; i < k.size(); ++i) xi[i] = k[i] / period;
        return fn(xi);
      }
      auto it = table.find(k);
      if (it == table.end()) throw std::invalid_argument("custom multiplier table has no entry for a sampled tuple");
      return it->second;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- direct form

cplx direct_form(const MultiplierSpec& m, const std::vector<Signal>& f) {
  check_grids(f);
  const int n = static_cast<int>(f.size());
  if (n != m.arity) throw std::invalid_argument("multiplier arity differs from the number of signals");
  const int N = static_cast<int>(f[0].x.size());
  const double P = f[0].period;
  std::vector<std::vector<cplx>> c(n);
  std::vector<std::vector<int>> nz(n);
  for (int i = 0; i < n; ++i) {
    c[i] = forward(f[i]);
    for (int b = 0; b < N; ++b)
      if (c[i][b] != cplx(0)) nz[i].push_back(b);
  }
  std::vector<int> k(n);
  cplx total = 0;
  // free slots 0..n-2, the last is fixed by the constraint
  auto rec = [&](auto&& self, int i, long long sum, cplx prod) -> void {
    if (i == n - 1) {
      long long kl = -sum;
      if (kl < -N / 2 || kl >= N - N / 2) return;
      cplx cl = c[n - 1][frequency_bin(static_cast<int>(kl), N)];
      if (cl == cplx(0)) return;
      k[n - 1] = static_cast<int>(kl);
      total += m.at(k, P) * prod * cl;
      return;
    }
    for (int b : nz[i]) {
      k[i] = bin_frequency(b, N);
      self(self, i + 1, sum + k[i], prod * c[i][b]);
    }
  };
  rec(rec, 0, 0, cplx(1));
  return P * total;
}

// ---------------------------------------------------------------- BHT quadrature

namespace {

struct ShiftPlan {
  std::vector<std::vector<cplx>> c;
  std::vector<int> freq;  // signed frequency per bin
  int N = 0;
  double P = 1;
  double qmax = 0;  // bound on |beta . k| over the nonzero bins
};

ShiftPlan shift_plan(const std::vector<Signal>& f, const std::vector<double>& beta) {
  ShiftPlan s;
  s.N = static_cast<int>(f[0].x.size());
  s.P = f[0].period;
  s.freq.resize(s.N);
  for (int b = 0; b < s.N; ++b) s.freq[b] = bin_frequency(b, s.N);
  for (size_t i = 0; i < f.size(); ++i) {
    s.c.push_back(forward(f[i]));
    double peak = 0;
    for (auto z : s.c.back()) peak = std::max(peak, std::abs(z));
    int kmax = 0;
    for (int b = 0; b < s.N; ++b)
      if (std::abs(s.c.back()[b]) > 1e-13 * peak) kmax = std::max(kmax, std::abs(s.freq[b]));
    s.qmax += std::fabs(beta[i]) * kmax;
  }
  return s;
}

// int prod_i f_i(x - beta_i t) dx
cplx shifted_integral(const ShiftPlan& s, const std::vector<double>& beta, double t) {
  std::vector<cplx> prod(s.N, cplx(1));
  for (size_t i = 0; i < s.c.size(); ++i) {
    std::vector<cplx> ci(s.N);
    for (int b = 0; b < s.N; ++b) {
      double ph = -2 * kPi * s.freq[b] * beta[i] * t / s.P;
      ci[b] = s.c[i][b] * cplx(std::cos(ph), std::sin(ph));
    }
    Signal g = inverse(ci, s.P);
    for (int x = 0; x < s.N; ++x) prod[x] *= g.x[x];
  }
  cplx sum = 0;
  for (auto z : prod) sum += z;
  return sum * (s.P / s.N);
}

double hilbert_kernel(double t, double P) { return kPi / P / std::tan(kPi * t / P); }

// midpoint rule on [eps, tcut] with paired nodes
cplx paired_midpoint(const std::function<cplx(double)>& G, double P, double eps, double tcut,
                     int nodes) {
  const double h = (tcut - eps) / nodes;
  cplx sum = 0;
  for (int j = 0; j < nodes; ++j) {
    double t = eps + (j + 0.5) * h;
    sum += (G(t) - G(-t)) * hilbert_kernel(t, P);
  }
  return sum * h;
}

cplx pv_rule(const std::function<cplx(double)>& G, double P, double eps, double tcut, double qmax,
             const QuadratureOptions& opt) {
  if (!(eps > 0) || !(eps < tcut) || tcut > P / 2 * (1 + 1e-15))
    throw std::invalid_argument("quadrature needs 0 < eps < tcut <= period / 2");
  auto nodes_for = [&](double e) {
    if (opt.nodes > 0) return opt.nodes;
    double cycles = std::max(1.0, (tcut - e) * qmax / P);
    return std::max(64, static_cast<int>(std::ceil(cycles * opt.nodes_per_cycle)));
  };
  cplx I1 = paired_midpoint(G, P, eps, tcut, nodes_for(eps));
  if (!opt.richardson) return I1;
  cplx I2 = paired_midpoint(G, P, eps / 2, tcut, nodes_for(eps / 2));
  return 2.0 * I2 - I1;
}

}  // namespace

cplx bht_quadrature(const std::vector<Signal>& f, const std::vector<double>& beta, double eps,
                    double tcut, const QuadratureOptions& opt) {
  check_grids(f);
  if (beta.size() != f.size()) throw std::invalid_argument("beta arity differs from the number of signals");
  ShiftPlan s = shift_plan(f, beta);
  auto G = [&](double t) { return shifted_integral(s, beta, t); };
  return pv_rule(G, s.P, eps, tcut, s.qmax, opt);
}

cplx hilbert_constant(double eps, const QuadratureOptions& opt) {
  auto G = [](double t) { return std::exp(cplx(0, -2 * kPi * t)); };
  return pv_rule(G, 1.0, eps, 0.5, 1.0, opt);
}

// ---------------------------------------------------------------- tile sums

SpectralSymbol1D piece_symbol(const Cube& q, int i, double vi, const GridConstants& gc,
                              double scale) {
  const double c = q.center[i].to_double();
  const double h = piece_radius(q, gc);
  SpectralSymbol1D s;
  s.eval = [=](double xi) { return cplx(scale * partition_bump((xi / vi - c) / h)); };
  double a = vi * (c - h), b = vi * (c + h);
  s.lo = std::min(a, b);
  s.hi = std::max(a, b);
  return s;
}

namespace {

// prod_i pi_{Q_i} f_{perm i}; empty when some factor vanishes identically
std::optional<Signal> cube_product(const TileSet& ts, int c, const std::vector<std::vector<cplx>>& coef,
                                   double P, double sigma) {
  const auto& v = ts.v();
  const Cube& q = ts.cubes()[c];
  std::optional<Signal> prod;
  for (int i = 0; i < v.n(); ++i) {
    auto sym = piece_symbol(q, i, v.v(i), ts.gc(), i == 0 ? sigma : 1.0);
    std::vector<cplx> g = apply_multiplier(sym, coef[v.perm()[i]], P);
    bool any = false;
    for (auto z : g)
      if (z != cplx(0)) {
        any = true;
        break;
      }
    if (!any) return std::nullopt;
    Signal s = inverse(g, P);
    prod = prod ? *prod * s : s;
  }
  return prod;
}

class CutoffCache {
public:
  CutoffCache(const EtaKernel& eta, int N, double P, int K) : eta_(eta), N_(N), P_(P), K_(K) {}
  const Signal& get(const DyadicSpan& s) {
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    double len = std::ldexp(P_, -K_ * s.jq);
    Arc a{s.a * len, (s.a + 1) * len};
    return cache_.emplace(s, smooth_indicator({a}, s.jq, eta_, N_, P_)).first->second;
  }

private:
  const EtaKernel& eta_;
  int N_;
  double P_;
  int K_;
  std::map<DyadicSpan, Signal> cache_;
};

cplx inner(const Signal& w, const Signal& g) {
  cplx s = 0;
  for (size_t x = 0; x < g.x.size(); ++x) s += w.x[x] * g.x[x];
  return s * g.dx();
}

std::vector<std::vector<cplx>> coefficients(const std::vector<Signal>& f, int n) {
  check_grids(f);
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("number of signals differs from v");
  std::vector<std::vector<cplx>> coef;
  for (const auto& g : f) coef.push_back(forward(g));
  return coef;
}

}  // namespace

TileSumResult tile_sum(const TileSet& ts, const std::vector<Signal>& f, const EtaKernel& eta,
                       const WhitneySymbol* sigma) {
  auto coef = coefficients(f, ts.n());
  const int N = static_cast<int>(f[0].x.size());
  const double P = f[0].period;
  CutoffCache chi(eta, N, P, ts.gc().K);
  TileSumResult r;
  r.per_tile.assign(ts.size(), 0.0);
  std::map<int, std::vector<int>> by_cube;
  for (int t = 0; t < ts.size(); ++t) by_cube[ts[t].cube].push_back(t);
  for (const auto& [c, tiles] : by_cube) {
    double sg = sigma ? sigma->sigma(c) : 1.0;
    if (sg == 0) continue;
    auto G = cube_product(ts, c, coef, P, sg);
    if (!G) continue;
    ++r.active_cubes;
    r.regrouped += integral(*G);
    for (int t : tiles) {
      r.per_tile[t] = inner(chi.get(ts[t].span), *G);
      r.value += r.per_tile[t];
    }
  }
  return r;
}

TreeEstimate tree_sum_and_estimate(const TileSet& ts, const Tree& T, const std::vector<Signal>& f,
                                   const std::vector<double>& sizes,
                                   const std::vector<double>& theta, const EtaKernel& eta) {
  const int n = ts.n();
  if (static_cast<int>(theta.size()) != n || static_cast<int>(sizes.size()) != n)
    throw std::invalid_argument("theta and sizes need one entry per coordinate");
  if (theta[n - 1] != 1.0) throw std::invalid_argument("theta_n must be 1");
  double s = 0;
  for (int i = 0; i < n - 1; ++i) {
    if (!(theta[i] > 0 && theta[i] < 1)) throw std::invalid_argument("theta_i must lie in (0, 1)");
    s += theta[i];
  }
  if (!(s < 2)) throw std::invalid_argument("sum of theta_i over i < n must be below 2");
  for (const auto& g : f)
    if (lp_norm(g, 0) > 1 + 1e-12) throw std::invalid_argument("signals must satisfy |f| <= 1");
  auto coef = coefficients(f, n);
  const int N = static_cast<int>(f[0].x.size());
  const double P = f[0].period;
  CutoffCache chi(eta, N, P, ts.gc().K);
  TreeEstimate r;
  std::map<int, std::vector<int>> by_cube;
  for (int t : T.tiles) by_cube[ts[t].cube].push_back(t);
  for (const auto& [c, tiles] : by_cube) {
    auto G = cube_product(ts, c, coef, P, 1.0);
    if (!G) continue;
    for (int t : tiles) r.value += inner(chi.get(ts[t].span), *G);
  }
  r.rhs = T.top.interval(ts.gc().K).length().to_double();
  for (int i = 0; i < n; ++i) r.rhs *= std::pow(sizes[i], theta[i]);
  if (r.rhs > 0) r.ratio = std::abs(r.value) / r.rhs;
  else r.skipped = true;
  return r;
}

// ---------------------------------------------------------------- statistics

void check_exponents(const std::vector<double>& p, bool require_above_two) {
  double s = 0;
  for (double q : p) {
    if (!(q > 1)) throw std::invalid_argument("exponents must exceed 1");
    if (require_above_two && !(q > 2)) throw std::invalid_argument("exponents must lie in (2, inf)");
    s += 1 / q;
  }
  if (std::fabs(s - 1) > 1e-12) throw std::invalid_argument("exponents must satisfy sum 1/p_i = 1");
}

ParaproductReport paraproduct_statistic(const std::vector<std::vector<SpectralSymbol1D>>& symbols,
                                        const std::vector<Signal>& f, const std::vector<double>& p) {
  check_grids(f);
  check_exponents(p, false);
  const int n = static_cast<int>(f.size());
  if (static_cast<int>(p.size()) != n) throw std::invalid_argument("one exponent per signal");
  for (size_t j = 0; j < symbols.size(); ++j) {
    if (static_cast<int>(symbols[j].size()) != n) throw std::invalid_argument("one symbol per signal");
    bool vanish = false;
    for (const auto& s : symbols[j]) {
      bool inside = s.lo <= 0 && 0 <= s.hi;
      if (!inside || std::abs(s.eval(0.0)) <= 1e-15) vanish = true;
    }
    if (!vanish) throw std::invalid_argument("no symbol vanishes at the origin for j = " + std::to_string(j));
  }
  ParaproductReport r;
  double den = 1;
  for (int i = 0; i < n; ++i) den *= lp_norm(f[i], p[i]);
  if (den == 0) {
    r.skipped = true;
    return r;
  }
  for (const auto& fam : symbols) {
    Signal prod = apply_multiplier(fam[0], f[0]);
    for (int i = 1; i < n; ++i) prod = prod * apply_multiplier(fam[i], f[i]);
    r.terms.push_back(std::abs(integral(prod)) / den);
    r.statistic += r.terms.back();
  }
  return r;
}

EvaluationReport evaluation_report(cplx value, const std::vector<Signal>& f,
                                   const std::vector<double>& p) {
  if (p.size() != f.size()) throw std::invalid_argument("one exponent per signal");
  EvaluationReport r;
  r.value = value;
  r.p = p;
  r.norm_prod = 1;
  for (size_t i = 0; i < f.size(); ++i) {
    r.norms.push_back(lp_norm(f[i], p[i]));
    r.norm_prod *= r.norms.back();
  }
  r.ratio = r.norm_prod > 0 ? std::abs(value) / r.norm_prod : 0;
  return r;
}

Signal band_limited_signal(int N, int kmax, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pk(-kmax, kmax);
  std::normal_distribution<double> g;
  std::vector<cplx> c(N, 0.0);
  for (int m = 0; m < modes; ++m) {
    int k = pk(rng);
    double re = g(rng), im = g(rng);
    c[frequency_bin(k, N)] += cplx(re, im);
  }
  Signal f = inverse(c);
  double sup = lp_norm(f, 0);
  if (sup > 0)
    for (auto& z : f.x) z /= sup;
  return f;
}

std::vector<double> schedule_beta(int M1) { return {0.0, -1.0, std::ldexp(1.0, M1)}; }

// ---------------------------------------------------------------- sweep

namespace {

SweepRow sweep_point(const SweepConfig& cfg, int M1, const std::vector<Signal>& f) {
  auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.M1 = M1;
  row.seed = cfg.seed;
  row.p = cfg.p;
  auto beta = schedule_beta(M1);
  row.v = beta_to_v(beta);
  row.lambda = direct_form(MultiplierSpec::sgn_beta(beta), f);
  auto ev = evaluation_report(row.lambda, f, cfg.p);
  row.norm_prod = ev.norm_prod;
  row.ratio = ev.ratio;

  DegeneracyVector v(row.v, cfg.gc.K);
  Decomposition d = decompose_band(v, cfg.band, cfg.jq_min, cfg.jq_max, cfg.gc);
  row.n_tiles = d.tiles.size();
  if (cfg.selection) {
    std::vector<SizeContext> ctx;
    for (int i = 0; i < v.n(); ++i) ctx.emplace_back(f[v.perm()[i]], cfg.D);
    SelectionConfig sc;
    sc.D = cfg.D;
    sc.tol_zero = cfg.tol_zero;
    for (const auto& fam : d.sparse.families) {
      TileSet ts = family_tiles(d.tiles.cubes(), fam, v, cfg.gc);
      LevelPartition lp = level_partition(ctx, ts, sc);
      row.n_trees += static_cast<long long>(lp.trees.size());
      for (const auto& t : lp.trees) row.tree_width += t.tree.top.interval(cfg.gc.K).length().to_double();
      row.bessel_max = std::max(row.bessel_max, lp.bessel_max);
    }
  }
  if (cfg.record_runtime)
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

std::vector<SweepRow> uniformity_sweep(const SweepConfig& cfg) {
  check_exponents(cfg.p);
  std::vector<Signal> f;
  for (int i = 0; i < 3; ++i) f.push_back(band_limited_signal(cfg.N, cfg.kmax, cfg.seed + i, cfg.modes));
  std::vector<SweepRow> rows(cfg.M1.size());
  parallel_for(static_cast<int>(rows.size()), cfg.threads,
               [&](int k) { rows[k] = sweep_point(cfg, cfg.M1[k], f); });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "M1,v1,v2,v3,seed,p1,p2,p3,lambda_re,lambda_im,norm_prod,ratio,n_tiles,n_trees,bessel_max,runtime_ms\n";
  for (const auto& r : rows) {
    os << r.M1;
    for (double x : r.v) os << ',' << num(x);
    os << ',' << r.seed;
    for (double x : r.p) os << ',' << num(x);
    os << ',' << num(r.lambda.real()) << ',' << num(r.lambda.imag()) << ',' << num(r.norm_prod) << ','
       << num(r.ratio) << ',' << r.n_tiles << ',' << r.n_trees << ',' << num(r.bessel_max) << ','
       << num(r.runtime_ms) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- contrast

std::vector<ContrastRow> contrast_diagnostic(const std::vector<int>& M1, const std::vector<double>& p,
                                             int N_min) {
  if (p.size() != 3) throw std::invalid_argument("contrast diagnostic is trilinear");
  check_exponents(p, false);
  // bins k / P with P = 4 put the mode k = 6 at the center of [1, 2]
  const double P = 4;
  const int k1 = 6;
  auto psi = [](double x) {
    double t = 2 * (x - 1.5);
    return std::fabs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0;
  };
  std::vector<ContrastRow> rows;
  for (int M : M1) {
    ContrastRow r;
    r.M1 = M;
    r.B = 1 << M;
    const int B = r.B;
    int N = N_min;
    while (N < 8 * (B + k1 + 2)) N *= 2;
    r.N = N;
    const double L = 2.0 * B + 1;
    std::vector<cplx> c1(N, 0.0), c2(N, 0.0), c3(N, 0.0);
    c1[frequency_bin(k1, N)] = 1;
    for (int k = -B; k <= B; ++k) {
      c2[frequency_bin(k, N)] = std::exp(cplx(0, kPi * k * k / L));
      c3[frequency_bin(k - k1, N)] = 1;  // e(-k1 x / P) D_B
    }
    std::vector<Signal> f{inverse(c1, P), inverse(c2, P), inverse(c3, P)};
    auto m = MultiplierSpec::custom(
        [&](const std::vector<double>& xi) {
          double x2 = xi[1] * P;  // bin of the second slot
          return psi(xi[0]) * std::exp(cplx(0, -kPi * x2 * x2 / L));
        },
        3);
    r.lambda = direct_form(m, f);
    auto ev = evaluation_report(r.lambda, f, p);
    r.norm_prod = ev.norm_prod;
    r.ratio = ev.ratio;
    rows.push_back(r);
  }
  return rows;
}

std::string contrast_csv(const std::vector<ContrastRow>& rows) {
  std::ostringstream os;
  os << "M1,B,N,lambda_re,lambda_im,norm_prod,ratio\n";
  for (const auto& r : rows)
    os << r.M1 << ',' << r.B << ',' << r.N << ',' << num(r.lambda.real()) << ',' << num(r.lambda.imag())
       << ',' << num(r.norm_prod) << ',' << num(r.ratio) << '\n';
  return os.str();
}

}  // namespace tfa
