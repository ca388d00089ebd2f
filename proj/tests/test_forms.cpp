#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tfa/forms.hpp"
#include "tfa/size.hpp"

using namespace tfa;

namespace {

using testkit::bounded_signal;
using testkit::mode;

const cplx kH(0, -std::numbers::pi);

std::vector<Signal> triple(int N, int kmax, std::uint64_t seed) {
  return {band_limited_signal(N, kmax, seed), band_limited_signal(N, kmax, seed + 100),
          band_limited_signal(N, kmax, seed + 200)};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// f(x - s) by a phase on the coefficients
Signal translate(const Signal& f, double s) {
  auto c = forward(f);
  const int N = static_cast<int>(c.size());
  for (int b = 0; b < N; ++b) c[b] *= std::exp(cplx(0, -2 * std::numbers::pi * bin_frequency(b, N) * s));
  return inverse(c);
}

const Decomposition& band_window() {
  static GridConstants gc;
  static Decomposition d = decompose_band(DegeneracyVector(beta_to_v({0, -1, 2}), gc.K), 16, 0, 1, gc);
  return d;
}

}  // namespace

TEST(DirectForm, ConstantMultiplierIsIntegral) {
  auto f = triple(128, 20, 1);
  cplx lam = direct_form(MultiplierSpec::constant(1.0), f);
  EXPECT_LT(rel(lam, integral(f[0] * f[1] * f[2])), 1e-12);
}

TEST(DirectForm, BruteForceTripleLoop) {
  const int N = 64;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Signal> f;
    for (int i = 0; i < 3; ++i) {
      std::vector<cplx> c(N);
      for (auto& z : c) z = cplx(u(rng), u(rng));
      f.push_back(inverse(c));
    }
    std::map<std::vector<int>, cplx> table;
    for (int a = -N / 2; a < N / 2; ++a)
      for (int b = -N / 2; b < N / 2; ++b) table[{a, b, -a - b}] = cplx(u(rng), u(rng));
    std::vector<MultiplierSpec> specs{MultiplierSpec::custom_table(table, 3),
                                      MultiplierSpec::sgn_beta({0, -1, 2}),
                                      MultiplierSpec::constant(cplx(0.5, 2))};
    std::vector<std::vector<cplx>> c;
    for (const auto& g : f) c.push_back(forward(g));
    for (const auto& m : specs) {
      cplx brute = 0;
      for (int a = -N / 2; a < N / 2; ++a)
        for (int b = -N / 2; b < N / 2; ++b)
          for (int d = -N / 2; d < N / 2; ++d) {
            if (a + b + d != 0) continue;
            brute += m.at({a, b, d}, 1.0) * c[0][frequency_bin(a, N)] * c[1][frequency_bin(b, N)] *
                     c[2][frequency_bin(d, N)];
          }
      EXPECT_LT(rel(direct_form(m, f), brute), 1e-12);
    }
  }
}

TEST(DirectForm, Multilinear) {
  auto f = triple(128, 16, 3);
  auto m = MultiplierSpec::sgn_beta({1, 3, -2});
  cplx base = direct_form(m, f);
  const cplx s(0.3, -1.7);
  for (int i = 0; i < 3; ++i) {
    auto g = f;
    g[i] = s * g[i];
    EXPECT_LT(rel(direct_form(m, g), s * base), 1e-12);
  }
  auto g = f;
  g[1] = f[1] + band_limited_signal(128, 16, 99);
  auto h = f;
  h[1] = band_limited_signal(128, 16, 99);
  EXPECT_LT(rel(direct_form(m, g), base + direct_form(m, h)), 1e-12);
}

TEST(DirectForm, Errors) {
  auto f = triple(64, 8, 1);
  EXPECT_THROW(direct_form(MultiplierSpec::constant(1.0, 2), f), std::invalid_argument);
  auto g = f;
  g[2] = band_limited_signal(128, 8, 1);
  EXPECT_THROW(direct_form(MultiplierSpec::constant(1.0), g), std::invalid_argument);
  EXPECT_THROW(MultiplierSpec::sgn_beta({1, 1, 2}), std::invalid_argument);
  EXPECT_EQ(MultiplierSpec::sgn_beta({1, 2, 3}).at({1, 1, -1}, 1.0), cplx(0));
  EXPECT_THROW(MultiplierSpec::custom_table({}, 3).at({0, 0, 0}, 1.0), std::invalid_argument);
}

TEST(Hilbert, CalibratedConstant) {
  // p.v. K * e(k x) = c sgn(k) e(k x)
  cplx c = hilbert_constant(1e-4);
  EXPECT_LT(std::abs(c - kH), 1e-8 * std::numbers::pi);
  // one Hilbert-transform pairing: int g(x) (K * f)(x) dx
  auto g = band_limited_signal(256, 10, 11), f = band_limited_signal(256, 10, 12);
  cplx quad = bht_quadrature({g, f}, {0, 1}, 1e-4, 0.5);
  cplx spec = kH * direct_form(MultiplierSpec::sgn_beta({0, 1}), {g, f});
  EXPECT_LT(rel(quad, spec), 1e-6);
}

TEST(BhtQuadrature, MatchesSpectralSign) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pb(-4, 4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> beta;
    while (beta.size() < 3) {
      double b = pb(rng);
      if (std::find(beta.begin(), beta.end(), b) == beta.end()) beta.push_back(b);
    }
    auto f = triple(256, 8, 40 + trial);
    cplx spec = kH * direct_form(MultiplierSpec::sgn_beta(beta), f);
    cplx q = bht_quadrature(f, beta, 1e-4, 0.5);
    EXPECT_LT(rel(q, spec), 1e-4) << trial;
    cplx q2 = bht_quadrature(f, beta, 5e-5, 0.5, {0, 24, true});
    EXPECT_LT(rel(q2, q), 1e-5) << trial;
  }
}

TEST(BhtQuadrature, ConstantsGiveZero) {
  std::vector<Signal> f;
  for (double a : {1.0, -2.5, 0.75}) {
    Signal s = make_signal(128);
    for (auto& z : s.x) z = a;
    f.push_back(s);
  }
  EXPECT_EQ(bht_quadrature(f, {0, -1, 2}, 1e-3, 0.5), cplx(0));
}

TEST(BhtQuadrature, TranslationInvariant) {
  auto f = triple(256, 8, 5);
  cplx a = bht_quadrature(f, {0, -1, 2}, 1e-3, 0.5);
  std::vector<Signal> g;
  for (const auto& s : f) g.push_back(translate(s, 0.1234));
  EXPECT_LT(rel(bht_quadrature(g, {0, -1, 2}, 1e-3, 0.5), a), 1e-10);
}

TEST(BhtQuadrature, RejectsBadTruncation) {
  auto f = triple(64, 4, 1);
  EXPECT_THROW(bht_quadrature(f, {0, -1, 2}, 0.3, 0.2), std::invalid_argument);
  EXPECT_THROW(bht_quadrature(f, {0, -1, 2}, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(bht_quadrature(f, {0, -1, 2}, 0.1, 0.7), std::invalid_argument);
}

TEST(WhitneySymbol, SignMatchesBetaOnPlane) {
  const auto& d = band_window();
  WhitneySymbol W(d.tiles, {0, -1, 2});
  int covered = 0, nonzero = 0;
  for (int a = -16; a <= 16; ++a)
    for (int b = -16; b <= 16; ++b) {
      int c = -a - b;
      if (std::abs(c) > 16) continue;
      double m = W({double(a), double(b), double(c)});
      double s = sgn0(-b + 2.0 * c);
      EXPECT_GE(m * s, 0.0) << a << " " << b;
      EXPECT_LE(std::fabs(m), 1 + 1e-12);
      if (m != 0) ++nonzero;
      if (std::fabs(m - s) < 1e-12 && s != 0) ++covered;
    }
  std::cout << "nonzero " << nonzero << " exact " << covered << "\n";
  EXPECT_GT(covered, 0);
}

TEST(TileSum, RegroupsAndReconstructs) {
  const auto& d = band_window();
  auto W = std::make_shared<WhitneySymbol>(d.tiles, std::vector<double>{0, -1, 2});
  EtaKernel eta(d.tiles.gc().K);
  for (std::uint64_t seed : {4, 9}) {
    auto f = triple(1024, 12, seed);
    auto r = tile_sum(d.tiles, f, eta, W.get());
    ASSERT_GT(r.active_cubes, 0);
    EXPECT_LT(rel(r.value, r.regrouped), 1e-10);
    cplx dw = direct_form(MultiplierSpec::whitney_synthetic(W), f);
    EXPECT_LT(rel(r.regrouped, dw), 1e-6);
    EXPECT_LT(rel(r.value, dw), 1e-6);
  }
}

TEST(TileSum, ZeroSlotGivesZero) {
  const auto& d = band_window();
  EtaKernel eta(d.tiles.gc().K);
  auto f = triple(256, 12, 2);
  for (int i = 0; i < 3; ++i) {
    auto g = f;
    g[i] = make_signal(256);
    auto r = tile_sum(d.tiles, g, eta);
    EXPECT_EQ(r.value, cplx(0));
    EXPECT_EQ(r.active_cubes, 0);
  }
}

TEST(TreeEstimate, ZeroAndDisjointSpectra) {
  const auto& w = testkit::small_window();
  TileSet ts = w.family(w.pairs[0]);
  EtaKernel eta(ts.gc().K);
  Tree T;
  T.tiles = {0};
  T.top = ts[0].span;
  std::vector<double> theta{2.0 / 3, 2.0 / 3, 1}, sizes{1, 1, 1};
  std::vector<Signal> zero(3, make_signal(256));
  EXPECT_EQ(tree_sum_and_estimate(ts, T, zero, sizes, theta, eta).value, cplx(0));
  // first slot at a frequency outside the piece support of the tile's cube
  const Cube& q = ts.cube_of(0);
  const int p0 = ts.v().perm()[0];
  double lo = ts.v().v(0) * (q.center[0].to_double() - 0.25 * q.side().to_double());
  double hi = ts.v().v(0) * (q.center[0].to_double() + 0.25 * q.side().to_double());
  int k = static_cast<int>(std::ceil(std::max(lo, hi))) + 3;
  std::vector<Signal> f(3, mode(256, 0));
  f[p0] = mode(256, k);
  for (int i = 0; i < 3; ++i)
    if (i != p0) {
      // in-band content for the other slots
      f[i] = mode(256, static_cast<int>(std::lround(ts.omega_center(0, i))));
    }
  EXPECT_LE(std::abs(tree_sum_and_estimate(ts, T, f, sizes, theta, eta).value), 1e-12);
}

TEST(TreeEstimate, ThetaAndBoundChecks) {
  const auto& w = testkit::small_window();
  TileSet ts = w.family(w.pairs[0]);
  EtaKernel eta(ts.gc().K);
  Tree T;
  T.tiles = {0};
  T.top = ts[0].span;
  std::vector<Signal> f(3, make_signal(128));
  std::vector<double> sizes{1, 1, 1};
  EXPECT_THROW(tree_sum_and_estimate(ts, T, f, sizes, {0.5, 0.5, 0.9}, eta), std::invalid_argument);
  EXPECT_THROW(tree_sum_and_estimate(ts, T, f, sizes, {1.0, 0.5, 1}, eta), std::invalid_argument);
  EXPECT_THROW(tree_sum_and_estimate(ts, T, f, sizes, {0.5, 0.5}, eta), std::invalid_argument);
  f[1] = 2.0 * mode(128, 1);
  EXPECT_THROW(tree_sum_and_estimate(ts, T, f, sizes, {0.5, 0.5, 1}, eta), std::invalid_argument);
}

TEST(TreeEstimate, RatioFiniteOnSelectedTrees) {
  const auto& w = testkit::small_window();
  std::mt19937_64 rng(17);
  double worst = 0;
  int evaluated = 0;
  for (int trial = 0; trial < 6; ++trial) {
    TileSet ts = w.family(w.pairs[trial % w.pairs.size()]);
    EtaKernel eta(ts.gc().K);
    std::vector<Signal> f;
    for (int i = 0; i < 3; ++i) f.push_back(bounded_signal(512, 40, rng));
    std::vector<SizeContext> ctx;
    for (int i = 0; i < 3; ++i) ctx.emplace_back(f[ts.v().perm()[i]]);
    std::vector<char> alive(ts.size(), 1);
    auto best = maximal_size(ctx[trial % 3], ts, alive, trial % 3);
    if (!best.tree) continue;
    const Tree T = *best.tree;
    std::vector<char> in(ts.size(), 0);
    for (int t : T.tiles) in[t] = 1;
    std::vector<double> sizes;
    for (int i = 0; i < 3; ++i) sizes.push_back(maximal_size(ctx[i], ts, in, i).value);
    auto r = tree_sum_and_estimate(ts, T, f, sizes, {2.0 / 3, 2.0 / 3, 1}, eta);
    if (r.skipped) continue;
    ++evaluated;
    EXPECT_TRUE(std::isfinite(r.ratio));
    worst = std::max(worst, r.ratio);
  }
  EXPECT_GT(evaluated, 0);
  std::cout << "tree estimate ratio max " << worst << "\n";
}

TEST(Paraproduct, VanishingSymbolRequired) {
  auto f = triple(256, 20, 8);
  const int K = 4;
  auto lp = [&](double j, LPKind kind) {
    SpectralSymbol1D s;
    s.eval = [=](double xi) { return cplx(lp_symbol(xi, j, K, kind)); };
    return s;
  };
  std::vector<std::vector<SpectralSymbol1D>> bad{{lp(0.5, LPKind::T), lp(0.5, LPKind::T), lp(0.5, LPKind::T)}};
  EXPECT_THROW(paraproduct_statistic(bad, f, {3, 3, 3}), std::invalid_argument);
  std::vector<std::vector<SpectralSymbol1D>> good{{lp(0.5, LPKind::S), lp(0.5, LPKind::T), lp(0.5, LPKind::T)}};
  EXPECT_THROW(paraproduct_statistic(good, f, {3, 3, 2}), std::invalid_argument);
  auto r = paraproduct_statistic(good, f, {3, 3, 3});
  ASSERT_EQ(r.terms.size(), 1u);
  double holder = 1, den = 1;
  for (int i = 0; i < 3; ++i) {
    holder *= lp_norm(apply_multiplier(good[0][i], f[i]), 3);
    den *= lp_norm(f[i], 3);
  }
  EXPECT_LE(r.statistic, holder / den * (1 + 1e-12));
  std::vector<Signal> zero(3, make_signal(256));
  EXPECT_TRUE(paraproduct_statistic(good, zero, {3, 3, 3}).skipped);
}

TEST(Paraproduct, BoundedOverShifts) {
  const int K = 4;
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> shift(0, 2);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Signal> f;
    for (int i = 0; i < 3; ++i) f.push_back(bounded_signal(512, 60, rng));
    std::vector<int> M{shift(rng), shift(rng), shift(rng)};
    std::vector<std::vector<SpectralSymbol1D>> fam;
    for (double j = -1; j <= 1.5; j += 0.25) {
      std::vector<SpectralSymbol1D> row;
      for (int i = 0; i < 3; ++i) {
        LPKind kind = i == trial % 3 ? LPKind::S : LPKind::T;
        double jj = j + M[i] * 0.25;
        SpectralSymbol1D s;
        s.eval = [=](double xi) { return cplx(lp_symbol(xi, jj, K, kind)); };
        row.push_back(s);
      }
      fam.push_back(row);
    }
    auto r = paraproduct_statistic(fam, f, {3, 3, 3});
    EXPECT_TRUE(std::isfinite(r.statistic));
    worst = std::max(worst, r.statistic);
  }
  EXPECT_LT(worst, 100.0);
  std::cout << "paraproduct statistic max " << worst << "\n";
}

TEST(Exponents, ScalingCondition) {
  EXPECT_NO_THROW(check_exponents({3, 3, 3}));
  EXPECT_NO_THROW(check_exponents({4, 4, 2.0}, false));
  EXPECT_THROW(check_exponents({4, 4, 2.0}), std::invalid_argument);
  EXPECT_THROW(check_exponents({3, 3, 4}), std::invalid_argument);
  auto f = triple(64, 4, 2);
  auto r = evaluation_report(cplx(2, 0), f, {3, 3, 3});
  EXPECT_NEAR(r.ratio, 2 / r.norm_prod, 1e-15);
}

TEST(Sweep, ConstantSignalsStayFinite) {
  SweepConfig cfg;
  cfg.N = 256;
  cfg.kmax = 0;
  cfg.selection = false;
  for (int m = 0; m <= 10; ++m) cfg.M1.push_back(m);
  auto rows = uniformity_sweep(cfg);
  ASSERT_EQ(rows.size(), 11u);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.lambda.real()) && std::isfinite(r.lambda.imag()));
    EXPECT_TRUE(std::isfinite(r.ratio));
    EXPECT_GT(r.n_tiles, 0);
  }
}

TEST(Sweep, DeterministicAndOrderIndependent) {
  SweepConfig cfg;
  cfg.N = 256;
  cfg.M1 = {0, 3, 6};
  cfg.band = 8;
  cfg.kmax = 6;
  std::string a = sweep_csv(uniformity_sweep(cfg));
  cfg.threads = 3;
  EXPECT_EQ(sweep_csv(uniformity_sweep(cfg)), a);
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "M1,v1,v2,v3,seed,p1,p2,p3,lambda_re,lambda_im,norm_prod,ratio,n_tiles,n_trees,bessel_max,"
            "runtime_ms");
}

TEST(Contrast, ClosedFormAndGrowth) {
  std::vector<int> M{0, 5, 10};
  auto rows = contrast_diagnostic(M, {10, 10, 1.25});
  for (const auto& r : rows) EXPECT_NEAR(r.lambda.real(), 4.0 * (2 * r.B + 1), 1e-9 * r.B);
  EXPECT_GE(rows.back().ratio / rows.front().ratio, 3.0);
}
