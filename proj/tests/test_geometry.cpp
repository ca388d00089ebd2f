#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tfa/geometry.hpp"

using namespace tfa;

TEST(DegeneracyVector, SortsAndNormalizes) {
  DegeneracyVector v({1, 1, -2}, 4);
  EXPECT_EQ(v.v(), (std::vector<double>{-2, 1, 1}));
  EXPECT_EQ(v.perm(), (std::vector<int>{2, 0, 1}));
  EXPECT_DOUBLE_EQ(v.M()[0], 1.0);
  EXPECT_DOUBLE_EQ(v.m()[0], 0.25);
  EXPECT_EQ(v.M()[2], 0.0);
  DegeneracyVector w({3, -6, 3}, 4);
  EXPECT_EQ(w.v(), (std::vector<double>{-2, 1, 1}));
  EXPECT_THROW(DegeneracyVector({1, 0, -1}, 4), std::invalid_argument);
  EXPECT_THROW(DegeneracyVector({1, 1, 1}, 4), std::invalid_argument);
  EXPECT_THROW(DegeneracyVector({1, -1}, 4), std::invalid_argument);
}

TEST(DegeneracyVector, BetaCorrespondence) {
  // v = (b2-b3, b3-b1, b1-b2) annihilates beta
  std::vector<double> beta{0, -1, 8};
  auto v = beta_to_v(beta);
  EXPECT_EQ(v, (std::vector<double>{-9, 8, 1}));
  double dot = 0;
  for (int i = 0; i < 3; ++i) dot += beta[i] * v[i];
  EXPECT_EQ(dot, 0.0);
}

TEST(Metric, DirectFormula) {
  DegeneracyVector v({1, 1, -2}, 4);
  auto x = v.to_sorted({1, 0, -1});
  std::vector<double> y{0, 0, 0};
  EXPECT_DOUBLE_EQ(dv_distance(x, y, v), 1.0);
  EXPECT_DOUBLE_EQ(dv_distance(x, x, v), 0.0);
  EXPECT_THROW(dv_distance({1, 0, 0}, y, v), std::invalid_argument);
}

TEST(Metric, DistanceToLineMatchesBruteForce) {
  DegeneracyVector v({1, 1, -2}, 4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-5, 5);
  auto check = [&](const std::vector<double>& x) {
    auto ld = dv_distance_to_line(x, v);
    // oracle: scan the line parameter, then refine on breakpoints x_i / v_i
    double best = 1e300;
    for (int k = -20000; k <= 20000; ++k) {
      double t = k * 1e-3;
      double d = 0;
      for (int i = 0; i < 3; ++i) d = std::max(d, std::fabs(x[i] - t * v.v(i)) / std::fabs(v.v(i)));
      best = std::min(best, d);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double t = (x[a] / v.v(a) + x[b] / v.v(b)) / 2;
        double d = 0;
        for (int i = 0; i < 3; ++i) d = std::max(d, std::fabs(x[i] - t * v.v(i)) / std::fabs(v.v(i)));
        best = std::min(best, d);
      }
    EXPECT_NEAR(ld.distance, best, 1e-12);
  };
  check(v.to_sorted({2, 0, -2}));
  for (int t = 0; t < 50; ++t) {
    double a = U(rng), b = U(rng);
    check({a, b, -a - b});
  }
}

TEST(Rescale, RoundTripAndLine) {
  DegeneracyVector v({1, 1, -2}, 4);
  auto f = rescale(v.to_sorted({1, 1, 1}), v, RescaleDirection::forward);
  EXPECT_EQ(f, (std::vector<double>{-2, 1, 1}));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-100, 100);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x{U(rng), U(rng), U(rng)};
    auto y = rescale(rescale(x, v, RescaleDirection::forward), v, RescaleDirection::inverse);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(y[i], x[i], 1e-12 * std::fabs(x[i]) + 1e-14);
  }
  std::vector<double> xi{3 * v.v(0), 3 * v.v(1), 3 * v.v(2)};
  EXPECT_EQ(rescale(xi, v, RescaleDirection::inverse), (std::vector<double>{3, 3, 3}));
}

TEST(GridConstants, Validation) {
  GridConstants gc;
  EXPECT_NO_THROW(gc.validate());
  gc.C0 = 1;
  EXPECT_ANY_THROW(gc.validate());
  gc = {};
  gc.K = 1;
  EXPECT_ANY_THROW(gc.validate());
}
