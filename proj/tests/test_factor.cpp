#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tfa/errors.hpp"
#include "tfa/factor.hpp"

using namespace tfa;

namespace {

Cube cube2(int j, long long a0, long long a1) {
  Cube q;
  q.j = j;
  q.jq = 0;
  q.center = {Dyadic::ratio(a0, 2 - j), Dyadic::ratio(a1, 2 - j)};
  return q;
}

}  // namespace

TEST(Factor, ConstantPieceIsOneTerm) {
  Cube q = cube2(0, -8, 8);
  auto f = tensor_factorize(q, [](const std::vector<double>&) { return 1.0; }, 8, 1e-12);
  ASSERT_EQ(f.terms.size(), 1u);
  EXPECT_EQ(f.terms[0].k, (std::vector<int>{0, 0}));
  EXPECT_NEAR(std::abs(f.terms[0].coef - cplx(1, 0)), 0.0, 1e-14);
  EXPECT_LT(f.residual, 1e-14);
  EXPECT_NEAR(std::abs(f.evaluate({-2.1, 1.95}) - cplx(1, 0)), 0.0, 1e-14);
}

TEST(Factor, WeightsPositiveAndDecreasing) {
  double prev = 2;
  for (int k = 0; k < 40; ++k) {
    double w = factor_weight({k, 0, 0});
    EXPECT_GT(w, 0);
    EXPECT_LT(w, prev);
    prev = w;
  }
  EXPECT_DOUBLE_EQ(factor_weight({3, 4}), std::pow(6.0, -20));
}

TEST(Factor, CutoffShape) {
  Cube q = cube2(0, -8, 8);
  EXPECT_EQ(factor_cutoff(q, 0, -2.0), 1.0);
  EXPECT_EQ(factor_cutoff(q, 0, -2.25), 1.0);
  EXPECT_EQ(factor_cutoff(q, 0, -2.5), 0.0);
  EXPECT_EQ(factor_cutoff(q, 0, -1.4), 0.0);
  double v = factor_cutoff(q, 0, -2.4);
  EXPECT_GT(v, 0);
  EXPECT_LT(v, 1);
}

TEST(Factor, PartitionPieceConvergesByDoubling) {
  GridConstants gc;
  Cube q = cube2(0, -8, 8);
  Piece piece = [&](const std::vector<double>& x) { return cube_piece(q, x, gc); };
  auto f = tensor_factorize_converged(q, piece, 1e-6, 8, 256);
  EXPECT_LE(f.residual, 1e-6);
  std::printf("k_max %d terms %zu residual %.3g\n", f.k_max, f.terms.size(), f.residual);
  // off-grid points of (1/2)Q~
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (int t = 0; t < 12; ++t) {
    std::vector<double> x = {-2 + u(rng), 2 + u(rng)};
    EXPECT_NEAR(std::abs(f.evaluate(x) - piece(x)), 0.0, 1e-5);
  }
  // the factorised form vanishes outside Q~
  EXPECT_EQ(std::abs(f.evaluate({-2.6, 2.0})), 0.0);
}

TEST(Factor, ResidualDecreasesWithKmax) {
  GridConstants gc;
  Cube q = cube2(0, -8, 8);
  Piece piece = [&](const std::vector<double>& x) { return cube_piece(q, x, gc); };
  double prev = 1e9;
  for (int k : {8, 16, 32, 64}) {
    auto f = tensor_factorize(q, piece, k, 1.0);
    EXPECT_LT(f.residual, prev);
    prev = f.residual;
  }
}

TEST(Factor, ThreeDimensionalPiece) {
  GridConstants gc;
  Cube q;
  q.j = 0;
  q.center = {Dyadic::ratio(-8, 2), Dyadic::from_int(0), Dyadic::ratio(8, 2)};
  Piece piece = [&](const std::vector<double>& x) { return cube_piece(q, x, gc); };
  auto f = tensor_factorize(q, piece, 32, 1e-2);
  EXPECT_LE(f.residual, 1e-2);
  std::vector<double> x = {-1.9, 0.1, 2.05};
  EXPECT_NEAR(std::abs(f.evaluate(x) - piece(x)), 0.0, 1e-2);
}

TEST(Factor, UnreachableToleranceThrows) {
  GridConstants gc;
  Cube q = cube2(0, -8, 8);
  Piece piece = [&](const std::vector<double>& x) { return cube_piece(q, x, gc); };
  EXPECT_THROW(tensor_factorize_converged(q, piece, 1e-6, 4, 16), StructuralError);
}
