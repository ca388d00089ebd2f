#include <gtest/gtest.h>

#include <random>

#include "tfa/dyadic.hpp"

using tfa::DInterval;
using tfa::Dyadic;

TEST(Dyadic, RoundTripString) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    long long p = static_cast<long long>(rng() % 2000001) - 1000000;
    int q = static_cast<int>(rng() % 60) - 20;
    Dyadic d = Dyadic::ratio(p, q);
    EXPECT_EQ(Dyadic::parse(d.str()), d);
  }
  EXPECT_EQ(Dyadic::from_int(3).str(), "3/2^0");
  EXPECT_EQ(Dyadic::ratio(6, 3).str(), "3/2^2");
  EXPECT_EQ(Dyadic().str(), "0/2^0");
  EXPECT_EQ(Dyadic::ratio(-5, 1).str(), "-5/2^1");
}

TEST(Dyadic, ExactArithmetic) {
  Dyadic a = Dyadic::ratio(3, 4), b = Dyadic::ratio(5, 2);
  EXPECT_EQ(a + b, Dyadic::ratio(23, 4));
  EXPECT_EQ(b - a, Dyadic::ratio(17, 4));
  EXPECT_EQ(a * 8, Dyadic::ratio(3, 1));
  EXPECT_EQ(a.mul_pow2(4), Dyadic::from_int(3));
  EXPECT_EQ(tfa::dmul(a, b), Dyadic::ratio(15, 6));
  EXPECT_DOUBLE_EQ((a + b).to_double(), 1.4375);
  EXPECT_THROW(Dyadic::pow2(-Dyadic::kFrac).mul_pow2(-1), std::domain_error);
}

TEST(Dyadic, FloorTo) {
  EXPECT_EQ(Dyadic::ratio(7, 1).floor_to(1), Dyadic::from_int(2));
  EXPECT_EQ(Dyadic::ratio(-7, 1).floor_to(1), Dyadic::from_int(-4));
  EXPECT_TRUE(Dyadic::from_int(12).is_multiple_of_pow2(2));
  EXPECT_FALSE(Dyadic::from_int(12).is_multiple_of_pow2(3));
}

TEST(DInterval, Predicates) {
  DInterval a{Dyadic::from_int(0), Dyadic::from_int(4)};
  DInterval b{Dyadic::from_int(4), Dyadic::from_int(6)};
  DInterval c{Dyadic::from_int(1), Dyadic::from_int(2)};
  EXPECT_TRUE(a.intersects(b));
  EXPECT_FALSE(a.overlaps_open(b));
  EXPECT_TRUE(a.contains(c));
  EXPECT_FALSE(c.contains(a));
  DInterval d = c.dilate(3);
  EXPECT_EQ(d.lo, Dyadic::ratio(0, 0));
  EXPECT_EQ(d.hi, Dyadic::from_int(3));
  EXPECT_EQ(c.dilate(1000).length(), Dyadic::from_int(1000));
}
