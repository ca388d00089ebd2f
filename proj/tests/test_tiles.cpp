#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tfa/errors.hpp"
#include "tfa/tiles.hpp"

#include "support.hpp"

using namespace tfa;
using testkit::random_tree;
using testkit::stacked_sample;

namespace {

const testkit::RichWindow& fx() { return testkit::rich_window(); }

Cube unit_cube(std::vector<long long> lat, int jq = 0, int K = 4) {
  Cube q;
  q.jq = jq;
  q.j = K * jq;
  for (long long a : lat) q.center.push_back(Dyadic::ratio(a, 2 - q.j));
  for (int i = 0; i < q.n(); ++i) q.adjusted.push_back(q.nominal(i));
  return q;
}

}  // namespace

TEST(TileOrder, Basics) {
  Cube q = unit_cube({-8, 0, 8});
  Tile P{0, {Dyadic(), Dyadic::from_int(1)}, q.interval(0), q.adjusted[0]};
  EXPECT_TRUE(tile_leq(P, P));
  Tile small = P;
  small.I = {Dyadic(), Dyadic::ratio(1, 4)};
  EXPECT_TRUE(tile_leq(small, P));
  EXPECT_FALSE(tile_leq(P, small));
  Tile other = P;
  other.i = 1;
  EXPECT_THROW(tile_leq(P, other), std::invalid_argument);
}

TEST(TileOrder, AntisymmetryOnFamily) {
  ASSERT_FALSE(fx().rich.empty());
  TileSet ts = fx().family(fx().rich[0]);
  std::mt19937_64 rng(3);
  auto sample = stacked_sample(ts, 120, rng);
  for (int i = 0; i < ts.n(); ++i)
    for (int a : sample)
      for (int b : sample) {
        Tile A = ts.tile(a, i), B = ts.tile(b, i);
        if (tile_leq(A, B) && tile_leq(B, A)) {
          EXPECT_EQ(A.I, B.I);
          EXPECT_EQ(A.omega_bar, B.omega_bar);
        }
      }
}

TEST(TileOrder, MultiTileTransitivityExhaustive) {
  std::mt19937_64 rng(11);
  int checked = 0, related = 0;
  for (size_t k = 0; k < std::min<size_t>(fx().rich.size(), 6); ++k) {
    TileSet full = fx().family(fx().rich[k]);
    TileSet ts = full.subset(stacked_sample(full, 200, rng));
    auto bad = order_violation(ts);
    EXPECT_FALSE(bad.has_value()) << *bad;
    for (int a = 0; a < ts.size(); ++a)
      for (int b = 0; b < ts.size(); ++b)
        if (a != b && multitile_leq(ts, a, b)) ++related;
    ++checked;
  }
  EXPECT_GT(checked, 0);
  EXPECT_GT(related, 0);
}

TEST(TileOrder, DisjointTilesUnrelated) {
  Cube a = unit_cube({-8, 0, 8});
  Cube b = unit_cube({-8 - 4096, -4096, 8 - 4096});
  GridConstants gc;
  TileSet ts({a, b}, DegeneracyVector({-2, 1, 1}, 4), gc);
  EXPECT_TRUE(multitile_leq(ts, 0, 0));
  EXPECT_FALSE(multitile_leq(ts, 0, 1));
  EXPECT_FALSE(multitile_leq(ts, 1, 0));
}

TEST(Trees, RandomTreesValidAndLacunaritySplits) {
  std::mt19937_64 rng(5);
  int trees = 0;
  for (int r = 0; r < 100; ++r) {
    TileSet ts = fx().family(fx().rich[r % fx().rich.size()]);
    Tree T = random_tree(ts, rng, r % 2 == 1);
    ASSERT_NO_THROW(validate_tree(ts, T));
    auto classes = split_by_lacunarity(ts, T);
    size_t total = 0;
    std::set<int> seen;
    for (const auto& [mask, C] : classes) {
      EXPECT_NE(mask, 0u);
      EXPECT_EQ(C.s, T.s);
      EXPECT_EQ(C.top, T.top);
      total += C.tiles.size();
      seen.insert(C.tiles.begin(), C.tiles.end());
    }
    EXPECT_EQ(total, T.tiles.size());
    EXPECT_EQ(seen.size(), T.tiles.size());
    ++trees;
  }
  EXPECT_EQ(trees, 100);
}

TEST(Trees, SingletonHasOneClass) {
  GridConstants gc;
  Cube q = unit_cube({-8, 0, 8});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  Tree T{{0}, q.center[2], {0, 0}};
  validate_tree(ts, T);
  EXPECT_EQ(split_by_lacunarity(ts, T).size(), 1u);
}

TEST(Trees, DiagonalTileThrows) {
  // a box on the diagonal is not Whitney and has no lacunary index
  GridConstants gc;
  Cube q = unit_cube({4, 4, 4});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  Tree T{{0}, q.center[0], {0, 0}};
  EXPECT_THROW(split_by_lacunarity(ts, T), StructuralError);
}

TEST(Trees, ValidateRejectsBadTop) {
  GridConstants gc;
  Cube q = unit_cube({-8, 0, 8});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  Tree T{{0}, Dyadic::from_int(100), {0, 0}};
  EXPECT_THROW(validate_tree(ts, T), StructuralError);
  EXPECT_THROW(validate_tree(ts, Tree{{}, Dyadic(), {0, 0}}), StructuralError);
}

TEST(Anatomy, SingleTileHandTrace) {
  GridConstants gc;
  Cube q = unit_cube({-8, 0, 8});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  Tree T{{0}, q.center[2], {0, 0}};
  TreeAnatomy A = compute_anatomy(ts, T);
  ASSERT_EQ(A.partition.size(), 16u);
  for (int k = 0; k < 16; ++k) EXPECT_EQ(A.partition[k], (DyadicSpan{1, k}));
  ASSERT_EQ(A.hull(0).size(), 1u);
  EXPECT_EQ(A.hull(0)[0], (DInterval{Dyadic(), Dyadic::from_int(1)}));
  EXPECT_TRUE(A.hull(1).empty());
  BoundaryStats st = boundary_statistics(A);
  EXPECT_DOUBLE_EQ(st.sumE, 2.0);
  EXPECT_DOUBLE_EQ(st.sumHull, 2.0);
  EXPECT_TRUE(st.side_disjoint);
  EXPECT_TRUE(st.min_gap_ok);
}

TEST(Anatomy, PropertiesOnRandomTrees) {
  std::mt19937_64 rng(9);
  double worst_hull = 0;
  for (int r = 0; r < 60; ++r) {
    TileSet ts = fx().family(fx().rich[(3 * r) % fx().rich.size()]);
    Tree T = random_tree(ts, rng, true);
    TreeAnatomy A = compute_anatomy(ts, T);
    const int K = A.K;
    // exact partition of I_top
    DInterval top = T.top.interval(K);
    Dyadic cursor = top.lo;
    for (size_t k = 0; k < A.partition.size(); ++k) {
      DInterval I = A.partition[k].interval(K);
      ASSERT_EQ(I.lo, cursor);
      cursor = I.hi;
      if (k > 0) {
        int d = std::abs(A.partition[k].jq - A.partition[k - 1].jq);
        EXPECT_LE(d, 1) << "neighbour ratio above 2^K";
      }
    }
    EXPECT_EQ(cursor, top.hi);
    // hulls: monotone, dyadic at their own scale, contain the supports
    std::vector<DInterval> prev;
    bool first = true;
    for (int j = T.top.jq; j <= T.top.jq + 4; ++j) {
      auto H = A.hull(j);
      Dyadic L = Dyadic::pow2(-K * j);
      for (const auto& c : H) {
        EXPECT_TRUE(c.lo.is_multiple_of_pow2(-K * j));
        EXPECT_TRUE(c.hi.is_multiple_of_pow2(-K * j));
        EXPECT_TRUE(L <= c.length());
        if (!first) {
          bool inside = false;
          for (const auto& p : prev) inside = inside || p.contains(c);
          EXPECT_TRUE(inside) << "hull not decreasing at j=" << j;
        }
      }
      auto box = A.box_of_j.find(j);
      if (box != A.box_of_j.end())
        for (const auto& piece : A.supports.at(box->second)) {
          bool inside = false;
          for (const auto& c : H) inside = inside || c.contains(piece);
          EXPECT_TRUE(inside) << "hull misses support at j=" << j;
        }
      prev = H;
      first = false;
    }
    // get-tile lookup on every interval of every level meeting the hull
    for (const auto& [j, comps] : A.hulls) {
      long long count = 1LL << (K * (j - T.top.jq));
      if (count > 4096) continue;
      for (long long a = 0; a < count; ++a) {
        DyadicSpan I0{j, (T.top.a << (K * (j - T.top.jq))) + a};
        DInterval b = I0.interval(K);
        DInterval b3{b.lo - b.length(), b.hi + b.length()};
        bool meets = false;
        for (const auto& c : comps) meets = meets || c.overlaps_open(b3);
        if (meets) EXPECT_TRUE(A.get_tile(I0).has_value());
      }
    }
    BoundaryStats st = boundary_statistics(A);
    EXPECT_TRUE(st.side_disjoint) << st.witness;
    EXPECT_TRUE(st.min_gap_ok) << st.witness;
    worst_hull = std::max(worst_hull, st.sumHull / st.I_top);
  }
  std::printf("max sumHull/|I_T| over random trees: %.3f\n", worst_hull);
}

TEST(Anatomy, MuProfilePeaksAtBoundaries) {
  GridConstants gc;
  Cube q = unit_cube({-8, 0, 8});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  TreeAnatomy A = compute_anatomy(ts, Tree{{0}, q.center[2], {0, 0}});
  auto mu = mu_profile(A, 0, 256);
  EXPECT_NEAR(mu[0], 1.0, 1e-12);
  EXPECT_LT(mu[128], 1e-17);
}

TEST(Separation, SingleTreeVacuous) {
  GridConstants gc;
  Cube q = unit_cube({-8, 0, 8});
  TileSet ts({q}, DegeneracyVector({-2, 1, 1}, 4), gc);
  std::vector<Tree> log{{{0}, q.center[2], {0, 0}}};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(separation_pair(ts, log, i, +1).violations, 0);
    EXPECT_EQ(separation_triple(ts, log, i, +1).violations, 0);
  }
}
