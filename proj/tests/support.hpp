#ifndef TFA_TEST_SUPPORT_HPP
#define TFA_TEST_SUPPORT_HPP

#include <algorithm>
#include <random>
#include <set>

#include "tfa/signal.hpp"
#include "tfa/tiles.hpp"

namespace tfa::testkit {

// window jq 0..1 around the plane of v = (-2, 1, 1)
struct SmallWindow {
  GridConstants gc;
  DegeneracyVector v{{-2, 1, 1}, 4};
  std::vector<Cube> cubes;
  SparsifyResult sparse;
  std::vector<int> pairs;  // families with a j = 0 and a j = 4 cube

  SmallWindow() {
    WhitneyRequest req;
    req.jq_min = 0;
    req.jq_max = 1;
    req.plane_normal = {-2, 1, 1};
    for (int i = 0; i < 3; ++i) req.bounds.push_back({-Dyadic::pow2(5), Dyadic::pow2(5)});
    cubes = generate_whitney_cubes(req, gc);
    sparse = sparsify(cubes, gc);
    for (const auto& f : sparse.families) {
      std::set<int> js;
      for (int c : f.cubes) js.insert(cubes[c].jq);
      if (js.size() == 2) pairs.push_back(f.id);
    }
  }
  TileSet family(int id) const { return family_tiles(cubes, sparse.families[id], v, gc); }
};

inline const SmallWindow& small_window() {
  static SmallWindow w;
  return w;
}

// trig polynomial with sup over the grid equal to one
inline Signal bounded_signal(int N, int kmax, std::mt19937_64& rng, int modes = 12) {
  std::uniform_int_distribution<int> pk(-kmax, kmax);
  std::normal_distribution<double> g;
  std::vector<cplx> c(N, 0.0);
  for (int m = 0; m < modes; ++m) c[frequency_bin(pk(rng), N)] += cplx(g(rng), g(rng));
  Signal f = inverse(c);
  double sup = 0;
  for (auto z : f.x) sup = std::max(sup, std::abs(z));
  for (auto& z : f.x) z /= sup;
  return f;
}

// window jq 2..3 at |x| <= 2^14, two-scale families
struct RichWindow {
  GridConstants gc;
  DegeneracyVector v{{-2, 1, 1}, 4};
  std::vector<Cube> cubes;
  SparsifyResult sparse;
  std::vector<int> rich;  // families with two scales

  RichWindow() {
    WhitneyRequest req;
    req.jq_min = 2;
    req.jq_max = 3;
    req.plane_normal = {-2, 1, 1};
    for (int i = 0; i < 3; ++i) req.bounds.push_back({-Dyadic::pow2(14), Dyadic::pow2(14)});
    cubes = generate_whitney_cubes(req, gc);
    sparse = sparsify(cubes, gc);
    for (const auto& f : sparse.families) {
      std::set<int> js;
      for (int c : f.cubes) js.insert(cubes[c].jq);
      if (js.size() == 2) rich.push_back(f.id);
    }
  }
  TileSet family(int id) const { return family_tiles(cubes, sparse.families[id], v, gc); }
};


inline const RichWindow& rich_window() {
  static RichWindow w;
  return w;
}

// tiles of a family meeting random points, so the order has content
inline std::vector<int> stacked_sample(const TileSet& ts, int want, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::set<int> pick;
  while (static_cast<int>(pick.size()) < want) {
    double x = u(rng);
    for (int t = 0; t < ts.size() && static_cast<int>(pick.size()) < want; ++t) {
      DInterval I = ts.I(t);
      if (I.lo.to_double() <= x && x < I.hi.to_double()) pick.insert(t);
    }
  }
  return {pick.begin(), pick.end()};
}

// random valid tree: a random tile and coordinate fix the top, then a random subset
inline Tree random_tree(const TileSet& ts, std::mt19937_64& rng, bool subset) {
  const int K = ts.gc().K;
  std::uniform_int_distribution<int> pt(0, ts.size() - 1), pi(0, ts.n() - 1);
  for (;;) {
    int t = pt(rng), i = pi(rng);
    DyadicSpan I = ts[t].span;
    int up = std::uniform_int_distribution<int>(0, I.jq)(rng);
    I = {I.jq - up, I.a >> (K * up)};
    DInterval A = ts.cube_of(t).adjusted[i];
    Dyadic r = Dyadic::pow2(K * I.jq) * 500;
    if (A.hi - A.lo < r * 2) continue;
    long long span = ((A.hi - A.lo - r * 2).raw() >> Dyadic::kFrac);
    long long off = span > 0 ? std::uniform_int_distribution<long long>(0, span)(rng) : 0;
    Dyadic s = A.lo + r + Dyadic::from_int(off);
    std::vector<char> alive(ts.size(), 1);
    Tree T{maximal_tree(ts, alive, s, I), s, I};
    if (subset && T.tiles.size() > 2) {
      std::vector<int> keep;
      for (int x : T.tiles)
        if (x == t || std::bernoulli_distribution(0.3)(rng)) keep.push_back(x);
      T.tiles = keep;
    }
    return T;
  }
}

// dense trig polynomial on |k| <= kmax with l1-normalised coefficients, so |f| <= 1 on any grid
inline Signal unit_signal(int N, int kmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> c(N, 0.0);
  double l1 = 0;
  for (int k = -kmax; k <= kmax; ++k) {
    cplx z(g(rng), g(rng));
    c[frequency_bin(k, N)] = z;
    l1 += std::abs(z);
  }
  for (auto& z : c) z /= l1;
  return inverse(c);
}

inline Signal mode(int N, int k) {
  std::vector<cplx> c(N, 0.0);
  c[frequency_bin(k, N)] = 1;
  return inverse(c);
}

}  // namespace tfa::testkit

#endif
