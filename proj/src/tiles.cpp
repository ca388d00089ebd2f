#include "tfa/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tfa/errors.hpp"

namespace tfa {

DInterval DyadicSpan::interval(int K) const {
  Dyadic L = Dyadic::pow2(-K * jq);
  return {L * a, L * (a + 1)};
}

bool tile_leq(const Tile& P, const Tile& P2) {
  if (P.i != P2.i) throw std::invalid_argument("tile_leq: tiles have different indices");
  return P2.I.contains_open(P.I) && P.omega_bar.contains(P2.omega_bar);
}

TileSet::TileSet(std::vector<Cube> cubes, DegeneracyVector v, GridConstants gc)
    : gc_(gc), v_(std::move(v)), cubes_(std::move(cubes)) {
  for (size_t c = 0; c < cubes_.size(); ++c) {
    const Cube& q = cubes_[c];
    if (q.n() != v_.n()) throw std::invalid_argument("cube dimension differs from v");
    if (static_cast<int>(q.adjusted.size()) != q.n())
      throw StructuralError("tile set built from a cube without adjusted intervals");
    if (q.jq < 0) throw std::invalid_argument("cubes with |I| > 1 are outside the window");
    long long count = 1LL << (gc_.K * q.jq);
    for (long long a = 0; a < count; ++a) tiles_.push_back({static_cast<int>(c), {q.jq, a}});
  }
}

double TileSet::I_length(int t) const { return std::ldexp(1.0, -gc_.K * tiles_[t].span.jq); }

Tile TileSet::tile(int t, int i) const {
  const Cube& q = cube_of(t);
  return {i, I(t), q.interval(i), q.adjusted[i]};
}

double TileSet::omega_center(int t, int i) const { return v_.v(i) * cube_of(t).center[i].to_double(); }

double TileSet::omega_length(int t, int i) const {
  return std::fabs(v_.v(i)) * std::ldexp(1.0, cube_of(t).j);
}

TileSet TileSet::subset(const std::vector<int>& keep) const {
  TileSet out;
  out.gc_ = gc_;
  out.v_ = v_;
  out.cubes_ = cubes_;
  for (int t : keep) out.tiles_.push_back(tiles_[t]);
  return out;
}

bool multitile_leq(const TileSet& ts, int a, int b) {
  if (!ts.I(b).contains_open(ts.I(a))) return false;
  const Cube& qa = ts.cube_of(a);
  const Cube& qb = ts.cube_of(b);
  for (int i = 0; i < ts.n(); ++i)
    if (qa.adjusted[i].contains(qb.adjusted[i])) return true;
  return false;
}

DInterval top_window(Dyadic s, const DyadicSpan& I, int K) {
  Dyadic r = Dyadic::pow2(K * I.jq) * 500;
  return {s - r, s + r};
}

bool admits(const TileSet& ts, int t, Dyadic s, const DyadicSpan& I) {
  const int K = ts.gc().K;
  if (!I.interval(K).contains_open(ts.I(t))) return false;
  DInterval w = top_window(s, I, K);
  const Cube& q = ts.cube_of(t);
  for (int i = 0; i < ts.n(); ++i)
    if (q.adjusted[i].contains(w)) return true;
  return false;
}

std::vector<int> maximal_tree(const TileSet& ts, const std::vector<char>& alive, Dyadic s,
                              const DyadicSpan& I) {
  std::vector<int> out;
  for (int t = 0; t < ts.size(); ++t)
    if (alive[t] && admits(ts, t, s, I)) out.push_back(t);
  return out;
}

void validate_tree(const TileSet& ts, const Tree& T) {
  if (T.tiles.empty()) throw StructuralError("tree: empty tile set");
  std::map<int, int> box;
  for (int t : T.tiles) {
    if (!T.top.interval(ts.gc().K).contains_open(ts.I(t)))
      throw StructuralError("tree: I_P not inside I_T for tile " + std::to_string(t));
    if (!admits(ts, t, T.s, T.top))
      throw StructuralError("tree: top window not inside any adjusted interval, tile " +
                            std::to_string(t));
    const Cube& q = ts.cube_of(t);
    auto [it, fresh] = box.emplace(q.j, ts[t].cube);
    if (!fresh && it->second != ts[t].cube)
      throw StructuralError("tree: two boxes share j = " + std::to_string(q.j));
  }
}

bool is_lacunary(const TileSet& ts, int t, int i, Dyadic s) {
  return !ts.cube_of(t).interval(i).dilate(2).contains(s);
}

std::map<unsigned, Tree> split_by_lacunarity(const TileSet& ts, const Tree& T) {
  std::map<unsigned, Tree> out;
  for (int t : T.tiles) {
    unsigned mask = 0;
    for (int i = 0; i < ts.n(); ++i)
      if (is_lacunary(ts, t, i, T.s)) mask |= 1u << i;
    if (mask == 0) {
      std::ostringstream os;
      os << "tile " << t << " is non-lacunary in every coordinate at s = " << T.s.str();
      throw StructuralError(os.str());
    }
    auto [it, fresh] = out.try_emplace(mask);
    if (fresh) {
      it->second.s = T.s;
      it->second.top = T.top;
    }
    it->second.tiles.push_back(t);
  }
  return out;
}

// ---- anatomy -----------------------------------------------------------------

namespace {

std::vector<DInterval> merge(std::vector<DInterval> v) {
  std::sort(v.begin(), v.end(), [](const DInterval& a, const DInterval& b) { return a.lo < b.lo; });
  std::vector<DInterval> out;
  for (const auto& x : v) {
    if (!out.empty() && x.lo <= out.back().hi)
      out.back().hi = dmax(out.back().hi, x.hi);
    else
      out.push_back(x);
  }
  return out;
}

struct PartitionBuilder {
  int K;
  const std::vector<DInterval>& tiles;
  std::vector<DyadicSpan>& out;

  bool triple_hits(const DyadicSpan& I) const {
    DInterval b = I.interval(K);
    Dyadic L = b.length();
    DInterval t3{b.lo - L, b.hi + L};
    for (const auto& P : tiles)
      if (t3.contains_open(P)) return true;
    return false;
  }

  void run(const DyadicSpan& I) {
    if (!triple_hits(I)) {
      out.push_back(I);
      return;
    }
    long long kids = 1LL << K;
    for (long long c = 0; c < kids; ++c) run({I.jq + 1, I.a * kids + c});
  }
};

}  // namespace

std::vector<DInterval> TreeAnatomy::hull(int j) const {
  auto it = hulls.find(j);
  return it == hulls.end() ? std::vector<DInterval>{} : it->second;
}

std::optional<int> TreeAnatomy::get_tile(const DyadicSpan& I0) const {
  DInterval b = I0.interval(K);
  Dyadic L = b.length();
  DInterval t3{b.lo - L, b.hi + L};
  bool meets = false;
  for (const auto& c : hull(I0.jq))
    if (c.overlaps_open(t3)) meets = true;
  if (!meets) return std::nullopt;
  DInterval t10 = b.dilate(10);
  for (size_t k = 0; k < tiles.size(); ++k) {
    const DInterval& P = tile_intervals[k];
    if (P.length() <= L && t10.contains_open(P)) return tiles[k];
  }
  return std::nullopt;
}

TreeAnatomy compute_anatomy(const TileSet& ts, const Tree& T) {
  TreeAnatomy A;
  A.K = ts.gc().K;
  A.top = T.top;
  A.tiles = T.tiles;
  std::map<int, std::vector<DInterval>> raw;
  for (int t : T.tiles) {
    A.tile_intervals.push_back(ts.I(t));
    raw[ts[t].cube].push_back(ts.I(t));
    A.box_of_j[ts[t].span.jq] = ts[t].cube;
  }
  for (auto& [c, v] : raw) A.supports[c] = merge(v);

  std::vector<DInterval> distinct = A.tile_intervals;
  std::sort(distinct.begin(), distinct.end(),
            [](const DInterval& a, const DInterval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  PartitionBuilder pb{A.K, distinct, A.partition};
  if (!T.tiles.empty()) pb.run(T.top);
  std::sort(A.partition.begin(), A.partition.end(),
            [&](const DyadicSpan& a, const DyadicSpan& b) { return a.interval(A.K).lo < b.interval(A.K).lo; });

  int jmax = T.top.jq;
  for (const auto& p : A.partition) jmax = std::max(jmax, p.jq);
  for (int j = T.top.jq; j <= jmax; ++j) {
    std::vector<DInterval> members;
    for (const auto& p : A.partition)
      if (p.jq > j) members.push_back(p.interval(A.K));
    if (!members.empty()) A.hulls[j] = merge(members);
  }
  return A;
}

std::vector<SideInterval> side_intervals(const TreeAnatomy& A, double m) {
  std::vector<SideInterval> out;
  for (const auto& [j, comps] : A.hulls) {
    double h = std::exp2(-A.K * (j + m));
    for (const auto& c : comps) {
      double xl = c.lo.to_double(), xr = c.hi.to_double();
      out.push_back({j, true, xl - h / 2, xl - h / 4});
      out.push_back({j, false, xr + h / 4, xr + h / 2});
    }
  }
  return out;
}

BoundaryStats boundary_statistics(const TreeAnatomy& A) {
  BoundaryStats st;
  st.I_top = std::exp2(-A.K * A.top.jq);
  for (const auto& [j, c] : A.box_of_j)
    st.sumE += std::exp2(-A.K * j) * 2.0 * static_cast<double>(A.supports.at(c).size());
  for (const auto& [j, comps] : A.hulls)
    st.sumHull += std::exp2(-A.K * j) * 2.0 * static_cast<double>(comps.size());

  // nesting of supports along increasing j
  for (auto a = A.box_of_j.begin(); a != A.box_of_j.end(); ++a) {
    for (auto b = std::next(a); b != A.box_of_j.end(); ++b) {
      const auto& big = A.supports.at(a->second);
      for (const auto& piece : A.supports.at(b->second)) {
        bool inside = false;
        for (const auto& c : big)
          if (c.contains(piece)) inside = true;
        if (!inside && st.nesting) {
          st.nesting = false;
          st.witness = "support of j=" + std::to_string(b->first) + " piece " + piece.str() +
                       " not inside support of j=" + std::to_string(a->first);
        }
      }
    }
  }

  auto sides = side_intervals(A, 0.0);
  for (int left = 0; left < 2; ++left) {
    std::vector<SideInterval> v;
    for (const auto& s : sides)
      if (s.left == static_cast<bool>(left)) v.push_back(s);
    for (size_t a = 0; a < v.size(); ++a) {
      for (size_t b = a + 1; b < v.size(); ++b) {
        const auto& x = v[a].lo < v[b].lo ? v[a] : v[b];
        const auto& y = v[a].lo < v[b].lo ? v[b] : v[a];
        double gap = y.lo - x.hi;
        if (gap < 0 && st.side_disjoint) {
          st.side_disjoint = false;
          std::ostringstream os;
          os << "side intervals overlap: j=" << x.j << " (" << x.lo << "," << x.hi << ") and j=" << y.j
             << " (" << y.lo << "," << y.hi << ")";
          st.witness = os.str();
        }
        double need = std::exp2(-A.K * (std::min(x.j, y.j) + 2));
        if (gap < need && st.min_gap_ok) {
          st.min_gap_ok = false;
          std::ostringstream os;
          os << "side gap " << gap << " < " << need << " between j=" << x.j << " and j=" << y.j;
          if (st.witness.empty()) st.witness = os.str();
        }
      }
    }
  }
  return st;
}

std::vector<double> mu_profile(const TreeAnatomy& A, int j, int N) {
  std::vector<double> mu(N, 0.0);
  for (const auto& [jp, comps] : A.hulls) {
    if (jp < 0) continue;
    double w = std::exp2(-std::abs(jp - j) / 100.0);
    double scale = std::exp2(A.K * jp);
    for (const auto& c : comps) {
      for (double y : {c.lo.to_double(), c.hi.to_double()}) {
        for (int k = 0; k < N; ++k) {
          double x = static_cast<double>(k) / N;
          mu[k] += w * std::pow(1 + scale * std::fabs(x - y), -100.0);
        }
      }
    }
  }
  return mu;
}

// ---- separation ----------------------------------------------------------------

namespace {

bool windows_meet(double x1, double L1, double x2, double L2, double a, int sign) {
  double lo1 = sign > 0 ? x1 + a * L1 : x1 - 4 * a * L1;
  double hi1 = sign > 0 ? x1 + 4 * a * L1 : x1 - a * L1;
  double lo2 = sign > 0 ? x2 + a * L2 : x2 - 4 * a * L2;
  double hi2 = sign > 0 ? x2 + 4 * a * L2 : x2 - a * L2;
  return !(hi1 < lo2 || hi2 < lo1);
}

}  // namespace

SeparationReport separation_pair(const TileSet& ts, const std::vector<Tree>& trees, int i, int sign,
                                 int s_max) {
  SeparationReport rep;
  const int K = ts.gc().K;
  const double vi = ts.v().v(i);
  const double base = 5000.0 * ts.gc().C0;
  for (size_t a = 0; a < trees.size(); ++a) {
    const Tree& T = trees[a];
    double xiT = T.s.to_double() * vi;
    DInterval IT = T.top.interval(K);
    for (size_t b = 0; b < trees.size(); ++b) {
      const Tree& T2 = trees[b];
      double xiT2 = T2.s.to_double() * vi;
      for (int P : T.tiles) {
        double cP = ts.omega_center(P, i), LP = ts.omega_length(P, i);
        for (int P2 : T2.tiles) {
          double cP2 = ts.omega_center(P2, i), LP2 = ts.omega_length(P2, i);
          if (!(LP < LP2)) continue;
          if (std::fabs(cP - cP2) > 5 * (LP + LP2)) continue;
          bool hit = false;
          for (int sh = 0; sh <= s_max && !hit; ++sh)
            hit = windows_meet(xiT, LP, xiT2, LP2, std::ldexp(base, -sh), sign);
          if (!hit) continue;
          ++rep.hits;
          if (ts.I(P2).overlaps_open(IT)) {
            if (rep.violations++ == 0) {
              std::ostringstream os;
              os << "trees " << a << "," << b << " tiles " << P << "," << P2 << ": I_P' meets I_T";
              rep.witness = os.str();
            }
          }
        }
      }
    }
  }
  return rep;
}

SeparationReport separation_triple(const TileSet& ts, const std::vector<Tree>& trees, int i,
                                   int sign, int s_max) {
  SeparationReport rep;
  const int K = ts.gc().K;
  const double vi = ts.v().v(i);
  auto center = [&](const Tree& T) { return T.s.to_double() * vi; };
  auto width = [&](const Tree& T) { return std::fabs(vi) * std::exp2(K * T.top.jq); };
  for (size_t t0 = 0; t0 < trees.size(); ++t0) {
    double x0 = center(trees[t0]), L0 = width(trees[t0]);
    for (int sh = 0; sh <= s_max; ++sh) {
      double a = std::ldexp(10.0, -sh);
      std::vector<size_t> S;
      for (size_t t = 0; t < trees.size(); ++t) {
        double x = center(trees[t]), L = width(trees[t]);
        if (std::fabs(x - x0) > 5 * (L + L0)) continue;
        if (!(L0 <= L)) continue;
        if (!windows_meet(x0, L0, x, L, a, sign)) continue;
        S.push_back(t);
      }
      if (S.size() < 3) continue;
      ++rep.hits;
      for (size_t x : S) {
        DInterval Ix = trees[x].top.interval(K);
        int above = 0;
        for (size_t y : S)
          if (y != x && trees[y].top.interval(K).contains_open(Ix)) ++above;
        if (above >= 2 && rep.violations++ == 0) {
          std::ostringstream os;
          os << "T0=" << t0 << " shift " << sh << ": tree " << x << " lies under two other tops";
          rep.witness = os.str();
        }
      }
    }
  }
  return rep;
}

std::optional<std::string> order_violation(const TileSet& ts) {
  const int n = ts.size();
  const int words = (n + 63) / 64;
  std::vector<std::vector<uint64_t>> leq(n, std::vector<uint64_t>(words, 0));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      if (multitile_leq(ts, a, b)) leq[a][b / 64] |= 1ULL << (b % 64);
    if (!(leq[a][a / 64] >> (a % 64) & 1)) return "not reflexive at tile " + std::to_string(a);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (!(leq[a][b / 64] >> (b % 64) & 1)) continue;
      for (int w = 0; w < words; ++w) {
        uint64_t missing = leq[b][w] & ~leq[a][w];
        if (missing) {
          int c = w * 64 + __builtin_ctzll(missing);
          return "transitivity fails: " + std::to_string(a) + " <= " + std::to_string(b) + " <= " +
                 std::to_string(c);
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace tfa

namespace tfa {

Decomposition decompose_band(const DegeneracyVector& v, int band, int jq_min, int jq_max,
                             const GridConstants& gc) {
  gc.validate();
  if (band <= 0) throw ConfigError("grid.band", "must be positive");
  WhitneyRequest req;
  req.jq_min = jq_min;
  req.jq_max = jq_max;
  req.rule = CenterRule::support_meets;
  req.plane_normal = v.v();
  for (int i = 0; i < v.n(); ++i) {
    // outward rounding to 2^-20
    double r = band / std::fabs(v.v(i));
    Dyadic hi = Dyadic::ratio(static_cast<long long>(std::ceil(std::ldexp(r, 20))), 20);
    req.bounds.push_back({-hi, hi});
  }
  std::vector<Cube> cubes = generate_whitney_cubes(req, gc);
  Decomposition d;
  d.v = v;
  try {
    d.sparse = sparsify(cubes, gc);
  } catch (const std::logic_error& e) {
    throw StructuralError(std::string("adjusted intervals: ") + e.what());
  }
  d.tiles = TileSet(std::move(cubes), v, gc);
  return d;
}

}  // namespace tfa

namespace tfa {

TileSet family_tiles(const std::vector<Cube>& cubes, const SparseFamily& family,
                     const DegeneracyVector& v, const GridConstants& gc) {
  std::vector<Cube> sel;
  std::vector<int> idx = family.cubes;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return cube_less(cubes[a], cubes[b]); });
  for (int c : idx) sel.push_back(cubes[c]);
  return TileSet(std::move(sel), v, gc);
}

}  // namespace tfa
