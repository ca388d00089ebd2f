#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tfa/whitney.hpp"

namespace tfa {

namespace {

long long lattice_coord(Dyadic c, int j, const GridConstants& gc) {
  // c is an exact multiple of 2^(j - shift)
  Dyadic q = c.mul_pow2(gc.lattice_shift - j);
  return static_cast<long long>(q.raw() >> Dyadic::kFrac);
}

int ceil_log2(long long x) {
  int e = 0;
  while ((1LL << e) < x) ++e;
  return e;
}

// Admissible endpoint search.  Moves the nominal endpoint outward by at most
// `budget`, avoiding every closed interval in `blocks`.
std::optional<Dyadic> place_endpoint(Dyadic nominal, Dyadic budget, bool left,
                                     const std::vector<DInterval>& blocks, Dyadic step) {
  DInterval window = left ? DInterval{nominal - budget, nominal} : DInterval{nominal, nominal + budget};
  std::vector<DInterval> hit;
  for (const auto& b : blocks)
    if (b.intersects(window)) hit.push_back(b);
  if (hit.empty()) return nominal;
  std::sort(hit.begin(), hit.end(), [](const DInterval& a, const DInterval& b) { return a.lo < b.lo; });
  std::vector<DInterval> merged;
  for (const auto& b : hit) {
    if (!merged.empty() && b.lo <= merged.back().hi)
      merged.back().hi = dmax(merged.back().hi, b.hi);
    else
      merged.push_back(b);
  }
  auto covered = [&](Dyadic x) {
    for (const auto& m : merged)
      if (m.contains(x)) return true;
    return false;
  };
  if (!covered(nominal)) return nominal;
  if (left) {
    // walk leftwards from the component covering the nominal point
    int k = static_cast<int>(merged.size()) - 1;
    while (k >= 0 && !merged[k].contains(nominal)) --k;
    Dyadic edge = merged[k].lo;  // admissible points lie strictly left of edge
    if (edge <= window.lo) return std::nullopt;
    bool open_left = k > 0 && merged[k - 1].hi >= window.lo;
    Dyadic floor = open_left ? merged[k - 1].hi : window.lo;
    Dyadic gap = edge - floor;
    Dyadic d = open_left ? dmin(gap.half(), step) : dmin(gap, step);
    if (d <= Dyadic()) return std::nullopt;
    return edge - d;
  }
  size_t k = 0;
  while (k < merged.size() && !merged[k].contains(nominal)) ++k;
  Dyadic edge = merged[k].hi;
  if (edge >= window.hi) return std::nullopt;
  bool open_right = k + 1 < merged.size() && merged[k + 1].lo <= window.hi;
  Dyadic ceil = open_right ? merged[k + 1].lo : window.hi;
  Dyadic gap = ceil - edge;
  Dyadic d = open_right ? dmin(gap.half(), step) : dmin(gap, step);
  if (d <= Dyadic()) return std::nullopt;
  return edge + d;
}

// Adjusted intervals of `q` against the hulls of strictly smaller members.
bool adjust_one(Cube& q, const std::vector<DInterval>& smaller_hulls, std::string* failure) {
  const Dyadic s = q.side();
  const Dyadic budget = s * 10;  // 1% of |1000 Q~_i| per side
  const Dyadic step = Dyadic::pow2(q.j - 6);
  std::vector<DInterval> adj(q.n());
  for (int i = 0; i < q.n(); ++i) {
    DInterval nom = q.nominal(i);
    std::optional<Dyadic> lo, hi;
    try {
      lo = place_endpoint(nom.lo, budget, true, smaller_hulls, step);
      hi = place_endpoint(nom.hi, budget, false, smaller_hulls, step);
    } catch (const std::domain_error&) {
      lo.reset();
    }
    if (!lo || !hi) {
      if (failure) {
        std::ostringstream os;
        os << "no admissible endpoint for cube j=" << q.j << " coordinate " << i
           << " nominal " << nom.str();
        *failure = os.str();
      }
      return false;
    }
    adj[i] = {*lo, *hi};
  }
  q.adjusted = std::move(adj);
  return true;
}

}  // namespace

int residue_modulus(const GridConstants& gc) {
  // same-scale members sit >= P sides apart in every coordinate; past
  // 1020 + 8 C0 sides their adjusted intervals are disjoint in all coordinate pairs
  int e = std::max({gc.K + 1, ceil_log2(8LL * gc.C0) + 1, ceil_log2(1021LL + 8LL * gc.C0)});
  return 1 << (e + gc.lattice_shift);
}

bool build_adjusted_intervals(std::vector<Cube>& cubes, const SparseFamily& family,
                              std::string* failure) {
  std::vector<int> order = family.cubes;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cube_less(cubes[a], cubes[b]); });
  std::vector<DInterval> hulls;
  size_t k = 0;
  while (k < order.size()) {
    size_t e = k;
    while (e < order.size() && cubes[order[e]].j == cubes[order[k]].j) ++e;
    for (size_t t = k; t < e; ++t)
      if (!adjust_one(cubes[order[t]], hulls, failure)) return false;
    for (size_t t = k; t < e; ++t) hulls.push_back(cubes[order[t]].hull10());
    k = e;
  }
  return true;
}

SparsifyResult sparsify(std::vector<Cube>& cubes, const GridConstants& gc) {
  gc.validate();
  SparsifyResult res;
  res.residue_modulus = residue_modulus(gc);
  const long long P = res.residue_modulus;
  std::vector<int> order(cubes.size());
  for (size_t i = 0; i < cubes.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cube_less(cubes[a], cubes[b]); });

  std::map<std::vector<long long>, std::vector<int>> groups;
  for (int idx : order) {
    const Cube& q = cubes[idx];
    std::vector<long long> key(q.n());
    for (int i = 0; i < q.n(); ++i) key[i] = ((lattice_coord(q.center[i], q.j, gc) % P) + P) % P;
    groups[key].push_back(idx);
  }

  struct Slot {
    std::vector<int> members;
    std::vector<DInterval> hulls;  // hulls of members at scales below `top_j`
    std::vector<DInterval> pending;
    int top_j = -1000000;
  };
  for (auto& [key, members] : groups) {
    std::vector<Slot> slots;
    for (int idx : members) {
      Cube& q = cubes[idx];
      bool placed = false;
      for (auto& sl : slots) {
        if (sl.top_j < q.j) {
          sl.hulls.insert(sl.hulls.end(), sl.pending.begin(), sl.pending.end());
          sl.pending.clear();
          sl.top_j = q.j;
        }
        if (adjust_one(q, sl.hulls, nullptr)) {
          sl.members.push_back(idx);
          sl.pending.push_back(q.hull10());
          placed = true;
          break;
        }
      }
      if (!placed) {
        Slot sl;
        sl.top_j = q.j;
        if (!adjust_one(q, {}, nullptr)) throw std::logic_error("unadjustable isolated cube");
        sl.members.push_back(idx);
        sl.pending.push_back(q.hull10());
        slots.push_back(std::move(sl));
      }
    }
    if (slots.size() > 1) res.overflow_families += static_cast<int>(slots.size()) - 1;
    for (auto& sl : slots) {
      SparseFamily f;
      f.id = static_cast<int>(res.families.size());
      f.cubes = std::move(sl.members);
      res.families.push_back(std::move(f));
    }
  }
  return res;
}

GeometryReport verify_geometry(const std::vector<Cube>& cubes,
                               const std::vector<SparseFamily>& families,
                               const GridConstants& gc, int max_violations) {
  GeometryReport rep;
  rep.cubes = static_cast<long long>(cubes.size());
  rep.families = static_cast<long long>(families.size());
  auto fail = [&](const std::string& kind, const std::string& detail) {
    if (static_cast<int>(rep.violations.size()) < max_violations) rep.violations.push_back({kind, detail});
    else if (static_cast<int>(rep.violations.size()) == max_violations)
      rep.violations.push_back({"truncated", "further violations omitted"});
  };
  auto describe = [](const Cube& q) {
    std::ostringstream os;
    os << "j=" << q.j << " c=(";
    for (int i = 0; i < q.n(); ++i) os << (i ? "," : "") << q.center[i].str();
    os << ")";
    return os.str();
  };

  for (const auto& q : cubes)
    if (!is_whitney(q.center, q.j, gc)) fail("whitney", describe(q));

  std::vector<int> seen(cubes.size(), 0);
  for (const auto& f : families)
    for (int idx : f.cubes) ++seen[idx];
  for (size_t i = 0; i < cubes.size(); ++i)
    if (seen[i] != 1) fail("partition", describe(cubes[i]) + " appears " + std::to_string(seen[i]) + " times");

  const Dyadic gapK = Dyadic::pow2(gc.K);
  for (const auto& f : families) {
    int jmin = 1 << 30;
    for (int idx : f.cubes) jmin = std::min(jmin, cubes[idx].j);
    // budget and smallest-scale exactness
    for (int idx : f.cubes) {
      const Cube& q = cubes[idx];
      if (static_cast<int>(q.adjusted.size()) != q.n()) {
        fail("adjusted", describe(q) + " has no adjusted intervals");
        continue;
      }
      for (int i = 0; i < q.n(); ++i) {
        DInterval nom = q.nominal(i), adj = q.adjusted[i];
        if (!adj.contains(nom)) fail("budget", describe(q) + " adjusted misses 1000Q");
        Dyadic budget = q.side() * 10;
        Dyadic dl = nom.lo - adj.lo, dr = adj.hi - nom.hi;
        if (dl > budget || dr > budget) fail("budget", describe(q) + " enlarged beyond 1%");
        if (q.j == jmin && !(adj == nom)) fail("budget", describe(q) + " smallest scale not exact");
        for (Dyadic d : {dl, dr}) {
          if (d > Dyadic()) {
            ++rep.enlarged_endpoints;
            rep.max_enlargement =
                std::max(rep.max_enlargement, d.to_double() / nom.length().to_double());
          }
        }
      }
    }
    for (size_t a = 0; a < f.cubes.size(); ++a) {
      for (size_t b = a + 1; b < f.cubes.size(); ++b) {
        const Cube& p = cubes[f.cubes[a]];
        const Cube& q = cubes[f.cubes[b]];
        ++rep.pair_checks;
        if (p.j != q.j) {
          int lo = std::min(p.j, q.j), hi = std::max(p.j, q.j);
          if (hi - lo < gc.K) fail("sparse-scale", describe(p) + " vs " + describe(q));
        } else {
          bool all_equal = true;
          for (int i = 0; i < p.n(); ++i) {
            DInterval x = p.interval(i), y = q.interval(i);
            if (x == y) continue;
            all_equal = false;
            Dyadic gap = x.hi < y.lo ? y.lo - x.hi : x.lo - y.hi;
            if (gap < dmul(gapK, p.side())) fail("sparse-single-scale", describe(p) + " vs " + describe(q));
          }
          for (int i = 0; i < p.n(); ++i)
            if (p.interval(i) == q.interval(i) && !(p == q))
              fail("sparse-injectivity", describe(p) + " vs " + describe(q));
          (void)all_equal;
        }
        if (p.j == q.j || p.adjusted.empty() || q.adjusted.empty()) continue;
        const Cube& small = p.j < q.j ? p : q;
        const Cube& large = p.j < q.j ? q : p;
        for (int i = 0; i < small.n(); ++i) {
          DInterval s10 = small.adjusted[i].dilate(10);
          for (int jj = 0; jj < large.n(); ++jj) {
            if (!s10.intersects(large.adjusted[jj])) continue;
            ++rep.lemma_hits;
            for (int i2 = 0; i2 < small.n(); ++i2)
              if (!large.adjusted[jj].contains(small.adjusted[i2].dilate(10)))
                fail("dyadic-lemma", describe(small) + " in " + describe(large));
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace tfa
