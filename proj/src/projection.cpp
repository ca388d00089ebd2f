#include "tfa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tfa/errors.hpp"
#include "tfa/factor.hpp"

namespace tfa {

namespace {

// open arc on the unit circle; len = 1 is the whole circle
struct CArc {
  double a = 0, len = 0;
};

bool in_arc(double x, const CArc& c) {
  double t = x - c.a;
  t -= std::floor(t);
  return t < c.len;
}

// components of a union of [0,1) intervals as circle arcs, joining across 0
std::vector<CArc> circle_components(const std::vector<DInterval>& comps) {
  std::vector<CArc> out;
  for (const auto& c : comps) out.push_back({c.lo.to_double(), (c.hi - c.lo).to_double()});
  if (out.size() >= 2 && out.front().a == 0.0 && std::fabs(out.back().a + out.back().len - 1.0) < 1e-15) {
    out.front().a = out.back().a;
    out.front().len += out.back().len;
    out.pop_back();
  }
  return out;
}

double bump(double t) { return std::fabs(t) >= 1 ? 0.0 : std::exp(-1.0 / (1 - t * t)); }

bool open_arcs_overlap(double lo1, double hi1, double lo2, double hi2) {
  // arcs (lo, hi) of length < 1/2 on the circle
  double d = lo2 - lo1;
  d -= std::floor(d);
  if (d < hi1 - lo1) return true;
  d = lo1 - lo2;
  d -= std::floor(d);
  return d < hi2 - lo2;
}

double l2(const Signal& f) { return l2_norm(f); }

double sup(const Signal& f) {
  double s = 0;
  for (auto z : f.x) s = std::max(s, std::abs(z));
  return s;
}

int lacunarity(const TileSet& ts, const Tree& T, int i) {
  int lac = 0;
  for (int t : T.tiles) lac += is_lacunary(ts, t, i, T.s) ? 1 : 0;
  if (lac == static_cast<int>(T.tiles.size())) return 1;
  if (lac == 0) return 0;
  return -1;
}

}  // namespace

Signal tile_projection(const Signal& f, const Cube& q, int i, double vi) {
  SpectralSymbol1D sym;
  sym.eval = [&q, i, vi](double xi) { return cplx(factor_cutoff(q, i, xi / vi), 0); };
  DInterval Q = q.interval(i);
  double a = vi * Q.lo.to_double(), b = vi * Q.hi.to_double();
  sym.lo = std::min(a, b);
  sym.hi = std::max(a, b);
  return apply_multiplier(sym, f);
}

Signal tree_cutoff(const TreeAnatomy& A, int jq, const EtaKernel& eta, int N) {
  auto it = A.box_of_j.find(jq);
  if (it == A.box_of_j.end()) throw std::invalid_argument("no box at this scale");
  std::vector<Arc> arcs;
  for (const auto& c : A.supports.at(it->second)) arcs.push_back({c.lo.to_double(), c.hi.to_double()});
  return smooth_indicator(arcs, jq, eta, N);
}

double ProjectionResult::max_fire2() const {
  double m = 0;
  for (const auto& b : blocks) m = std::max(m, b.fire2_residual);
  return m;
}

double ProjectionResult::max_moment() const {
  double m = 0;
  for (const auto& c : corrections) m = std::max(m, c.moment_residual);
  return m;
}

ProjectionResult project_lacunary(const Signal& f, const TileSet& ts, const Tree& T,
                                  const TreeAnatomy& A, int i, const EtaKernel& eta) {
  if (lacunarity(ts, T, i) != 1) throw std::invalid_argument("project_lacunary: index is not lacunary");
  const int N = f.size();
  const int K = ts.gc().K;
  const double vi = ts.v().v(i);
  ProjectionResult r;
  r.lacunary = true;
  r.i = i;
  r.xi = T.s.to_double() * vi;
  r.m = ts.v().m()[i];
  r.value = make_signal(N, f.period, f.origin);

  struct Block {
    int j;
    Signal g;
    double lo, hi;  // physical spectral support
  };
  std::vector<Block> blocks;
  for (const auto& [jq, cube] : A.box_of_j) {
    const Cube& q = ts.cubes()[cube];
    Signal g = tree_cutoff(A, jq, eta, N) * tile_projection(f, q, i, vi);
    DInterval Q = q.interval(i);
    double a = vi * Q.lo.to_double(), b = vi * Q.hi.to_double();
    double w = std::exp2(K * (jq - 2));
    blocks.push_back({jq, g, std::min(a, b) - w, std::max(a, b) + w});
    r.value = r.value + g;
  }
  auto coef = forward(r.value);
  const double fn = std::max(l2(f), 1e-300);
  for (const auto& b : blocks) {
    // S_{j+m_i}: exactly one on the support of block j
    std::vector<cplx> c(N, 0.0);
    for (int idx = 0; idx < N; ++idx) {
      double xi = bin_frequency(idx, N) / f.period;
      if (xi >= b.lo && xi <= b.hi) c[idx] = coef[idx];
    }
    Signal back = inverse(c, f.period, f.origin);
    ProjectionBlock pb;
    pb.j = b.j;
    double unit = std::exp2(K * (b.j + r.m));
    double d1 = std::fabs(b.lo - r.xi), d2 = std::fabs(b.hi - r.xi);
    bool straddle = b.lo <= r.xi && r.xi <= b.hi;
    pb.band_lo = straddle ? 0.0 : std::min(d1, d2) / unit;
    pb.band_hi = std::max(d1, d2) / unit;
    pb.fire2_residual = l2(back - b.g) / fn;
    r.blocks.push_back(pb);
  }
  return r;
}

ProjectionResult project_nonlacunary(const Signal& f, const TileSet& ts, const Tree& T,
                                     const TreeAnatomy& A, int i) {
  if (lacunarity(ts, T, i) != 0) throw std::invalid_argument("project_nonlacunary: index is lacunary");
  const int N = f.size();
  const int K = ts.gc().K;
  const double vi = ts.v().v(i);
  ProjectionResult r;
  r.lacunary = false;
  r.i = i;
  r.xi = T.s.to_double() * vi;
  r.m = ts.v().m()[i];
  r.raw = make_signal(N, f.period, f.origin);
  r.level.assign(N, -1);
  const int j0 = T.top.jq;

  // level function
  std::map<int, std::vector<CArc>> arcs;
  for (const auto& [j, comps] : A.hulls) arcs[j] = circle_components(comps);
  auto inside = [&](int j, double x) {
    auto it = arcs.find(j);
    if (it == arcs.end()) return false;
    for (const auto& c : it->second)
      if (in_arc(x, c)) return true;
    return false;
  };
  int jmax = j0;
  for (const auto& [j, c] : arcs) jmax = std::max(jmax, j);
  for (int n = 0; n < N; ++n) {
    double x = f.point(n);
    for (int j = j0; j <= jmax && inside(j, x); ++j) r.level[n] = j;
  }

  // telescoping series
  Signal low = littlewood_paley(f, j0 + r.m, K, LPKind::T, r.xi);
  for (int n = 0; n < N; ++n)
    if (r.level[n] >= j0) r.raw.x[n] += low.x[n];
  std::map<int, Signal> S;
  for (int j = j0 + 1; j <= jmax; ++j) {
    S.emplace(j, littlewood_paley(f, j + r.m, K, LPKind::S, r.xi));
    for (int n = 0; n < N; ++n)
      if (r.level[n] >= j) r.raw.x[n] += S.at(j).x[n];
  }
  // telescoping check against T_{j(x)+m} f
  {
    std::map<int, Signal> Tj;
    double worst = 0;
    for (int n = 0; n < N; ++n) {
      int j = r.level[n];
      if (j < j0) continue;
      auto it = Tj.find(j);
      if (it == Tj.end()) it = Tj.emplace(j, littlewood_paley(f, j + r.m, K, LPKind::T, r.xi)).first;
      worst = std::max(worst, std::abs(r.raw.x[n] - it->second.x[n]));
    }
    r.telescope_residual = worst / std::max(sup(f), 1e-300);
  }

  // Heaviside cut point: middle of the largest gap of E~_{j0+1}
  double z = 0.5;
  {
    auto it = arcs.find(j0 + 1);
    if (it != arcs.end() && !it->second.empty()) {
      std::vector<CArc> v = it->second;
      std::sort(v.begin(), v.end(), [](const CArc& a, const CArc& b) { return a.a < b.a; });
      double best = -1;
      for (size_t k = 0; k < v.size(); ++k) {
        double end = v[k].a + v[k].len;
        double next = k + 1 < v.size() ? v[k + 1].a : v[0].a + 1.0;
        double gap = next - end;
        if (gap > best) {
          best = gap;
          z = end + gap / 2;
        }
      }
      z -= std::floor(z);
    }
  }

  const double fn = std::max(l2(f), 1e-300);
  const double top_len = T.top.interval(K).length().to_double();
  const double dx = f.dx();
  r.value = r.raw;
  std::vector<Correction> placed;
  for (int j = j0 + 1; j <= jmax; ++j) {
    auto it = arcs.find(j);
    if (it == arcs.end()) continue;
    const Signal& Sj = S.at(j);
    const double h = std::exp2(-K * (j + r.m));
    for (const auto& comp : it->second) {
      if (comp.len >= 1.0) {
        ++r.whole_circle_components;
        continue;
      }
      for (int side = 0; side < 2; ++side) {
        Correction c;
        c.j = j;
        c.left = side == 0;
        c.endpoint = c.left ? comp.a : comp.a + comp.len;
        // H^l = chi of the arc [x^l, z), H^r = -chi of the arc [x^r, z)
        CArc H{c.endpoint, z - c.endpoint - std::floor(z - c.endpoint)};
        cplx mass = 0;
        for (int n = 0; n < N; ++n)
          if (in_arc(f.point(n), H)) mass += Sj.x[n];
        mass *= dx;
        if (!c.left) mass = -mass;
        c.c = mass / h;
        c.lo = c.left ? c.endpoint - h / 2 : c.endpoint + h / 4;
        c.hi = c.left ? c.endpoint - h / 4 : c.endpoint + h / 2;
        for (const auto& o : placed)
          if (o.left == c.left && open_arcs_overlap(o.lo, o.hi, c.lo, c.hi))
            throw StructuralError("projection: side intervals collide at j=" + std::to_string(j));
        // bump of exact grid mass h on the open side interval
        double mid = (c.lo + c.hi) / 2, half = (c.hi - c.lo) / 2;
        std::vector<std::pair<int, double>> phi;
        double sum = 0;
        for (int n = 0; n < N; ++n) {
          double t = f.point(n) - mid;
          t -= std::round(t);
          double b = bump(t / half);
          if (b > 0) {
            phi.emplace_back(n, b);
            sum += b * dx;
          }
        }
        if (phi.empty()) throw StructuralError("projection: side interval below grid resolution at j=" + std::to_string(j));
        for (auto& [n, b] : phi) {
          b *= h / sum;
          r.value.x[n] -= c.c * b;
        }
        double phimass = 0;
        for (const auto& [n, b] : phi) phimass += b * dx;
        c.moment_residual = std::abs(mass - c.c * phimass) / (fn * std::sqrt(top_len));
        placed.push_back(c);
      }
    }
  }
  r.corrections = std::move(placed);
  return r;
}

ProjectionResult project(const Signal& f, const TileSet& ts, const Tree& T, const TreeAnatomy& A,
                         int i, const EtaKernel& eta) {
  int lac = lacunarity(ts, T, i);
  if (lac < 0) throw std::invalid_argument("project: mixed lacunarity, split the tree first");
  return lac ? project_lacunary(f, ts, T, A, i, eta) : project_nonlacunary(f, ts, T, A, i);
}

ProjectionNormReport projection_norm_report(const ProjectionResult& r, const Signal& f,
                                            const TileSet& ts, const Tree& T, const TreeAnatomy& A,
                                            double size_star, double p, double theta,
                                            const EtaKernel& eta) {
  ProjectionNormReport rep;
  const int N = f.size();
  const int K = ts.gc().K;
  const int n = ts.n();
  rep.norm_p = lp_norm(r.value, p);
  rep.linf = sup(r.value);
  if (l2(f) == 0 || size_star <= 0) {
    rep.skipped = true;
    return rep;
  }
  const double top = T.top.interval(K).length().to_double();
  const double st = std::pow(size_star, theta);
  rep.fire1 = rep.norm_p / (std::pow(top, 1 / p) * st);
  const double vi = ts.v().v(r.i);
  Signal diff = f - r.value;
  for (const auto& [jq, cube] : A.box_of_j) {
    const Cube& q = ts.cubes()[cube];
    Signal chi = tree_cutoff(A, jq, eta, N);
    std::vector<double> w(N);
    for (int k = 0; k < N; ++k) w[k] = std::pow(std::max(chi.x[k].real(), 0.0), 1.0 / (2 * n));
    Signal loc = tile_projection(r.value, q, r.i, vi);
    Signal err = r.lacunary ? Signal() : tile_projection(diff, q, r.i, vi);
    std::vector<double> mu;
    if (!r.lacunary) mu = mu_profile(A, jq, N);
    const int pieces = 1 << std::min(K * jq, 30);
    const double len = 1.0 / pieces;
    for (int a = 0; a < pieces; ++a) {
      int n0 = static_cast<int>(std::ceil(a * len * N - 1e-9)), n1 = static_cast<int>(std::ceil((a + 1) * len * N - 1e-9));
      if (n1 <= n0) continue;
      double s1 = 0, s2 = 0;
      for (int k = n0; k < n1; ++k) {
        s1 += std::pow(w[k] * std::abs(loc.x[k]), p);
        if (!r.lacunary) s2 += std::pow(w[k] * std::abs(err.x[k]), p);
      }
      double normI = std::pow(s1 * f.dx(), 1 / p);
      rep.fire_loc = std::max(rep.fire_loc, normI / (std::pow(len, 1 / p) * st));
      if (!r.lacunary) {
        Signal wt = weight_profile(a * len, (a + 1) * len, 2, N);
        double budget = 0;
        for (int k = 0; k < N; ++k) budget += wt.x[k].real() * mu[k];
        budget *= f.dx();
        double rhs = st * std::pow(len, 1 / p - 1) * budget;
        double errI = std::pow(s2 * f.dx(), 1 / p);
        if (rhs > 0) rep.error1 = std::max(rep.error1, errI / rhs);
      }
    }
  }
  return rep;
}

}  // namespace tfa
