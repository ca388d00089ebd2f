#include "tfa/size.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>
#include <unordered_map>

namespace tfa {

// ---- dictionary --------------------------------------------------------------

namespace {

// (1 - t^2)^6 = sum_r binom(6, r) (-1)^r t^{2r}
const std::array<double, 13>& profile_poly() {
  static const std::array<double, 13> p = [] {
    std::array<double, 13> a{};
    const double b[7] = {1, 6, 15, 20, 15, 6, 1};
    for (int r = 0; r <= 6; ++r) a[2 * r] = (r % 2 ? -1 : 1) * b[r];
    return a;
  }();
  return p;
}

double kappa_exact(double u0) {
  const int T = 2001;
  double best = 1e300;
  for (int s = 1; s < T; ++s) {
    double t = -1 + 2.0 * s / T;
    double d = t - u0;
    double ad = std::fabs(d);
    for (int k = 0; k <= 4; ++k) {
      if (k >= 2 && ad < 1e-12) continue;
      double lhs = d * dict_profile(t, k) + (k ? k * dict_profile(t, k - 1) : 0.0);
      if (std::fabs(lhs) < 1e-300) continue;
      double ratio = std::pow(ad, 1 - k) / std::fabs(lhs);
      if (k == 0) ratio = 1 / std::fabs(dict_profile(t, 0));
      best = std::min(best, ratio);
    }
  }
  return best;
}

}  // namespace

double dict_profile(double t, int k) {
  if (t <= -1 || t >= 1) return 0;
  const auto& p = profile_poly();
  double sum = 0;
  for (int e = 12; e >= k; --e) {
    double c = p[e];
    for (int r = 0; r < k; ++r) c *= (e - r);
    sum = sum * t + c;
  }
  // Horner above ran over e = 12..k, so sum is sum_e c_e t^{e-k}
  return sum;
}

double dictionary_kappa(double u0) {
  static std::mutex mu;
  static std::unordered_map<long long, double> memo;
  const double q = 256.0;
  long long lo = static_cast<long long>(std::floor(u0 * q));
  double out = 1e300;
  for (long long g : {lo, lo + 1}) {
    double v;
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = memo.find(g);
      if (it != memo.end()) {
        out = std::min(out, it->second);
        continue;
      }
    }
    v = kappa_exact(static_cast<double>(g) / q);
    {
      std::lock_guard<std::mutex> lock(mu);
      memo.emplace(g, v);
    }
    out = std::min(out, v);
  }
  return 0.97 * out;
}

std::vector<DictWindow> dictionary_windows(double center, double L, int D) {
  std::vector<DictWindow> all = {{center, 5 * L},
                                 {center - 2.5 * L, 2.5 * L},
                                 {center + 2.5 * L, 2.5 * L}};
  for (int d : {0, -2, 2, -4, 4}) all.push_back({center + d * L, L});
  D = std::clamp(D, 1, static_cast<int>(all.size()));
  all.resize(D);
  return all;
}

double dictionary_member(const DictWindow& win, double xi0, double L, double xi) {
  double u0 = (xi0 - win.c) / win.w;
  return dictionary_kappa(u0) * (xi - xi0) * dict_profile((xi - win.c) / win.w) / L;
}

// ---- seminorms -----------------------------------------------------------------

SizeContext::SizeContext(const Signal& f, int D) : f_(f), D_(D) {
  coef_ = forward(f_);
  l2_ = l2_norm(f_);
  double peak = 0;
  for (const auto& c : coef_) peak = std::max(peak, std::abs(c));
  const int N = f_.size();
  for (int k = -N / 2; k < N / 2; ++k)
    if (std::abs(coef_[frequency_bin(k, N)]) > 1e-13 * peak && peak > 0) nz_.push_back(k);
}

size_t SizeContext::KeyHash::operator()(const Key& k) const {
  size_t h = 0;
  auto mix = [&h](size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(std::hash<long long>{}(std::get<0>(k)));
  mix(std::hash<long long>{}(std::get<1>(k)));
  mix(std::hash<double>{}(std::get<2>(k)));
  mix(std::hash<double>{}(std::get<3>(k)));
  mix(std::hash<int>{}(std::get<4>(k)));
  mix(std::hash<int>{}(std::get<5>(k)));
  return h;
}

int SizeContext::cut_bin(Cut cut) const {
  if (cut.sign == 0) return 0;
  return static_cast<int>(std::ceil(cut.xi * f_.period - 1e-9));
}

double SizeContext::window_energy(const DInterval& I, const DictWindow& w, double xi0, Cut cut) {
  const int N = f_.size();
  const double P = f_.period;
  const int kc = cut_bin(cut);
  auto keep = [&](int k) { return cut.sign == 0 || (cut.sign > 0 ? k >= kc : k < kc); };
  double Ilen = (I.hi - I.lo).to_double();
  if (Ilen >= P) {
    // full period: plain moments of |psi c|^2, keyed by an empty interval
    Key key{0, -1, w.c, w.w, cut.sign, cut.sign ? kc : 0};
    auto it = gram_.find(key);
    if (it == gram_.end()) {
      std::array<double, 3> g{0, 0, 0};
      for (int k : nz_) {
        double x = k / P;
        if (x <= w.c - w.w || x >= w.c + w.w || !keep(k)) continue;
        double psi = dict_profile((x - w.c) / w.w);
        double e = psi * psi * std::norm(coef_[frequency_bin(k, N)]) * P;
        g[0] += e;
        g[1] += x * e;
        g[2] += x * x * e;
      }
      it = gram_.emplace(key, g).first;
    }
    const auto& g = it->second;
    return std::max(0.0, g[2] - 2 * xi0 * g[1] + xi0 * xi0 * g[0]);
  }
  Key key{static_cast<long long>(I.lo.raw()), static_cast<long long>(I.hi.raw()), w.c, w.w, cut.sign,
          cut.sign ? kc : 0};
  auto it = gram_.find(key);
  if (it == gram_.end()) {
    std::vector<cplx> a0(N, 0.0), a1(N, 0.0);
    bool any = false;
    for (int k : nz_) {
      double x = k / P;
      if (x <= w.c - w.w || x >= w.c + w.w || !keep(k)) continue;
      double psi = dict_profile((x - w.c) / w.w);
      a0[frequency_bin(k, N)] = psi * coef_[frequency_bin(k, N)];
      a1[frequency_bin(k, N)] = x * psi * coef_[frequency_bin(k, N)];
      any = true;
    }
    std::array<double, 3> g{0, 0, 0};
    if (any) {
      auto wkey = std::make_pair(static_cast<long long>(I.lo.raw()), static_cast<long long>(I.hi.raw()));
      auto wit = weights_.find(wkey);
      if (wit == weights_.end()) {
        Signal wp = weight_profile(I.lo.to_double(), I.hi.to_double(), 20, N, P, f_.origin);
        std::vector<double> wv(N);
        for (int n = 0; n < N; ++n) wv[n] = wp.x[n].real();
        wit = weights_.emplace(wkey, std::move(wv)).first;
      }
      Signal g0 = inverse(a0, P, f_.origin), g1 = inverse(a1, P, f_.origin);
      const double dx = f_.dx();
      for (int n = 0; n < N; ++n) {
        double W = wit->second[n] * dx;
        g[0] += W * std::norm(g0.x[n]);
        g[1] += W * (g1.x[n] * std::conj(g0.x[n])).real();
        g[2] += W * std::norm(g1.x[n]);
      }
    }
    it = gram_.emplace(key, g).first;
  }
  const auto& g = it->second;
  return std::max(0.0, g[2] - 2 * xi0 * g[1] + xi0 * xi0 * g[0]);
}

double SizeContext::seminorm(const DInterval& I, double center, double L, double xi0, Cut cut) {
  double best = 0;
  for (const auto& w : dictionary_windows(center, L, D_)) {
    double e = window_energy(I, w, xi0, cut);
    if (e <= 0) continue;
    best = std::max(best, dictionary_kappa((xi0 - w.c) / w.w) / L * std::sqrt(e));
  }
  return best;
}

double seminorm_tile(SizeContext& ctx, const TileSet& ts, int t, int i, double xi, Cut cut) {
  return ctx.seminorm(ts.I(t), ts.omega_center(t, i), ts.omega_length(t, i), xi, cut);
}

TreeSize tree_size(SizeContext& ctx, const TileSet& ts, const Tree& T, int i, int sign) {
  TreeSize out;
  if (T.tiles.empty()) return out;
  const double xi = T.s.to_double() * ts.v().v(i);
  const Cut cut{sign, xi};
  const DInterval IT = T.top.interval(ts.gc().K);
  const double len = IT.length().to_double();
  double sum = 0;
  for (int t : T.tiles) {
    double v = seminorm_tile(ctx, ts, t, i, xi, cut);
    sum += v * v;
  }
  out.lacunary = std::sqrt(sum / len);
  double LT = std::fabs(ts.v().v(i)) / len;
  out.top = ctx.seminorm(IT, xi, LT, xi, cut) / std::sqrt(len);
  return out;
}

// ---- candidates and selection ----------------------------------------------------

std::vector<TopCandidate> enumerate_tops(const TileSet& ts, const std::vector<char>& alive) {
  const int K = ts.gc().K;
  std::map<DyadicSpan, std::vector<Dyadic>> ends;
  std::set<DyadicSpan> spans;
  for (int t = 0; t < ts.size(); ++t) {
    if (!alive[t]) continue;
    DyadicSpan I = ts[t].span;
    for (int up = 0; up <= I.jq; ++up) spans.insert({I.jq - up, I.a >> (K * up)});
  }
  for (const auto& I : spans) {
    DInterval box = I.interval(K);
    Dyadic r = Dyadic::pow2(K * I.jq) * 500;
    auto& e = ends[I];
    for (int t = 0; t < ts.size(); ++t) {
      if (!alive[t] || !box.contains_open(ts.I(t))) continue;
      for (const auto& adj : ts.cube_of(t).adjusted) {
        Dyadic lo = adj.lo + r, hi = adj.hi - r;
        if (hi < lo) continue;
        e.push_back(lo);
        e.push_back(hi);
      }
    }
  }
  std::vector<TopCandidate> out;
  for (auto& [I, e] : ends) {
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    for (size_t k = 0; k < e.size(); ++k) {
      out.push_back({e[k], I});
      if (k + 1 < e.size()) out.push_back({(e[k] + e[k + 1]).half(), I});
    }
  }
  // drop tops with an empty maximal tree
  std::vector<TopCandidate> kept;
  for (const auto& c : out) {
    for (int t = 0; t < ts.size(); ++t)
      if (alive[t] && admits(ts, t, c.s, c.I)) {
        kept.push_back(c);
        break;
      }
  }
  return kept;
}

MaxSize maximal_size(SizeContext& ctx, const TileSet& ts, const std::vector<char>& alive, int i,
                     int sign) {
  MaxSize best;
  for (const auto& c : enumerate_tops(ts, alive)) {
    Tree T{maximal_tree(ts, alive, c.s, c.I), c.s, c.I};
    if (T.tiles.empty()) continue;
    TreeSize sz = tree_size(ctx, ts, T, i, sign);
    if (!best.tree || sz.total() > best.value) {
      best.value = sz.total();
      best.tree = T;
      best.parts = sz;
    }
  }
  return best;
}

namespace {

// true when a should be selected before b
bool earlier(const Tree& a, const Tree& b, double va, double vb) {
  if (va != vb) return va > vb;
  if (a.top.jq != b.top.jq) return a.top.jq < b.top.jq;
  if (a.top.a != b.top.a) return a.top.a < b.top.a;
  return a.s < b.s;
}

}  // namespace

SelectionOutcome greedy_select(SizeContext& ctx, const TileSet& ts, std::vector<char>& alive, int i,
                               int sign, double threshold, int m) {
  SelectionOutcome out;
  const double vi = ts.v().v(i);
  const double dir = sign < 0 ? -1.0 : 1.0;
  for (;;) {
    std::optional<Tree> pick;
    double pick_key = 0, pick_size = 0;
    for (const auto& c : enumerate_tops(ts, alive)) {
      Tree T{maximal_tree(ts, alive, c.s, c.I), c.s, c.I};
      if (T.tiles.empty()) continue;
      double sz = tree_size(ctx, ts, T, i, sign).total();
      if (sz < threshold) continue;
      double key = dir * c.s.to_double() * vi;
      if (!pick || earlier(T, *pick, key, pick_key)) {
        pick = T;
        pick_key = key;
        pick_size = sz;
      }
    }
    if (!pick) break;
    for (int t : pick->tiles) alive[t] = 0;
    out.trees.push_back({*pick, i, sign, m, static_cast<int>(out.trees.size()), pick_size});
  }
  for (int t = 0; t < ts.size(); ++t)
    if (alive[t]) out.remainder.push_back(t);
  return out;
}

double level_threshold(int m) { return std::exp2((m - 1) / 2.0); }

int level_of(double X) {
  int m = static_cast<int>(std::floor(2 * std::log2(X))) + 1;
  while (level_threshold(m + 1) <= X) ++m;
  while (level_threshold(m) > X) --m;
  return m;
}

LevelPartition level_partition(std::vector<SizeContext>& ctx, const TileSet& ts,
                               const SelectionConfig& cfg) {
  const int n = ts.n();
  if (static_cast<int>(ctx.size()) != n) throw std::invalid_argument("one size context per index");
  LevelPartition out;
  std::vector<char> alive(ts.size(), 1);
  const int signs[2] = {+1, -1};
  std::vector<double> best(2 * n, 0.0);
  auto refresh = [&] {
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < 2; ++s) best[2 * i + s] = maximal_size(ctx[i], ts, alive, i, signs[s]).value;
  };
  refresh();
  int order = 0;
  for (;;) {
    int mstar = 0;
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < 2; ++s) {
        double X = best[2 * i + s];
        if (ctx[i].l2() == 0 || X < cfg.tol_zero * ctx[i].l2()) continue;
        int m = level_of(X);
        if (!any || m > mstar) mstar = m;
        any = true;
      }
    if (!any) break;
    double tau = level_threshold(mstar);
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < 2; ++s) {
        if (ctx[i].l2() == 0 || best[2 * i + s] < tau || best[2 * i + s] < cfg.tol_zero * ctx[i].l2())
          continue;
        auto sel = greedy_select(ctx[i], ts, alive, i, signs[s], tau, mstar);
        if (sel.trees.empty()) continue;
        for (auto& t : sel.trees) {
          t.order = order++;
          out.trees.push_back(std::move(t));
        }
        refresh();
      }
  }
  for (int t = 0; t < ts.size(); ++t)
    if (alive[t]) out.residual.push_back(t);

  std::map<std::tuple<int, int, int>, BesselRow> rows;
  for (const auto& t : out.trees) {
    auto& r = rows[{t.i, t.sign, t.m}];
    r.i = t.i;
    r.sign = t.sign;
    r.m = t.m;
    ++r.trees;
    r.width += t.tree.top.interval(ts.gc().K).length().to_double();
  }
  for (auto& [k, r] : rows) {
    double l2 = ctx[r.i].l2();
    r.stat = std::exp2(r.m) * r.width / (l2 * l2);
    out.bessel_max = std::max(out.bessel_max, r.stat);
    out.rows.push_back(r);
  }
  return out;
}

}  // namespace tfa
