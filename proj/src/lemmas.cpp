#include "tfa/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tfa/signal.hpp"

namespace tfa {

namespace {

// random band-limited signal with unit L2 norm; positive if requested
Signal random_band(std::mt19937_64& rng, int N, int band, bool positive) {
  std::normal_distribution<double> G;
  std::vector<cplx> c(N, cplx(0, 0));
  for (int k = -band; k <= band; ++k) c[frequency_bin(k, N)] = cplx(G(rng), G(rng));
  Signal f = inverse(c);
  if (positive)
    for (auto& z : f.x) z = std::abs(z);
  double n = l2_norm(f);
  for (auto& z : f.x) z /= n;
  return f;
}

struct Packing {
  std::vector<std::pair<double, double>> intervals;
};

// disjoint dyadic intervals of length 2^{-a}, a in [2, 7], greedy random placement
Packing random_packing(std::mt19937_64& rng, int max_count, int min_level = 2) {
  std::uniform_int_distribution<int> level(min_level, 7);
  Packing p;
  std::vector<char> used(128, 0);  // occupancy at resolution 1/128
  for (int t = 0; t < 4 * max_count && static_cast<int>(p.intervals.size()) < max_count; ++t) {
    int a = level(rng);
    int cells = 128 >> a;
    std::uniform_int_distribution<int> pos(0, (1 << a) - 1);
    int s = pos(rng) * cells;
    bool free = std::all_of(used.begin() + s, used.begin() + s + cells, [](char c) { return !c; });
    if (!free) continue;
    std::fill(used.begin() + s, used.begin() + s + cells, 1);
    p.intervals.push_back({s / 128.0, (s + cells) / 128.0});
  }
  return p;
}

}  // namespace

WeightLemmaReport validate_weight_lemmas(const WeightLemmaConfig& cfg) {
  check_grid(cfg.N);
  std::mt19937_64 rng(cfg.seed);
  WeightLemmaReport rep;
  const int N = cfg.N;
  for (int pk = 0; pk < cfg.packings; ++pk) {
    Packing P = random_packing(rng, 12);
    std::vector<Signal> w;
    double total = 0;
    for (auto [a, b] : P.intervals) {
      w.push_back(weight_profile(a, b, 1.0, N));
      total += b - a;
    }
    for (int t = 0; t < cfg.trials; ++t) {
      Signal sum = make_signal(N);
      for (size_t k = 0; k < P.intervals.size(); ++k) {
        double len = P.intervals[k].second - P.intervals[k].first;
        Signal f = random_band(rng, N, cfg.band, true);
        sum = sum + cplx(std::sqrt(len), 0) * (w[k] * f);
      }
      rep.almost = std::max(rep.almost, l2_norm(sum) / std::sqrt(total));
      // I' at least as long as every member
      double longest = 0;
      for (auto [a, b] : P.intervals) longest = std::max(longest, b - a);
      std::uniform_real_distribution<double> U(0, 1 - longest);
      double a0 = U(rng);
      Signal wp = weight_profile(a0, a0 + longest, 1.0, N);
      rep.almost_useful = std::max(rep.almost_useful, l2_norm(wp * sum) / std::sqrt(longest));
      ++rep.cases;
    }
  }
  // Bernstein and locality at spatial scales 2^{-Kj} resolvable on the grid
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < cfg.packings * cfg.trials / 4; ++t) {
    const double j = std::min(1.0, std::floor(std::log2(N / 16.0) / cfg.K));
    const double width = std::exp2(cfg.K * j);
    const double len = 1.0 / width;
    // f with spectrum in an interval of width 2^{Kj}
    std::normal_distribution<double> G;
    std::vector<cplx> c(N, cplx(0, 0));
    int lo = static_cast<int>(std::floor(U(rng) * 2 * cfg.band)) - cfg.band;
    for (int k = lo; k < lo + static_cast<int>(width); ++k) c[frequency_bin(k, N)] = cplx(G(rng), G(rng));
    Signal f = inverse(c);
    double a0 = U(rng);
    Signal wt = weight_profile(a0, a0 + len, 10.0, N);
    Signal wf = wt * f;
    rep.bernstein = std::max(rep.bernstein, lp_norm(wf, 0) / (std::sqrt(width) * l2_norm(wf)));
    Signal g = random_band(rng, N, std::min(N / 4, static_cast<int>(4 * width)), false);
    Signal Sg = littlewood_paley(g, j, cfg.K, LPKind::S);
    rep.local = std::max(rep.local, l2_norm(wt * Sg) / l2_norm(wt * g));
  }
  return rep;
}

}  // namespace tfa
