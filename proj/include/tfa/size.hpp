#ifndef TFA_SIZE_HPP
#define TFA_SIZE_HPP

#include <array>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tfa/signal.hpp"
#include "tfa/tiles.hpp"

namespace tfa {

/// Canonical dictionary profile psi(t) = (1 - t^2)^6 on [-1, 1] and its derivatives.
double dict_profile(double t, int k = 0);

/** \brief Scale making kappa (xi - xi0) psi((xi - c)/w) / L admissible.
 *
 * Smallest ratio allowed by the derivative budget up to order 4, sampled in t,
 * as a function of u0 = (xi0 - c) / w.  Independent of c, w and L.
 */
double dictionary_kappa(double u0);

struct DictWindow {
  double c = 0, w = 0;  // support [c - w, c + w]
};

/// First D windows inside 10 omega: the whole of it, its halves, five windows of width 2L.
std::vector<DictWindow> dictionary_windows(double center, double L, int D = 8);

/// Value of a dictionary member at xi.
double dictionary_member(const DictWindow& win, double xi0, double L, double xi);

/// 0: unsigned; +1 / -1: Riesz projection at xi applied first.
struct Cut {
  int sign = 0;
  double xi = 0;
};

/** \brief Seminorm evaluator for one signal.
 *
 * Intervals covering the whole period use Parseval over the nonzero bins;
 * shorter ones use weighted Gram entries cached per (interval, window, cut).
 */
class SizeContext {
public:
  SizeContext(const Signal& f, int D = 8);

  int D() const { return D_; }
  double l2() const { return l2_; }
  const Signal& signal() const { return f_; }

  /// max over the dictionary of ||chi~_I^10 T_m f||_2 for the band (center, L) at xi0.
  double seminorm(const DInterval& I, double center, double L, double xi0, Cut cut);

  size_t cache_size() const { return gram_.size(); }

private:
  double window_energy(const DInterval& I, const DictWindow& w, double xi0, Cut cut);
  int cut_bin(Cut cut) const;

  Signal f_;
  int D_;
  double l2_ = 0;
  std::vector<cplx> coef_;
  std::vector<int> nz_;  // signed frequencies with nonzero coefficient, ascending
  using Key = std::tuple<long long, long long, double, double, int, int>;
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };
  std::unordered_map<Key, std::array<double, 3>, KeyHash> gram_;  // G00, Re G10, G11
  std::map<std::pair<long long, long long>, std::vector<double>> weights_;
};

struct TreeSize {
  double lacunary = 0;
  double top = 0;
  double total() const { return lacunary + top; }
};

/// ||f||_{P_i, xi} for multi-tile t.
double seminorm_tile(SizeContext& ctx, const TileSet& ts, int t, int i, double xi, Cut cut = {});

/// Two-term i-size of a tree; sign selects the Riesz half first.
TreeSize tree_size(SizeContext& ctx, const TileSet& ts, const Tree& T, int i, int sign = 0);

struct TopCandidate {
  Dyadic s;
  DyadicSpan I;
};

/// Combinatorially distinct top data for the alive tiles: endpoints and midpoints
/// of the allowed s-intervals, per dyadic ancestor interval.  Candidates with an
/// empty maximal tree are dropped.
std::vector<TopCandidate> enumerate_tops(const TileSet& ts, const std::vector<char>& alive);

struct MaxSize {
  double value = 0;
  std::optional<Tree> tree;
  TreeSize parts;
};

MaxSize maximal_size(SizeContext& ctx, const TileSet& ts, const std::vector<char>& alive, int i,
                     int sign = 0);

struct SelectedTree {
  Tree tree;
  int i = 0;
  int sign = 0;
  int m = 0;
  int order = 0;
  double size = 0;
};

struct SelectionOutcome {
  std::vector<SelectedTree> trees;
  std::vector<int> remainder;
};

/// Greedy removal of maximal trees of signed size >= threshold, largest sign * (xi_T)_i first.
SelectionOutcome greedy_select(SizeContext& ctx, const TileSet& ts, std::vector<char>& alive, int i,
                               int sign, double threshold, int m = 0);

/// tau_m = 2^{(m-1)/2}; level(X) is the largest m with tau_m <= X.
double level_threshold(int m);
int level_of(double X);

struct BesselRow {
  int i = 0, sign = 0, m = 0;
  int trees = 0;
  double width = 0;  // sum |I_T|
  double stat = 0;   // 2^m width / ||f_i||^2
};

struct LevelPartition {
  std::vector<SelectedTree> trees;
  std::vector<int> residual;
  std::vector<BesselRow> rows;
  double bessel_max = 0;
};

struct SelectionConfig {
  int D = 8;
  double tol_zero = 1e-6;  // stop once every signed size* < tol_zero ||f_i||
};

/// Levels from the top down, greedy selection per (i, sign) at each level.
LevelPartition level_partition(std::vector<SizeContext>& ctx, const TileSet& ts,
                               const SelectionConfig& cfg = {});

}  // namespace tfa

#endif
