#ifndef TFA_TILES_HPP
#define TFA_TILES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfa/dyadic.hpp"
#include "tfa/geometry.hpp"
#include "tfa/whitney.hpp"

namespace tfa {

/** \brief i-tile in rescaled frequency coordinates.
 *
 * omega and omega_bar are Q~_i and the adjusted interval; the physical
 * frequency interval is v_i * omega.
 */
struct Tile {
  int i = 0;
  DInterval I;          // spatial, half-open
  DInterval omega;      // Q~_i
  DInterval omega_bar;  // adjusted
};

/// I_P inside I_P2 and omega_bar_P containing omega_bar_P2.  Throws on index mismatch.
bool tile_leq(const Tile& P, const Tile& P2);

/// K-dyadic spatial interval [a, a+1) 2^{-K jq}.
struct DyadicSpan {
  int jq = 0;
  long long a = 0;
  DInterval interval(int K) const;
  friend auto operator<=>(const DyadicSpan&, const DyadicSpan&) = default;
};

/// Multi-tile: a cube Q of the sparse set and the interval I with |I| |Q_n| = 1.
struct MultiTile {
  int cube = 0;
  DyadicSpan span;
};

/** \brief Multi-tiles over the spatial window [0, 1). */
class TileSet {
public:
  TileSet() = default;
  TileSet(std::vector<Cube> cubes, DegeneracyVector v, GridConstants gc);

  int n() const { return v_.n(); }
  int size() const { return static_cast<int>(tiles_.size()); }
  const GridConstants& gc() const { return gc_; }
  const DegeneracyVector& v() const { return v_; }
  const std::vector<Cube>& cubes() const { return cubes_; }
  const std::vector<MultiTile>& tiles() const { return tiles_; }
  const MultiTile& operator[](int t) const { return tiles_[t]; }
  const Cube& cube_of(int t) const { return cubes_[tiles_[t].cube]; }

  DInterval I(int t) const { return tiles_[t].span.interval(gc_.K); }
  double I_length(int t) const;
  Tile tile(int t, int i) const;
  /// Physical center and length of omega_{P_i}.
  double omega_center(int t, int i) const;
  double omega_length(int t, int i) const;

  /// Restrict to the listed tiles (cubes kept).
  TileSet subset(const std::vector<int>& keep) const;

private:
  GridConstants gc_;
  DegeneracyVector v_;
  std::vector<Cube> cubes_;
  std::vector<MultiTile> tiles_;
};

/// Some component satisfies tile_leq.
bool multitile_leq(const TileSet& ts, int a, int b);

/// Tree with top data (xi = s v, I_top).
struct Tree {
  std::vector<int> tiles;  // indices into the tile set, sorted
  Dyadic s;
  DyadicSpan top;
};

/// [s - 500/|I|, s + 500/|I|], the rescaled top window.
DInterval top_window(Dyadic s, const DyadicSpan& I, int K);

/// Geometry of tile t qualifies it for a tree with top data (s, I).
bool admits(const TileSet& ts, int t, Dyadic s, const DyadicSpan& I);

/// All tiles with alive[t] that qualify for the top data.
std::vector<int> maximal_tree(const TileSet& ts, const std::vector<char>& alive, Dyadic s,
                              const DyadicSpan& I);

/// Throws StructuralError naming the failed tree invariant.
void validate_tree(const TileSet& ts, const Tree& T);

/// (xi_T)_i outside 2 omega_{P_i}.
bool is_lacunary(const TileSet& ts, int t, int i, Dyadic s);

/// Classes keyed by the bit mask of lacunary indices.  Throws StructuralError if
/// some tile has no lacunary index.
std::map<unsigned, Tree> split_by_lacunarity(const TileSet& ts, const Tree& T);

struct TreeAnatomy {
  int K = 4;
  DyadicSpan top;
  std::vector<int> tiles;
  std::map<int, std::vector<DInterval>> supports;  // cube -> components of E_{Q,T}
  std::map<int, int> box_of_j;                     // jq -> cube (Q^j)
  std::vector<DyadicSpan> partition;               // bold I_T, left to right
  std::map<int, std::vector<DInterval>> hulls;     // jq -> components of E~_j (nonempty only)
  std::vector<DInterval> tile_intervals;           // I_P of the listed tiles

  /// Components of E~_j; empty when absent.
  std::vector<DInterval> hull(int j) const;
  /// A tile with |I_P| <= |I0| and I_P in 10 I0, when 3 I0 meets E~_{j0}.
  std::optional<int> get_tile(const DyadicSpan& I0) const;
};

TreeAnatomy compute_anatomy(const TileSet& ts, const Tree& T);

struct SideInterval {
  int j = 0;
  bool left = true;
  double lo = 0, hi = 0;  // open interval
};

/// Side intervals of the hull components with the shift m (m = m_i in projections).
std::vector<SideInterval> side_intervals(const TreeAnatomy& A, double m = 0);

struct BoundaryStats {
  double sumE = 0;     // sum_j 2^{-Kj} #boundary E_{Q^j,T}
  double sumHull = 0;  // sum_j 2^{-Kj} #boundary E~_j
  double I_top = 0;
  bool side_disjoint = true;
  bool min_gap_ok = true;
  bool nesting = true;  // j_Q < j_Q' => E_Q contains E_Q'
  std::string witness;
};

/// Exact (m = 0) boundary counts and side-interval checks.
BoundaryStats boundary_statistics(const TreeAnatomy& A);

/// Diagnostic weight mu_j sampled on N points of [0, 1).
std::vector<double> mu_profile(const TreeAnatomy& A, int j, int N);

struct SeparationReport {
  long long hits = 0;  // hypothesis hits
  long long violations = 0;
  std::string witness;
};

/** \brief Separation predicates on one greedy run.
 *
 * \p trees are in selection order for coordinate i and sign (+1 or -1);
 * shifts s = 0..s_max are scanned.
 */
SeparationReport separation_pair(const TileSet& ts, const std::vector<Tree>& trees, int i, int sign,
                                 int s_max = 24);
SeparationReport separation_triple(const TileSet& ts, const std::vector<Tree>& trees, int i,
                                   int sign, int s_max = 24);

struct Decomposition {
  DegeneracyVector v;
  SparsifyResult sparse;
  TileSet tiles;
};

/** \brief Whitney cubes, sparse families and multi-tiles for the band |xi_i| <= band.
 *
 * Cubes at jq in [jq_min, jq_max] whose support meets the rescaled band and
 * the plane sum v_i x_i = 0.
 */
Decomposition decompose_band(const DegeneracyVector& v, int band, int jq_min, int jq_max,
                             const GridConstants& gc);

/// Multi-tiles over the cubes of one sparse family.
TileSet family_tiles(const std::vector<Cube>& cubes, const SparseFamily& family,
                     const DegeneracyVector& v, const GridConstants& gc);

/// Exhaustive preorder and transitivity scan; returns the first witness if any.
std::optional<std::string> order_violation(const TileSet& ts);

}  // namespace tfa

#endif
