#ifndef TFA_WHITNEY_HPP
#define TFA_WHITNEY_HPP

#include <optional>
#include <string>
#include <vector>

#include "tfa/dyadic.hpp"
#include "tfa/geometry.hpp"

namespace tfa {

/** \brief Whitney cube in rescaled coordinates.
 *
 * Side 2^j with j = K * jq; center on the lattice 2^(j - lattice_shift) Z^n.
 */
struct Cube {
  int jq = 0;
  int j = 0;
  std::vector<Dyadic> center;
  std::vector<DInterval> adjusted;  // empty until build_adjusted_intervals

  int n() const { return static_cast<int>(center.size()); }
  Dyadic side() const { return Dyadic::pow2(j); }
  /// Q~_i = [c_i - s/2, c_i + s/2]
  DInterval interval(int i) const;
  /// 1000 Q~_i, the unadjusted interval.
  DInterval nominal(int i) const { return interval(i).dilate(1000); }
  /// Support of the partition piece, (1/2) Q~.
  DInterval support(int i) const;
  /// Convex hull of 10 * adjusted[i] over all i.
  DInterval hull10() const;

  friend bool operator==(const Cube& a, const Cube& b) {
    return a.j == b.j && a.center == b.center;
  }
};

/// Lexicographic order on (j, center).
bool cube_less(const Cube& a, const Cube& b);

/// Sup distance of a center to the diagonal: (max c - min c) / 2.
Dyadic distance_to_diagonal(const std::vector<Dyadic>& c);

/// Exact test of both Whitney conditions.
bool is_whitney(const std::vector<Dyadic>& center, int j, const GridConstants& gc);

enum class CenterRule { inside, support_meets };

struct WhitneyRequest {
  std::vector<DInterval> bounds;  // per coordinate, rescaled space
  int jq_min = 0;
  int jq_max = 0;
  CenterRule rule = CenterRule::inside;
  /// If non-empty, keep only cubes whose support meets {sum plane_normal_i x_i = 0}.
  std::vector<double> plane_normal;
};

std::vector<Cube> generate_whitney_cubes(const WhitneyRequest& req, const GridConstants& gc);

/// Number of lattice points in the request before any filtering (for reports).
double lattice_volume(const WhitneyRequest& req, const GridConstants& gc);

/// One-dimensional partition bump: even, supported in [-1,1], sum_k g(t-k) = 1.
double partition_bump(double t);

/// Partition piece of the cube evaluated at a rescaled point.
double cube_piece(const Cube& q, const std::vector<double>& x, const GridConstants& gc);

/// One factor of the piece: the i-th coordinate bump at rescaled coordinate x.
double cube_piece_factor(const Cube& q, int i, double x, const GridConstants& gc);

/// A point of support(q) on the plane {sum w_i x_i = 0}, if one exists.
std::optional<std::vector<double>> support_plane_point(const Cube& q,
                                                       const std::vector<double>& w);

struct SparseFamily {
  int id = 0;
  std::vector<int> cubes;  // indices into the cube list
};

struct SparsifyResult {
  std::vector<SparseFamily> families;
  int residue_modulus = 0;  // P, lattice units
  int overflow_families = 0;
};

/** \brief Partition cubes into sparse families and build adjusted intervals.
 *
 * Members are grouped by the residues of their lattice coordinates modulo P,
 * then each group is filled smallest scale first.  A cube whose adjusted
 * intervals cannot be built inside a family moves to the next overflow family
 * with the same residues.  \p cubes receives the adjusted intervals.
 */
SparsifyResult sparsify(std::vector<Cube>& cubes, const GridConstants& gc);

/// Residue modulus P used by sparsify.
int residue_modulus(const GridConstants& gc);

/** \brief Adjusted intervals for \p family, smallest scale first.
 *
 * Returns false (and leaves the failing cube without adjusted intervals) when
 * an endpoint cannot avoid the smaller hulls inside the 1% budget.
 */
bool build_adjusted_intervals(std::vector<Cube>& cubes, const SparseFamily& family,
                              std::string* failure = nullptr);

struct GeometryViolation {
  std::string kind;
  std::string detail;
};

struct GeometryReport {
  long long cubes = 0;
  long long families = 0;
  long long pair_checks = 0;
  long long lemma_hits = 0;  // pairs where 10 Qbar_i meets Qbar'_j
  long long enlarged_endpoints = 0;
  double max_enlargement = 0;  // relative to |1000 Q~_i|, per side
  std::vector<GeometryViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Exhaustive scan of Whitney, sparse, budget and dyadic-lemma predicates.
GeometryReport verify_geometry(const std::vector<Cube>& cubes,
                               const std::vector<SparseFamily>& families,
                               const GridConstants& gc, int max_violations = 20);

}  // namespace tfa

#endif
