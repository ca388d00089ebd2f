#ifndef TFA_FORMS_HPP
#define TFA_FORMS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfa/signal.hpp"
#include "tfa/tiles.hpp"

namespace tfa {

/** \brief Whitney-synthetic multiplier sum_Q sigma_Q phi_Q.
 *
 * phi_Q is the partition piece of cube Q (a tensor product of bumps in the
 * rescaled coordinates xi_i / v_i) and sigma_Q is sgn(beta . xi) at a point
 * of supp phi_Q on the plane sum xi_i = 0.
 */
class WhitneySymbol {
public:
  WhitneySymbol(const TileSet& ts, std::vector<double> beta);

  const TileSet& tiles() const { return *ts_; }
  const std::vector<double>& beta() const { return beta_; }
  /// sigma of cube c of the tile set.
  double sigma(int c) const { return sigma_[c]; }
  /// Physical frequency point in input order.
  double operator()(const std::vector<double>& xi) const;

private:
  std::shared_ptr<const TileSet> ts_;
  std::vector<double> beta_;
  std::vector<double> sigma_;
  struct KeyHash {
    size_t operator()(const std::vector<long long>& k) const;
  };
  std::unordered_map<std::vector<long long>, int, KeyHash> index_;  // (jq, lattice center) -> cube
  std::vector<int> scales_;
};

/// sgn(x), with sgn(0) = 0.
double sgn0(double x);

struct MultiplierSpec {
  enum class Kind { constant, sgn_beta, whitney_synthetic, custom };
  Kind kind = Kind::constant;
  int arity = 3;
  cplx value = 1.0;
  std::vector<double> beta;
  std::shared_ptr<const WhitneySymbol> whitney;
  // custom: a table keyed by the integer bins (k_1, ..., k_n), or a function of the physical point
  std::map<std::vector<int>, cplx> table;
  std::function<cplx(const std::vector<double>&)> fn;

  static MultiplierSpec constant(cplx c, int n = 3);
  /// Throws std::invalid_argument unless the entries of beta are pairwise distinct.
  static MultiplierSpec sgn_beta(std::vector<double> beta);
  static MultiplierSpec whitney_synthetic(std::shared_ptr<const WhitneySymbol> w);
  static MultiplierSpec custom_table(std::map<std::vector<int>, cplx> table, int n);
  static MultiplierSpec custom(std::function<cplx(const std::vector<double>&)> fn, int n);

  /// m at the bins k (integers) of a grid with the given period.
  cplx at(const std::vector<int>& k, double period) const;
};

/** \brief Lambda = period * sum over k_1 + ... + k_n = 0 of m(k / period) prod c_i(k_i).
 *
 * c_i are the 1/N-normalised coefficients, so m = 1 gives the integral of the
 * product over one period.  Bins whose negated sum falls outside the grid are
 * not sampled.  Throws std::invalid_argument on arity or grid mismatch.
 */
cplx direct_form(const MultiplierSpec& m, const std::vector<Signal>& f);

struct QuadratureOptions {
  int nodes = 0;                // per eps level; 0 chooses from the bandwidth
  double nodes_per_cycle = 12;  // used when nodes = 0
  bool richardson = true;       // 2 I(eps/2) - I(eps)
};

/** \brief Truncated p.v. integral of prod f_i(x - beta_i t) K(t) over x and eps < |t| < tcut.
 *
 * K is the periodic Hilbert kernel (pi/P) cot(pi t / P), the periodisation of
 * 1/t, so for integer beta and tcut = P/2 this is the torus form.  Composite
 * midpoint rule in t with paired nodes +-t; shifts applied in frequency.
 * Throws std::invalid_argument unless 0 < eps < tcut <= P/2.
 */
cplx bht_quadrature(const std::vector<Signal>& f, const std::vector<double>& beta, double eps,
                    double tcut, const QuadratureOptions& opt = {});

/// p.v. integral of e^{-2 pi i t / P} K(t), computed with the same rule: the factor c in
/// the identity  p.v. K * f  <->  c sgn(xi).
cplx hilbert_constant(double eps, const QuadratureOptions& opt = {});

/// scale times the i-th piece factor of q as a multiplier in physical frequency xi = v_i x.
SpectralSymbol1D piece_symbol(const Cube& q, int i, double vi, const GridConstants& gc,
                              double scale = 1.0);

struct TileSumResult {
  cplx value = 0;      // sum over multi-tiles
  cplx regrouped = 0;  // sum over cubes of int prod pi_{Q_i} f_i
  std::vector<cplx> per_tile;
  int active_cubes = 0;  // cubes whose product is not identically zero
};

/** \brief Sum over multi-tiles of int chi_{I, jq} prod_i pi_{omega_{P_i}} f_i.
 *
 * pi_{omega_{P_i}} is the piece factor of the cube in coordinate i; sorted
 * coordinate i acts on the input slot v.perm()[i].  With sigma, the first
 * factor carries sigma_Q, so the regrouped sum is direct_form of the
 * Whitney-synthetic multiplier.
 */
TileSumResult tile_sum(const TileSet& ts, const std::vector<Signal>& f, const EtaKernel& eta,
                       const WhitneySymbol* sigma = nullptr);

struct TreeEstimate {
  cplx value = 0;
  double rhs = 0;
  double ratio = 0;
  bool skipped = false;  // rhs = 0
};

/** \brief Tree sum and |I_T| prod size*_i^theta_i.
 *
 * theta and sizes are in sorted coordinates.  Throws std::invalid_argument
 * unless theta_n = 1, 0 < theta_i < 1 for i < n, sum_{i<n} theta_i < 2 and
 * every |f_i| <= 1 on the grid.
 */
TreeEstimate tree_sum_and_estimate(const TileSet& ts, const Tree& T, const std::vector<Signal>& f,
                                   const std::vector<double>& sizes,
                                   const std::vector<double>& theta, const EtaKernel& eta);

struct ParaproductReport {
  double statistic = 0;  // sum_j |int prod pi_{j,i} f_i| / prod ||f_i||_{p_i}
  std::vector<double> terms;
  bool skipped = false;
};

/// Throws std::invalid_argument when some j has no symbol vanishing at 0 or sum 1/p_i != 1.
ParaproductReport paraproduct_statistic(const std::vector<std::vector<SpectralSymbol1D>>& symbols,
                                        const std::vector<Signal>& f, const std::vector<double>& p);

/// Throws std::invalid_argument unless sum 1/p_i = 1 (to 1e-12).
void check_exponents(const std::vector<double>& p, bool require_above_two = true);

struct EvaluationReport {
  cplx value = 0;
  std::vector<double> norms;
  std::vector<double> p;
  double norm_prod = 0;
  double ratio = 0;
};

EvaluationReport evaluation_report(cplx value, const std::vector<Signal>& f,
                                   const std::vector<double>& p);

/// Random trigonometric polynomial with frequencies in [-kmax, kmax] and grid sup 1.
Signal band_limited_signal(int N, int kmax, std::uint64_t seed, int modes = 12);

/// beta = (0, -1, 2^M1).
std::vector<double> schedule_beta(int M1);

struct SweepConfig {
  std::vector<int> M1;
  int N = 1024;
  int band = 16;   // decomposition window |xi_i| <= band
  int kmax = 12;   // frequency range of the generated f
  int modes = 12;
  int jq_min = 0, jq_max = 1;
  std::uint64_t seed = 1;
  std::vector<double> p{3, 3, 3};
  GridConstants gc;
  int D = 8;
  double tol_zero = 1e-6;
  bool selection = true;
  bool record_runtime = false;
  int threads = 1;
};

struct SweepRow {
  int M1 = 0;
  std::vector<double> v;
  std::uint64_t seed = 0;
  std::vector<double> p;
  cplx lambda = 0;
  double norm_prod = 0;
  double ratio = 0;
  long long n_tiles = 0;
  long long n_trees = 0;
  double tree_width = 0;  // sum |I_T| over selected trees
  double bessel_max = 0;
  double runtime_ms = 0;
};

/// One row per schedule point; rows are independent and ordered as the schedule.
std::vector<SweepRow> uniformity_sweep(const SweepConfig& cfg);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct ContrastRow {
  int M1 = 0;
  int B = 0;  // bandwidth of the family member
  int N = 0;
  cplx lambda = 0;
  double norm_prod = 0;
  double ratio = 0;
};

/** \brief Ratios for m = psi(xi_1) a_B(xi_2) on a constructed family.
 *
 * psi is a bump on [1, 2], a_B(xi) = exp(-i pi xi^2 / L) with L = 2B + 1
 * (derivatives bounded uniformly in B on the band), f_2 the chirp undone by
 * a_B, f_3 a modulated Dirichlet kernel.  B = 2^{M1}.
 */
std::vector<ContrastRow> contrast_diagnostic(const std::vector<int>& M1,
                                             const std::vector<double>& p, int N_min = 1024);
std::string contrast_csv(const std::vector<ContrastRow>& rows);

}  // namespace tfa

#endif
