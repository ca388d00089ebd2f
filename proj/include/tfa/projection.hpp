#ifndef TFA_PROJECTION_HPP
#define TFA_PROJECTION_HPP

#include <vector>

#include "tfa/signal.hpp"
#include "tfa/tiles.hpp"

namespace tfa {

/// pi_{Q_i}: symbol equal to 1 on (1/2)Q~_i and supported in Q~_i, in physical frequency xi / v_i.
Signal tile_projection(const Signal& f, const Cube& q, int i, double vi);

/// chi~_j: smooth indicator of E_{Q^j,T} at scale j.
Signal tree_cutoff(const TreeAnatomy& A, int jq, const EtaKernel& eta, int N);

struct ProjectionBlock {
  int j = 0;
  // spectral support of chi~_j pi~_j f relative to (xi_T)_i, in units 2^{K(j + m_i)}
  double band_lo = 0, band_hi = 0;
  double fire2_residual = 0;  // ||chi~_j pi~_j f - S_j Pi f||_2 / ||f||_2
};

struct Correction {
  int j = 0;
  bool left = true;
  double endpoint = 0;     // x^l_I or x^r_I
  double lo = 0, hi = 0;   // open side interval, may exceed [0, 1)
  cplx c = 0;
  double moment_residual = 0;  // |int (H S f - c phi)| / (||f||_2 |I_T|^{1/2})
};

struct ProjectionResult {
  bool lacunary = true;
  int i = 0;
  double xi = 0;  // (xi_T)_i
  double m = 0;   // m_i
  Signal value;
  std::vector<ProjectionBlock> blocks;  // lacunary case
  // non-lacunary case
  Signal raw;                       // Pi~ before corrections
  std::vector<int> level;           // j(x), -1 outside E~_{j0}
  std::vector<Correction> corrections;
  double telescope_residual = 0;    // max |Pi~ - T_{j(x)+m} f| / ||f||_inf
  int whole_circle_components = 0;  // components with no endpoints (no correction)

  double max_fire2() const;
  double max_moment() const;
};

/// Sum over J of chi~_j pi~_j f; throws std::invalid_argument unless every tile is lacunary for i.
ProjectionResult project_lacunary(const Signal& f, const TileSet& ts, const Tree& T,
                                  const TreeAnatomy& A, int i, const EtaKernel& eta);

/// Telescoped projection with mean-zero corrections; throws std::invalid_argument unless no tile
/// is lacunary for i, StructuralError when side intervals collide or miss the grid.
ProjectionResult project_nonlacunary(const Signal& f, const TileSet& ts, const Tree& T,
                                     const TreeAnatomy& A, int i);

/// Dispatch on the lacunarity of the tree for i.
ProjectionResult project(const Signal& f, const TileSet& ts, const Tree& T, const TreeAnatomy& A,
                         int i, const EtaKernel& eta);

struct ProjectionNormReport {
  bool skipped = false;  // zero data or zero size
  double norm_p = 0;
  double linf = 0;
  double fire1 = 0;     // ||Pi||_p / (|I_T|^{1/p} size*^theta)
  double fire_loc = 0;  // max over j, I of the localized ratio
  double error1 = 0;    // non-lacunary: max over j0, I0 of the error functional ratio
};

ProjectionNormReport projection_norm_report(const ProjectionResult& r, const Signal& f,
                                            const TileSet& ts, const Tree& T, const TreeAnatomy& A,
                                            double size_star, double p, double theta,
                                            const EtaKernel& eta);

}  // namespace tfa

#endif
