#ifndef TFA_FACTOR_HPP
#define TFA_FACTOR_HPP

#include <functional>
#include <vector>

#include "tfa/signal.hpp"
#include "tfa/whitney.hpp"

namespace tfa {

struct FactorTerm {
  std::vector<int> k;
  double weight = 0;  // (1 + |k|)^{-10 n}
  cplx coef;          // carried by the first factor
};

/** \brief Whitney piece written as a weighted sum of tensor products.
 *
 * Term k has factors psi_i(x_i) e^{2 pi i k_i (x_i - c_i) / (2 s)}, where
 * psi_i is 1 on (1/2)Q~_i and vanishes outside Q~_i; the first factor also
 * carries coef.  The sum over terms of weight * prod factors reproduces the
 * piece on (1/2)Q~ up to the recorded residual.
 */
struct FactoredSymbol {
  Cube cube;
  int k_max = 0;
  std::vector<FactorTerm> terms;
  double residual = 0;  // sup error on the sample grid of (1/2)Q~

  cplx factor(const FactorTerm& t, int i, double x) const;
  cplx evaluate(const std::vector<double>& x) const;
};

using Piece = std::function<double(const std::vector<double>&)>;

double factor_weight(const std::vector<int>& k);

/// Cutoff equal to 1 on (1/2)Q~_i and supported in Q~_i.
double factor_cutoff(const Cube& q, int i, double x);

/// Fourier series of the piece on the torus 2Q~, truncated at |k|_inf <= k_max.
/// Throws StructuralError if the residual exceeds tol.
FactoredSymbol tensor_factorize(const Cube& q, const Piece& piece, int k_max, double tol);

/// Doubles k_max from k_start until the residual is below tol (up to k_limit).
FactoredSymbol tensor_factorize_converged(const Cube& q, const Piece& piece, double tol,
                                          int k_start = 4, int k_limit = 256);

}  // namespace tfa

#endif
