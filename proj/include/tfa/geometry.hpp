#ifndef TFA_GEOMETRY_HPP
#define TFA_GEOMETRY_HPP

#include <vector>

namespace tfa {

/** \brief Grid constants at desk scale. */
struct GridConstants {
  int C0 = 2;      // Whitney fineness
  int K = 4;       // all dyadic lengths are powers of 2^K
  int Ndecay = 8;  // decay order used by the symbol budgets
  int lattice_shift = 2;  // cube centers live on 2^(j - lattice_shift) Z^n

  void validate() const;
};

/** \brief Direction of the singular line, sorted by decreasing modulus and
 * normalized so that the smallest entry has modulus one. */
class DegeneracyVector {
public:
  DegeneracyVector() = default;
  /// Sorts and normalizes \p raw.  \p K is used for m_i = M_i / K.
  DegeneracyVector(const std::vector<double>& raw, int K);

  int n() const { return static_cast<int>(v_.size()); }
  const std::vector<double>& v() const { return v_; }
  double v(int i) const { return v_[i]; }
  const std::vector<double>& M() const { return M_; }
  const std::vector<double>& m() const { return m_; }
  /// perm()[i] is the position in the raw input of sorted coordinate i.
  const std::vector<int>& perm() const { return perm_; }
  /// Normalization factor: v = raw[perm] / scale().
  double scale() const { return scale_; }
  /// Reorders a point given in input coordinates into sorted coordinates.
  std::vector<double> to_sorted(const std::vector<double>& x) const;

private:
  std::vector<double> v_, M_, m_;
  std::vector<int> perm_;
  double scale_ = 1.0;
};

/// v for the form with multiplier sgn(beta . xi): v = (b2-b3, b3-b1, b1-b2).
std::vector<double> beta_to_v(const std::vector<double>& beta);

/// sup_i |x_i - y_i| / |v_i| for x, y on the hyperplane sum = 0 (sorted coordinates).
double dv_distance(const std::vector<double>& x, const std::vector<double>& y,
                   const DegeneracyVector& v);

struct LineDistance {
  double distance;  // inf_t d_v(x, t v)
  double t;         // a minimizer
};

/// Distance from x to span(v) in the d_v metric.
LineDistance dv_distance_to_line(const std::vector<double>& x, const DegeneracyVector& v);

enum class RescaleDirection { forward, inverse };

std::vector<double> rescale(const std::vector<double>& x, const DegeneracyVector& v,
                            RescaleDirection dir);

}  // namespace tfa

#endif
