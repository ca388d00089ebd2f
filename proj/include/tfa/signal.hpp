#ifndef TFA_SIGNAL_HPP
#define TFA_SIGNAL_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace tfa {

using cplx = std::complex<double>;

/** \brief Periodic uniformly sampled signal.
 *
 * Sample n sits at origin + n * period / N.  Frequencies are integer
 * multiples of 1/period; the forward transform is scaled by 1/N so that
 * coefficient k is the Fourier coefficient of the mode e^{2 pi i k x/period}.
 */
struct Signal {
  std::vector<cplx> x;
  double period = 1.0;
  double origin = 0.0;

  int size() const { return static_cast<int>(x.size()); }
  double dx() const { return period / static_cast<double>(x.size()); }
  double point(int n) const { return origin + n * dx(); }
};

/// Zero signal; N must be a power of two >= 16.
Signal make_signal(int N, double period = 1.0, double origin = 0.0);

/// Throws unless N is a power of two >= 16.
void check_grid(int N);

/// Bin index -> signed integer frequency in [-N/2, N/2).
inline int bin_frequency(int idx, int N) { return idx < N / 2 ? idx : idx - N; }
/// Signed integer frequency -> bin index.
inline int frequency_bin(int k, int N) { return ((k % N) + N) % N; }

/// Fourier coefficients, FFT order, 1/N normalised.
std::vector<cplx> forward(const Signal& f);
/// Inverse of forward on the grid of \p like.
Signal inverse(const std::vector<cplx>& c, double period = 1.0, double origin = 0.0);

/// n-dimensional unnormalised DFT in place (row-major dims); sign -1 forward, +1 backward.
void fft_nd(std::vector<cplx>& data, const std::vector<int>& dims, int sign);

/** \brief One-dimensional Fourier multiplier symbol.
 *
 * eval is called with the physical frequency k/period for every bin inside
 * [lo, hi]; bins outside the support are set to zero.
 */
struct SpectralSymbol1D {
  std::function<cplx(double)> eval;
  double lo = -1e300;
  double hi = 1e300;
  int smoothness = 0;  // largest derivative order sampled by budget checks
};

Signal apply_multiplier(const SpectralSymbol1D& sym, const Signal& f);
/// Same, on coefficients already in FFT order.
std::vector<cplx> apply_multiplier(const SpectralSymbol1D& sym, const std::vector<cplx>& c,
                                   double period);

/// Integral over one period.
cplx integral(const Signal& f);
/// (integral |f|^p)^{1/p}; p <= 0 or infinite gives the sup norm.
double lp_norm(const Signal& f, double p);
double l2_norm(const Signal& f);

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(const Signal& a, const Signal& b);
Signal operator*(cplx s, const Signal& a);
void check_same_grid(const Signal& a, const Signal& b);

/// Smooth step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);

/** \brief The fixed kernel eta and its dilates.
 *
 * eta is the inverse transform of an even nonnegative-definite bump hat_eta
 * supported in [-2^{-2K}, 2^{-2K}] with hat_eta(0) = 1; eta_j(x) =
 * 2^{Kj} eta(2^{Kj} x) so hat_eta_j is supported in |xi| <= 2^{K(j-2)}.
 */
class EtaKernel {
public:
  explicit EtaKernel(int K);
  int K() const { return K_; }
  /// hat eta_j at physical frequency xi.
  double hat(double xi, double j) const;
  /// eta_j periodised and sampled on a grid of N points.
  Signal sampled(int N, double j, double period = 1.0) const;

private:
  double profile(double u) const;  // autocorrelation, support [-1, 1]
  int K_;
  std::vector<double> table_;
};

/// Half-open arc [a, b) of the period; b - a must lie in [0, period].
struct Arc {
  double a = 0, b = 0;
};

/// chi_E sampled on the grid (half-open arcs, so disjoint unions add exactly).
Signal indicator(const std::vector<Arc>& E, int N, double period = 1.0, double origin = 0.0);
/// chi_{E,j} = chi_E * eta_j.
Signal smooth_indicator(const std::vector<Arc>& E, double j, const EtaKernel& eta, int N,
                        double period = 1.0, double origin = 0.0);

struct DecayFit {
  double C = 0;
  double q = 0;
  int points = 0;
};
/// Fit |chi_{E,j} - chi_E| <= C (1 + 2^{Kj} dist(x, boundary E))^{-q} on the grid.
DecayFit fit_indicator_decay(const std::vector<Arc>& E, double j, const EtaKernel& eta, int N);

enum class RieszSign { plus, minus };
/// H+ keeps frequencies >= xi (the xi bin included), H- keeps frequencies < xi.
Signal riesz_projection(const Signal& f, double xi, RieszSign sign);

enum class LPKind { T, S };
/// Littlewood-Paley profile: 1 on |t| <= 2, 0 on |t| >= 4.
double lp_profile(double t);
/// T_j symbol tau((xi - center)/2^{Kj}); S_j = T_j - T_{j-1}.
double lp_symbol(double xi, double j, int K, LPKind kind, double center = 0.0);
Signal littlewood_paley(const Signal& f, double j, int K, LPKind kind, double center = 0.0);

/// Periodic distance from x to the arc [a, b].
double periodic_distance(double x, double a, double b, double period = 1.0);
/// tilde chi_I^p = (1 + dist(x, I)/|I|)^{-p} sampled on the grid.
Signal weight_profile(double a, double b, double p, int N, double period = 1.0,
                      double origin = 0.0);

/// Little-endian binary signal file (complex64 samples, 64-byte header).
void write_signal_binary(const std::string& path, const Signal& f);
Signal read_signal_binary(const std::string& path);
std::string signal_to_json(const Signal& f);
Signal signal_from_json(const std::string& text);

}  // namespace tfa

#endif
