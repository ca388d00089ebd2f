#ifndef TFA_LEMMAS_HPP
#define TFA_LEMMAS_HPP

#include <cstdint>

namespace tfa {

struct WeightLemmaConfig {
  int N = 1024;
  int K = 4;
  int packings = 64;
  int trials = 16;
  int band = 32;  // random test functions use frequencies |k| <= band
  std::uint64_t seed = 1;
};

/// Worst observed constant per lemma (ratio of the two sides).
struct WeightLemmaReport {
  double almost = 0;         // disjoint packing, sum |I|^{1/2} chi~_I f_I
  double almost_useful = 0;  // the chi~_{I'} weighted variant
  double bernstein = 0;      // ||w f||_inf / (2^{Kj/2} ||w f||_2)
  double local = 0;          // ||w S_j f||_2 / ||w f||_2
  int cases = 0;
};

WeightLemmaReport validate_weight_lemmas(const WeightLemmaConfig& cfg);

}  // namespace tfa

#endif
