#ifndef TFA_DYADIC_HPP
#define TFA_DYADIC_HPP

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tfa {

/** \brief Exact dyadic rational stored as a signed 128-bit fixed point number.
 *
 * Value is raw / 2^kFrac.  Every operation used by the geometry either stays
 * exact or throws.
 */
class Dyadic {
public:
  using raw_type = __int128;
  static constexpr int kFrac = 40;

  constexpr Dyadic() = default;

  static constexpr Dyadic from_raw(raw_type r) { Dyadic d; d.raw_ = r; return d; }
  static Dyadic from_int(long long v);
  /// p / 2^q, q may be negative.
  static Dyadic ratio(long long p, int q);
  static Dyadic pow2(int e) { return ratio(1, -e); }
  static Dyadic parse(const std::string& s);

  raw_type raw() const { return raw_; }
  double to_double() const;
  long double to_ldouble() const;
  std::string str() const;

  /// Multiply by 2^e; throws when bits would be lost.
  Dyadic mul_pow2(int e) const;
  Dyadic half() const { return mul_pow2(-1); }
  /// Largest integer multiple of 2^e that is <= *this.
  Dyadic floor_to(int e) const;
  /// True when the value is an integer multiple of 2^e.
  bool is_multiple_of_pow2(int e) const;

  friend Dyadic operator+(Dyadic a, Dyadic b) { return from_raw(a.raw_ + b.raw_); }
  friend Dyadic operator-(Dyadic a, Dyadic b) { return from_raw(a.raw_ - b.raw_); }
  friend Dyadic operator-(Dyadic a) { return from_raw(-a.raw_); }
  friend Dyadic operator*(Dyadic a, long long k) { return from_raw(a.raw_ * k); }
  friend Dyadic operator*(long long k, Dyadic a) { return from_raw(a.raw_ * k); }
  Dyadic& operator+=(Dyadic b) { raw_ += b.raw_; return *this; }
  Dyadic& operator-=(Dyadic b) { raw_ -= b.raw_; return *this; }

  friend bool operator==(Dyadic a, Dyadic b) { return a.raw_ == b.raw_; }
  friend std::strong_ordering operator<=>(Dyadic a, Dyadic b) {
    return a.raw_ < b.raw_ ? std::strong_ordering::less
         : a.raw_ > b.raw_ ? std::strong_ordering::greater
                           : std::strong_ordering::equal;
  }

private:
  raw_type raw_ = 0;
};

inline Dyadic dmin(Dyadic a, Dyadic b) { return a < b ? a : b; }
inline Dyadic dmax(Dyadic a, Dyadic b) { return a < b ? b : a; }

/// Exact integer product of two dyadics, used for dilations by dyadic factors.
Dyadic dmul(Dyadic a, Dyadic b);

/** \brief Closed interval [lo, hi] with dyadic endpoints. */
struct DInterval {
  Dyadic lo, hi;

  Dyadic length() const { return hi - lo; }
  Dyadic center() const { return (lo + hi).half(); }
  bool contains(Dyadic x) const { return lo <= x && x <= hi; }
  bool contains(const DInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const DInterval& o) const { return !(o.hi < lo || hi < o.lo); }
  /// Dilate about the center by the integer factor k.
  DInterval dilate(long long k) const;
  /// Half-open intersection test, used for spatial intervals [lo, hi).
  bool overlaps_open(const DInterval& o) const { return lo < o.hi && o.lo < hi; }
  /// Containment of half-open intervals.
  bool contains_open(const DInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  std::string str() const { return "[" + lo.str() + ", " + hi.str() + "]"; }

  friend bool operator==(const DInterval&, const DInterval&) = default;
};

/// Convex hull of two intervals.
inline DInterval hull(const DInterval& a, const DInterval& b) {
  return {dmin(a.lo, b.lo), dmax(a.hi, b.hi)};
}

std::string int128_to_string(__int128 v);

}  // namespace tfa

#endif
