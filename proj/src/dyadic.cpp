#include "tfa/dyadic.hpp"

#include <cmath>
#include <cstdlib>

namespace tfa {

namespace {
constexpr __int128 kOne = static_cast<__int128>(1) << Dyadic::kFrac;
// keep well inside the 128-bit range so sums of a few values never wrap
constexpr __int128 kLimit = static_cast<__int128>(1) << 120;

void check_range(__int128 r) {
  if (r > kLimit || r < -kLimit) throw std::overflow_error("dyadic overflow");
}
}  // namespace

std::string int128_to_string(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

Dyadic Dyadic::from_int(long long v) { return from_raw(static_cast<__int128>(v) * kOne); }

Dyadic Dyadic::ratio(long long p, int q) {
  __int128 r = p;
  int shift = kFrac - q;
  if (shift >= 0) {
    if (shift > 126) throw std::overflow_error("dyadic exponent out of range");
    r = r << shift;  // sign-preserving on two's complement
    if ((r >> shift) != p) throw std::overflow_error("dyadic overflow");
  } else {
    int s = -shift;
    if (s > 126 || (r & ((static_cast<__int128>(1) << s) - 1)) != 0)
      throw std::domain_error("dyadic precision exceeded");
    r = r >> s;
  }
  check_range(r);
  return from_raw(r);
}

Dyadic Dyadic::mul_pow2(int e) const {
  if (e >= 0) {
    if (e > 100) throw std::overflow_error("dyadic overflow");
    __int128 r = raw_ << e;
    if ((r >> e) != raw_) throw std::overflow_error("dyadic overflow");
    check_range(r);
    return from_raw(r);
  }
  int s = -e;
  if (s > 126) throw std::domain_error("dyadic precision exceeded");
  if ((raw_ & ((static_cast<__int128>(1) << s) - 1)) != 0)
    throw std::domain_error("dyadic precision exceeded");
  return from_raw(raw_ >> s);
}

bool Dyadic::is_multiple_of_pow2(int e) const {
  int s = kFrac + e;
  if (s <= 0) return true;
  if (s > 126) return raw_ == 0;
  return (raw_ & ((static_cast<__int128>(1) << s) - 1)) == 0;
}

Dyadic Dyadic::floor_to(int e) const {
  int s = kFrac + e;
  if (s <= 0) return *this;
  __int128 unit = static_cast<__int128>(1) << s;
  __int128 q = raw_ / unit;
  if (raw_ % unit != 0 && raw_ < 0) --q;
  return from_raw(q * unit);
}

double Dyadic::to_double() const { return static_cast<double>(to_ldouble()); }

long double Dyadic::to_ldouble() const {
  return std::ldexp(static_cast<long double>(raw_), -kFrac);
}

std::string Dyadic::str() const {
  __int128 p = raw_;
  int q = kFrac;
  while (q > 0 && (p & 1) == 0) {
    p >>= 1;
    --q;
  }
  if (p == 0) q = 0;
  return int128_to_string(p) + "/2^" + std::to_string(q);
}

Dyadic Dyadic::parse(const std::string& s) {
  auto slash = s.find("/2^");
  if (slash == std::string::npos) throw std::invalid_argument("bad dyadic: " + s);
  std::string num = s.substr(0, slash);
  int q = std::stoi(s.substr(slash + 3));
  bool neg = !num.empty() && num[0] == '-';
  __int128 p = 0;
  for (size_t k = neg ? 1 : 0; k < num.size(); ++k) {
    if (num[k] < '0' || num[k] > '9') throw std::invalid_argument("bad dyadic: " + s);
    p = p * 10 + (num[k] - '0');
    check_range(p);
  }
  if (neg) p = -p;
  Dyadic d = from_raw(p);
  // p is an integer; scale it into fixed point
  if (q > kFrac) throw std::domain_error("dyadic precision exceeded");
  return d.mul_pow2(kFrac - q);
}

Dyadic dmul(Dyadic a, Dyadic b) {
  // (ra * rb) / 2^kFrac, exact only if the product keeps the precision
  __int128 ra = a.raw(), rb = b.raw();
  int ta = 0, tb = 0;
  while (ra != 0 && (ra & 1) == 0 && ta < Dyadic::kFrac) { ra >>= 1; ++ta; }
  while (rb != 0 && (rb & 1) == 0 && ta + tb < Dyadic::kFrac) { rb >>= 1; ++tb; }
  int rest = Dyadic::kFrac - ta - tb;
  __int128 prod = ra * rb;
  if (ra != 0 && prod / ra != rb) throw std::overflow_error("dyadic overflow");
  if (rest > 0) {
    if ((prod & ((static_cast<__int128>(1) << rest) - 1)) != 0)
      throw std::domain_error("dyadic precision exceeded");
    prod >>= rest;
  }
  check_range(prod);
  return Dyadic::from_raw(prod);
}

DInterval DInterval::dilate(long long k) const {
  // c +- k*len/2 ; written as lo' = (lo+hi)/2 - k(hi-lo)/2 to stay exact
  Dyadic sum = lo + hi;
  Dyadic len = hi - lo;
  Dyadic a = sum - len * k;
  Dyadic b = sum + len * k;
  return {a.half(), b.half()};
}

}  // namespace tfa
