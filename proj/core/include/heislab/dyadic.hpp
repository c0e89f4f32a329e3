#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace heis {

using int128 = __int128;

/// Exact dyadic rational mantissa * 2^-exponent with exponent >= 0.
///
/// Canonical form: mantissa is odd or zero; zero has exponent 0. All
/// arithmetic is exact; mantissa overflow beyond 126 bits throws.
class Dyadic {
 public:
  constexpr Dyadic() = default;
  Dyadic(int128 mantissa, int exponent);

  static Dyadic from_int(std::int64_t k) { return Dyadic(k, 0); }
  /// 2^-k for k >= 0.
  static Dyadic pow2(int neg_exponent);
  /// Exact conversion; every finite double is a dyadic rational.
  static Dyadic from_double(double x);

  int128 mantissa() const { return mant_; }
  int exponent() const { return exp_; }
  bool is_zero() const { return mant_ == 0; }
  bool is_integer() const { return exp_ == 0; }

  /// Nearest double (exact whenever the mantissa fits in 53 bits).
  double value() const;

  Dyadic operator-() const;
  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-(const Dyadic& o) const;
  Dyadic operator*(const Dyadic& o) const;

  /// Value scaled by 2^k (k of either sign).
  Dyadic mul_pow2(int k) const;
  Dyadic times(std::int64_t k) const;

  /// floor(value * 2^l) for l >= 0.
  int128 floor_mul_pow2(int l) const;
  /// ceil(value * 2^l) for l >= 0.
  int128 ceil_mul_pow2(int l) const;

  std::strong_ordering operator<=>(const Dyadic& o) const;
  bool operator==(const Dyadic& o) const {
    return mant_ == o.mant_ && exp_ == o.exp_;
  }

  static Dyadic midpoint(const Dyadic& a, const Dyadic& b);

  std::string str() const;

 private:
  void normalize();
  int128 mant_ = 0;
  int exp_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Dyadic& d);

}  // namespace heis
