#include "heislab/dyadic.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace heis {

namespace {

const int128 kMantLimit = int128{1} << 126;

int128 checked(int128 v, const char* what) {
  if (v >= kMantLimit || v <= -kMantLimit) {
    throw std::overflow_error(std::string("Dyadic mantissa overflow in ") + what);
  }
  return v;
}

int128 shifted(int128 v, int by, const char* what) {
  if (by > 0) {
    for (int i = 0; i < by; ++i) v = checked(v * 2, what);
  }
  return v;
}

std::string int128_str(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return std::string(s.rbegin(), s.rend());
}

}  // namespace

Dyadic::Dyadic(int128 mantissa, int exponent) : mant_(mantissa), exp_(exponent) {
  if (exponent < 0) throw std::invalid_argument("Dyadic exponent must be >= 0");
  checked(mantissa, "constructor");
  normalize();
}

void Dyadic::normalize() {
  if (mant_ == 0) {
    exp_ = 0;
    return;
  }
  while (exp_ > 0 && (mant_ & 1) == 0) {
    mant_ >>= 1;
    --exp_;
  }
}

Dyadic Dyadic::pow2(int neg_exponent) {
  if (neg_exponent < 0) throw std::invalid_argument("Dyadic::pow2 expects k >= 0");
  return Dyadic(1, neg_exponent);
}

Dyadic Dyadic::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("Dyadic::from_double: non-finite");
  if (x == 0.0) return Dyadic();
  int e2 = 0;
  double f = std::frexp(x, &e2);  // x = f * 2^e2, |f| in [0.5, 1)
  auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
  int exp = 53 - e2;
  if (exp < 0) return Dyadic(shifted(m, -exp, "from_double"), 0);
  return Dyadic(m, exp);
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(mant_), -exp_); }

Dyadic Dyadic::operator-() const {
  Dyadic r;
  r.mant_ = -mant_;
  r.exp_ = exp_;
  return r;
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  int e = std::max(exp_, o.exp_);
  int128 a = shifted(mant_, e - exp_, "operator+");
  int128 b = shifted(o.mant_, e - o.exp_, "operator+");
  return Dyadic(checked(a + b, "operator+"), e);
}

Dyadic Dyadic::operator-(const Dyadic& o) const { return *this + (-o); }

Dyadic Dyadic::operator*(const Dyadic& o) const {
  // guard: |product| < 2^126 required; cheap width check first
  int128 am = mant_ < 0 ? -mant_ : mant_;
  int128 bm = o.mant_ < 0 ? -o.mant_ : o.mant_;
  int wa = 0, wb = 0;
  for (int128 t = am; t > 0; t >>= 1) ++wa;
  for (int128 t = bm; t > 0; t >>= 1) ++wb;
  if (wa + wb > 126) throw std::overflow_error("Dyadic mantissa overflow in operator*");
  return Dyadic(mant_ * o.mant_, exp_ + o.exp_);
}

Dyadic Dyadic::mul_pow2(int k) const {
  if (mant_ == 0) return Dyadic();
  if (k <= 0) return Dyadic(mant_, exp_ - k);
  int drop = std::min(k, exp_);
  Dyadic r;
  r.mant_ = shifted(mant_, k - drop, "mul_pow2");
  r.exp_ = exp_ - drop;
  r.normalize();
  return r;
}

Dyadic Dyadic::times(std::int64_t k) const {
  Dyadic factor(k, 0);
  return *this * factor;
}

int128 Dyadic::floor_mul_pow2(int l) const {
  if (l < 0) throw std::invalid_argument("floor_mul_pow2 expects l >= 0");
  if (l >= exp_) return shifted(mant_, l - exp_, "floor_mul_pow2");
  int shift = exp_ - l;
  // arithmetic right shift floors for negative mantissas as well
  return mant_ >> shift;
}

int128 Dyadic::ceil_mul_pow2(int l) const {
  if (l < 0) throw std::invalid_argument("ceil_mul_pow2 expects l >= 0");
  if (l >= exp_) return floor_mul_pow2(l);
  int shift = exp_ - l;
  int128 q = mant_ >> shift;
  int128 rem = mant_ - (q << shift);
  return rem != 0 ? q + 1 : q;
}

std::strong_ordering Dyadic::operator<=>(const Dyadic& o) const {
  // compare via the difference to avoid alignment overflow on operands
  Dyadic d = *this - o;
  if (d.mant_ < 0) return std::strong_ordering::less;
  if (d.mant_ > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Dyadic Dyadic::midpoint(const Dyadic& a, const Dyadic& b) { return (a + b).mul_pow2(-1); }

std::string Dyadic::str() const {
  if (exp_ == 0) return int128_str(mant_);
  return int128_str(mant_) + "/2^" + std::to_string(exp_);
}

std::ostream& operator<<(std::ostream& os, const Dyadic& d) { return os << d.str(); }

}  // namespace heis
