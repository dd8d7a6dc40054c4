#include "msld/fixedpoint.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace msld {

namespace {

void check_frac_bits(int frac_bits) {
  if (frac_bits < 1 || frac_bits > FixedPoint::max_frac_bits) {
    throw std::invalid_argument("frac_bits must be in [1, " + std::to_string(FixedPoint::max_frac_bits) +
                                "], got " + std::to_string(frac_bits));
  }
}

void check_same_format(const FixedPoint& a, const FixedPoint& b) {
  if (a.frac_bits() != b.frac_bits()) {
    throw std::invalid_argument("fixed-point operands have different frac_bits (" +
                                std::to_string(a.frac_bits()) + " vs " + std::to_string(b.frac_bits()) + ")");
  }
}

using UInt = unsigned __int128;

UInt isqrt(UInt n) {
  if (n < 2) return n;
  // Newton iteration from an overestimate.
  UInt x = UInt{1} << ((wide::bit_width(static_cast<wide::Int>(n)) + 1) / 2 + 1);
  while (true) {
    const UInt y = (x + n / x) / 2;
    if (y >= x) return x;
    x = y;
  }
}

}  // namespace

namespace wide {

Int round_div(Int numerator, Int denominator) {
  if (denominator == 0) throw std::domain_error("division by zero");
  const bool negative = (numerator < 0) != (denominator < 0);
  const UInt n = numerator < 0 ? static_cast<UInt>(-numerator) : static_cast<UInt>(numerator);
  const UInt d = denominator < 0 ? static_cast<UInt>(-denominator) : static_cast<UInt>(denominator);
  UInt q = n / d;
  const UInt r = n % d;
  if (r >= d - r) ++q;  // 2r >= d without overflow
  const Int result = static_cast<Int>(q);
  return negative ? -result : result;
}

Int round_shift(Int value, int shift) {
  if (shift <= 0) return value;
  const bool negative = value < 0;
  const UInt magnitude = negative ? static_cast<UInt>(-value) : static_cast<UInt>(value);
  const UInt rounded = (magnitude + (UInt{1} << (shift - 1))) >> shift;
  const Int result = static_cast<Int>(rounded);
  return negative ? -result : result;
}

std::int64_t narrow(Int value) {
  if (value > std::numeric_limits<std::int64_t>::max() || value < -std::numeric_limits<std::int64_t>::max()) {
    throw std::overflow_error("fixed-point overflow");
  }
  return static_cast<std::int64_t>(value);
}

int bit_width(Int value) {
  UInt magnitude = value < 0 ? static_cast<UInt>(-value) : static_cast<UInt>(value);
  int bits = 0;
  while (magnitude != 0) {
    magnitude >>= 1;
    ++bits;
  }
  return bits;
}

}  // namespace wide

FixedPoint FixedPoint::from_raw(std::int64_t raw, int frac_bits) {
  check_frac_bits(frac_bits);
  if (raw == std::numeric_limits<std::int64_t>::min()) throw std::overflow_error("fixed-point overflow");
  return FixedPoint(raw, frac_bits);
}

FixedPoint FixedPoint::from_int(std::int64_t value, int frac_bits) {
  check_frac_bits(frac_bits);
  return FixedPoint(wide::narrow(static_cast<wide::Int>(value) << frac_bits), frac_bits);
}

double FixedPoint::to_real() const { return std::ldexp(static_cast<double>(raw_), -frac_bits_); }

double FixedPoint::ulp() const { return std::ldexp(1.0, -frac_bits_); }

FixedPoint fx_from_real(double value, int frac_bits) {
  check_frac_bits(frac_bits);
  if (!std::isfinite(value)) throw std::overflow_error("fixed-point conversion of a non-finite value");
  const double scaled = std::round(std::ldexp(value, frac_bits));  // std::round is half away from zero
  if (std::fabs(scaled) >= 0x1p63) throw std::overflow_error("fixed-point overflow converting " + std::to_string(value));
  return FixedPoint::from_raw(static_cast<std::int64_t>(scaled), frac_bits);
}

FixedPoint fx_add(const FixedPoint& a, const FixedPoint& b) {
  check_same_format(a, b);
  return FixedPoint::from_raw(wide::narrow(static_cast<wide::Int>(a.raw()) + b.raw()), a.frac_bits());
}

FixedPoint fx_sub(const FixedPoint& a, const FixedPoint& b) {
  check_same_format(a, b);
  return FixedPoint::from_raw(wide::narrow(static_cast<wide::Int>(a.raw()) - b.raw()), a.frac_bits());
}

FixedPoint fx_mul(const FixedPoint& a, const FixedPoint& b) {
  check_same_format(a, b);
  const wide::Int product = static_cast<wide::Int>(a.raw()) * b.raw();
  return FixedPoint::from_raw(wide::narrow(wide::round_shift(product, a.frac_bits())), a.frac_bits());
}

FixedPoint fx_div(const FixedPoint& a, const FixedPoint& b) {
  check_same_format(a, b);
  if (b.raw() == 0) throw std::domain_error("fixed-point division by zero");
  const wide::Int numerator = static_cast<wide::Int>(a.raw()) << a.frac_bits();
  return FixedPoint::from_raw(wide::narrow(wide::round_div(numerator, b.raw())), a.frac_bits());
}

FixedPoint fx_sqrt(const FixedPoint& a) {
  if (a.raw() < 0) throw std::domain_error("fixed-point square root of a negative value");
  // sqrt(raw / 2^f) * 2^f == sqrt(raw * 2^f)
  const UInt n = static_cast<UInt>(a.raw()) << a.frac_bits();
  UInt s = isqrt(n);
  // Round to nearest: (s + 1/2)^2 = s^2 + s + 1/4, and n is an integer.
  if (n - s * s > s) ++s;
  return FixedPoint::from_raw(wide::narrow(static_cast<wide::Int>(s)), a.frac_bits());
}

int fx_compare(const FixedPoint& a, const FixedPoint& b) {
  check_same_format(a, b);
  return a.raw() < b.raw() ? -1 : (a.raw() > b.raw() ? 1 : 0);
}

}  // namespace msld
