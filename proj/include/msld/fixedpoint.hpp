#pragma once

#include <cstdint>
#include <stdexcept>

namespace msld {

/// Signed binary fixed-point value: represented value == raw / 2^frac_bits.
///
/// A single 64-bit raw word stands in for the per-signal word lengths of the
/// hardware datapath; every operation checks for overflow of that word and
/// rounds half away from zero. Mixing values with different frac_bits throws
/// std::invalid_argument; overflow throws std::overflow_error.
class FixedPoint {
 public:
  static constexpr int max_frac_bits = 40;

  FixedPoint() = default;

  static FixedPoint from_raw(std::int64_t raw, int frac_bits);
  static FixedPoint from_int(std::int64_t value, int frac_bits);

  std::int64_t raw() const { return raw_; }
  int frac_bits() const { return frac_bits_; }
  double to_real() const;

  /// One unit in the last place, 2^-frac_bits.
  double ulp() const;

  friend bool operator==(const FixedPoint& a, const FixedPoint& b) = default;

 private:
  FixedPoint(std::int64_t raw, int frac_bits) : raw_(raw), frac_bits_(frac_bits) {}

  std::int64_t raw_ = 0;
  int frac_bits_ = 1;
};

FixedPoint fx_from_real(double value, int frac_bits);
inline double fx_to_real(const FixedPoint& a) { return a.to_real(); }

FixedPoint fx_add(const FixedPoint& a, const FixedPoint& b);
FixedPoint fx_sub(const FixedPoint& a, const FixedPoint& b);
FixedPoint fx_mul(const FixedPoint& a, const FixedPoint& b);
FixedPoint fx_div(const FixedPoint& a, const FixedPoint& b);
FixedPoint fx_sqrt(const FixedPoint& a);

int fx_compare(const FixedPoint& a, const FixedPoint& b);

inline FixedPoint operator+(const FixedPoint& a, const FixedPoint& b) { return fx_add(a, b); }
inline FixedPoint operator-(const FixedPoint& a, const FixedPoint& b) { return fx_sub(a, b); }
inline FixedPoint operator*(const FixedPoint& a, const FixedPoint& b) { return fx_mul(a, b); }
inline FixedPoint operator/(const FixedPoint& a, const FixedPoint& b) { return fx_div(a, b); }
inline bool operator<(const FixedPoint& a, const FixedPoint& b) { return fx_compare(a, b) < 0; }

/// Helpers for wide (128-bit) integer accumulators and rescaling.
namespace wide {

using Int = __int128;

/// round(numerator / denominator), half away from zero; denominator != 0.
Int round_div(Int numerator, Int denominator);

/// round(value / 2^shift), half away from zero.
Int round_shift(Int value, int shift);

/// Converts a wide raw value to a 64-bit raw word, throwing std::overflow_error if it does not fit.
std::int64_t narrow(Int value);

/// Number of bits (excluding sign) needed to represent |value|.
int bit_width(Int value);

}  // namespace wide

}  // namespace msld
