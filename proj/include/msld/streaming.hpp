#pragma once

#include "msld/detector.hpp"
#include "msld/memory.hpp"
#include "msld/types.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace msld {

struct ArithmeticMode {
  enum class Kind { floating, fixed };

  Kind kind = Kind::floating;
  int frac_bits = 18;

  static ArithmeticMode floating_point() { return {Kind::floating, 18}; }
  static ArithmeticMode fixed_point(int frac_bits) { return {Kind::fixed, frac_bits}; }
};

/// One line-buffer slot: an (already inverted) intensity and its ROI bit.
struct PixelSlot {
  std::uint8_t value = 0;
  bool roi = false;
};

/// Raster-order shift register of (W - 1) * Ncols + W slots.
///
/// Slot i holds the pixel with linear raster index i. Only the most recent
/// capacity() pixels are readable; the center of the current W x W window is
/// (W - 1) / 2 rows and columns behind the last written pixel.
class LineBuffer {
 public:
  LineBuffer(int window, Index cols, MemoryLedger* ledger = nullptr);

  static Index capacity_for(int window, Index cols) { return (window - 1) * cols + window; }

  Index capacity() const { return static_cast<Index>(slots_.size()); }
  Index cols() const { return cols_; }
  /// Number of pixels pushed so far.
  Index written() const { return written_; }

  void push(PixelSlot slot);

  /// Throws std::out_of_range unless `linear` is among the last capacity() pixels pushed.
  const PixelSlot& at(Index linear) const;
  const PixelSlot& at(Index x, Index y) const { return at(y * cols_ + x); }

  /// Linear index of the window center for the last pushed pixel (may be negative while filling).
  Index center_index() const { return written_ - 1 - (half_ * cols_ + half_); }

 private:
  Index cols_;
  Index half_;
  Index written_ = 0;
  TrackedVector<PixelSlot> slots_;
};

struct MemoryFootprint {
  Index line_buffer_slots = 0;
  Index accumulator_words = 0;    // sum and sum of squares per scale and for I_igc, plus the ROI count
  Index stored_stats_values = 0;  // mean and std per scale, plus mean and std of I_igc
  Index register_words = 0;       // column-sum register, per-orientation line means, per-scale outputs
  std::size_t peak_total_bytes = 0;
  std::size_t largest_allocation_bytes = 0;
};

/// S_1 = center, S_{L+2} = S_L + both new endpoints. `line_pixels` has W entries, center at (W - 1) / 2.
std::vector<std::int64_t> line_sums_incremental(std::span<const std::int64_t> line_pixels);
void line_sums_incremental(std::span<const std::int64_t> line_pixels, std::span<std::int64_t> sums);

/// Maximum of the 12 orientation line means minus the window mean.
template <typename Value>
Value rrcm_max_subtract(std::span<const Value> line_means, const Value& window_mean);

ScaleStats stream_pass1(const GrayImage& img, const Mask& mask, const MsldParams& params, ArithmeticMode mode,
                        MemoryLedger* ledger = nullptr);

/// Throws ValidationError if `stats` do not match the parameters, mask or arithmetic mode.
ResponseMap stream_pass2(const GrayImage& img, const Mask& mask, const MsldParams& params, const ScaleStats& stats,
                         ArithmeticMode mode, MemoryLedger* ledger = nullptr);

struct StreamingResult {
  ResponseMap response;
  ScaleStats stats;
  MemoryFootprint footprint;
};

StreamingResult msld_streaming(const GrayImage& img, const Mask& mask, const MsldParams& params,
                               ArithmeticMode mode);

/// Footprint fields that follow from the configuration alone (no byte counts).
MemoryFootprint nominal_footprint(const MsldParams& params, Index cols);

// ---------------------------------------------------------------------------

template <typename Value>
Value rrcm_max_subtract(std::span<const Value> line_means, const Value& window_mean) {
  if (line_means.size() != static_cast<std::size_t>(kOrientations)) {
    throw std::invalid_argument("rrcm_max_subtract expects 12 line means");
  }
  // Pairwise tournament, as in the comparator tree.
  Value level[kOrientations];
  std::size_t n = line_means.size();
  for (std::size_t i = 0; i < n; ++i) level[i] = line_means[i];
  while (n > 1) {
    std::size_t next = 0;
    for (std::size_t i = 0; i + 1 < n; i += 2) level[next++] = level[i] < level[i + 1] ? level[i + 1] : level[i];
    if (n % 2 == 1) level[next++] = level[n - 1];
    n = next;
  }
  return level[0] - window_mean;
}

}  // namespace msld
