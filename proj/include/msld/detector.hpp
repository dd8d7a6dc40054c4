#pragma once

#include "msld/types.hpp"

#include <array>
#include <vector>

namespace msld {

inline constexpr int kOrientations = 12;

/// Detector configuration: an odd window side W with line lengths 1, 3, ..., W.
class MsldParams {
 public:
  /// Throws ValidationError unless window is odd and >= 3 and frac_bits is in range.
  explicit MsldParams(int window = 15, int frac_bits = 18);

  int window() const { return window_; }
  const std::vector<int>& scales() const { return scales_; }
  int n_scales() const { return static_cast<int>(scales_.size()); }
  static constexpr int orientations() { return kOrientations; }
  int frac_bits() const { return frac_bits_; }

  /// (W - 1) / 2
  int half_window() const { return (window_ - 1) / 2; }

 private:
  int window_;
  int frac_bits_;
  std::vector<int> scales_;
};

struct Offset {
  int dx = 0;  // column
  int dy = 0;  // row
  friend bool operator==(const Offset&, const Offset&) = default;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// The pixels of one oriented line, ordered along the line from one end to the other.
struct LinePattern {
  int orientation_index = 0;
  int length = 1;
  std::vector<Offset> offsets;
};

/// Rasterizes a line of odd `length` at angle orientation_index * 15 degrees.
///
/// Samples step one pixel along the dominant axis: for |cos| >= |sin| the
/// offsets are (j, round(j tan)), otherwise (round(j cot), j), for
/// j = -(L-1)/2 .. (L-1)/2. Lines of the same orientation are therefore
/// nested, point-symmetric and have exactly L distinct pixels.
LinePattern line_offsets(int orientation_index, int length);

/// Clamps a sample coordinate to the image.
inline Index clamp_coord(Index v, Index extent) { return v < 0 ? 0 : (v >= extent ? extent - 1 : v); }

/// Sum of the W x W window centered at (x, y), edge-clamped.
std::int64_t window_sum(const GrayImage& img, Index x, Index y, int window);
double window_mean(const GrayImage& img, Index x, Index y, int window);

std::int64_t line_sum(const GrayImage& img, Index x, Index y, const LinePattern& pattern);
double line_mean(const GrayImage& img, Index x, Index y, const LinePattern& pattern);

struct RawResponse {
  double window_mean = 0.0;
  std::vector<double> line_max;  // I_max^L per scale
  std::vector<double> response;  // R_W^L = I_max^L - I_avg^W per scale
};

/// Precomputed line patterns for every (scale, orientation).
class LineBank {
 public:
  explicit LineBank(const MsldParams& params);

  const LinePattern& at(int scale_index, int orientation) const {
    return patterns_[static_cast<std::size_t>(scale_index) * kOrientations + static_cast<std::size_t>(orientation)];
  }

 private:
  std::vector<LinePattern> patterns_;
};

/// Multi-scale raw response at (x, y). Throws ValidationError if (x, y) is outside the mask.
RawResponse raw_response(const GrayImage& img, const Mask& mask, Index x, Index y, const MsldParams& params);
RawResponse raw_response(const GrayImage& img, const Mask& mask, Index x, Index y, const MsldParams& params,
                         const LineBank& bank);

}  // namespace msld
