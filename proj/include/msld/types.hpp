#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace msld {

using Index = Eigen::Index;

/// Row-major dense plane; rows are image lines, columns are pixels within a line.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Intensities in [0, 255]. width == cols() (Ncols), height == rows().
using GrayImage = Plane<std::uint8_t>;

/// true = inside the region of interest (or "vessel" for predictions / ground truth).
using Mask = Plane<bool>;

/// Real-valued detector output. Pixels outside the ROI are 0.
using ResponseMap = Plane<double>;

struct RgbImage {
  Plane<std::uint8_t> red;
  Plane<std::uint8_t> green;
  Plane<std::uint8_t> blue;

  Index width() const { return green.cols(); }
  Index height() const { return green.rows(); }
};

/// Per-scale ROI statistics plus the statistics of the inverted green channel.
struct ScaleStats {
  std::vector<double> mean;  // one entry per scale, ascending line length
  std::vector<double> std;   // population standard deviation, >= 0
  double igc_mean = 0.0;
  double igc_std = 0.0;
  Index roi_count = 0;
  // Number of statistics whose E[x^2] - m^2 came out negative and were clamped to 0.
  Index clamped_variances = 0;

  std::size_t n_scales() const { return mean.size(); }
};

}  // namespace msld
