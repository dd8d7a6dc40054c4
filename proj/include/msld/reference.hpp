#pragma once

#include "msld/detector.hpp"
#include "msld/error.hpp"
#include "msld/types.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace msld {

/// Standard deviations below this are treated as zero: the standardized value is then 0.
inline constexpr double kDegenerateStd = 1e-12;

struct RoiMoments {
  double mean = 0.0;
  double std = 0.0;  // population (divisor N)
  Index count = 0;
};

/// Two-pass mean / population std over the pixels where mask is true.
/// Throws ValidationError on a size mismatch or an empty ROI.
template <typename Derived>
RoiMoments scale_stats(const Eigen::ArrayBase<Derived>& values, const Mask& mask);

double standardize(double value, double mean, double std);

/// (sum of standardized scale responses + standardized I_igc) / (n_L + 1)
double combine(std::span<const double> standardized, double igc_standardized, int n_scales);

/// Raw responses R_W^L for every scale, one map per scale; 0 outside the ROI.
std::vector<ResponseMap> raw_response_maps(const GrayImage& img, const Mask& mask, const MsldParams& params);

/// Standardizes `values` over the ROI with the given moments; 0 outside the ROI.
ResponseMap standardize_map(const ResponseMap& values, const Mask& mask, const RoiMoments& moments);

struct ReferenceResult {
  ResponseMap response;
  ScaleStats stats;
};

/// Whole-image floating-point detector. `img` is the inverted green channel.
ReferenceResult msld_reference(const GrayImage& img, const Mask& mask, const MsldParams& params);

void check_inputs(const GrayImage& img, const Mask& mask);

// ---------------------------------------------------------------------------

template <typename Derived>
RoiMoments scale_stats(const Eigen::ArrayBase<Derived>& values, const Mask& mask) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw ValidationError("scale_stats: values/mask size mismatch");
  }
  RoiMoments m;
  m.count = mask.count();
  if (m.count == 0) throw ValidationError("empty ROI");
  const auto as_double = values.template cast<double>().eval();
  const double total = mask.select(as_double, 0.0).sum();
  m.mean = total / static_cast<double>(m.count);
  const double sq = mask.select((as_double - m.mean).square(), 0.0).sum();
  m.std = std::sqrt(sq / static_cast<double>(m.count));
  return m;
}

}  // namespace msld
