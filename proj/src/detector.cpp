#include "msld/detector.hpp"

#include "msld/error.hpp"
#include "msld/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace msld {

MsldParams::MsldParams(int window, int frac_bits) : window_(window), frac_bits_(frac_bits) {
  if (window < 3 || window % 2 == 0) {
    throw ValidationError("window must be odd and >= 3, got " + std::to_string(window));
  }
  if (frac_bits < 1 || frac_bits > FixedPoint::max_frac_bits) {
    throw ValidationError("frac_bits must be in [1, " + std::to_string(FixedPoint::max_frac_bits) + "], got " +
                          std::to_string(frac_bits));
  }
  for (int length = 1; length <= window; length += 2) scales_.push_back(length);
}

LinePattern line_offsets(int orientation_index, int length) {
  if (orientation_index < 0 || orientation_index >= kOrientations) {
    throw ValidationError("orientation index must be in [0, 12), got " + std::to_string(orientation_index));
  }
  if (length < 1 || length % 2 == 0) {
    throw ValidationError("line length must be odd and >= 1, got " + std::to_string(length));
  }
  const double theta = orientation_index * std::numbers::pi / kOrientations;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const bool x_major = std::fabs(c) >= std::fabs(s) - 1e-12;
  const double slope = x_major ? s / c : c / s;
  const int half = (length - 1) / 2;

  // Positive half first, then mirrored so the pattern is exactly point-symmetric.
  std::vector<Offset> positive;
  for (int j = 1; j <= half; ++j) {
    const int minor = static_cast<int>(std::round(j * slope));
    positive.push_back(x_major ? Offset{j, minor} : Offset{minor, j});
  }

  LinePattern pattern{orientation_index, length, {}};
  pattern.offsets.reserve(static_cast<std::size_t>(length));
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) pattern.offsets.push_back({-it->dx, -it->dy});
  pattern.offsets.push_back({0, 0});
  pattern.offsets.insert(pattern.offsets.end(), positive.begin(), positive.end());
  return pattern;
}

std::int64_t window_sum(const GrayImage& img, Index x, Index y, int window) {
  const Index half = (window - 1) / 2;
  std::int64_t sum = 0;
  for (Index dy = -half; dy <= half; ++dy) {
    const Index row = clamp_coord(y + dy, img.rows());
    for (Index dx = -half; dx <= half; ++dx) sum += img(row, clamp_coord(x + dx, img.cols()));
  }
  return sum;
}

double window_mean(const GrayImage& img, Index x, Index y, int window) {
  return static_cast<double>(window_sum(img, x, y, window)) / (static_cast<double>(window) * window);
}

std::int64_t line_sum(const GrayImage& img, Index x, Index y, const LinePattern& pattern) {
  std::int64_t sum = 0;
  for (const auto& o : pattern.offsets) sum += img(clamp_coord(y + o.dy, img.rows()), clamp_coord(x + o.dx, img.cols()));
  return sum;
}

double line_mean(const GrayImage& img, Index x, Index y, const LinePattern& pattern) {
  return static_cast<double>(line_sum(img, x, y, pattern)) / pattern.length;
}

LineBank::LineBank(const MsldParams& params) {
  patterns_.reserve(static_cast<std::size_t>(params.n_scales()) * kOrientations);
  for (int length : params.scales()) {
    for (int k = 0; k < kOrientations; ++k) patterns_.push_back(line_offsets(k, length));
  }
}

RawResponse raw_response(const GrayImage& img, const Mask& mask, Index x, Index y, const MsldParams& params) {
  return raw_response(img, mask, x, y, params, LineBank(params));
}

RawResponse raw_response(const GrayImage& img, const Mask& mask, Index x, Index y, const MsldParams& params,
                         const LineBank& bank) {
  if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows()) throw ValidationError("pixel outside the image");
  if (mask.rows() != img.rows() || mask.cols() != img.cols()) throw ValidationError("mask/image size mismatch");
  if (!mask(y, x)) throw ValidationError("raw_response requested outside the ROI");

  RawResponse out;
  out.window_mean = window_mean(img, x, y, params.window());
  out.line_max.reserve(static_cast<std::size_t>(params.n_scales()));
  out.response.reserve(static_cast<std::size_t>(params.n_scales()));
  for (int s = 0; s < params.n_scales(); ++s) {
    double best = line_mean(img, x, y, bank.at(s, 0));
    for (int k = 1; k < kOrientations; ++k) best = std::max(best, line_mean(img, x, y, bank.at(s, k)));
    out.line_max.push_back(best);
    out.response.push_back(best - out.window_mean);
  }
  return out;
}

}  // namespace msld
