#include "msld/reference.hpp"

#include <string>

namespace msld {

void check_inputs(const GrayImage& img, const Mask& mask) {
  if (img.size() == 0) throw ValidationError("empty image");
  if (mask.rows() != img.rows() || mask.cols() != img.cols()) {
    throw ValidationError("mask is " + std::to_string(mask.cols()) + "x" + std::to_string(mask.rows()) +
                          " but image is " + std::to_string(img.cols()) + "x" + std::to_string(img.rows()));
  }
  if (!mask.any()) throw ValidationError("empty ROI");
}

double standardize(double value, double mean, double std) {
  if (std < kDegenerateStd) return 0.0;
  return (value - mean) / std;
}

double combine(std::span<const double> standardized, double igc_standardized, int n_scales) {
  if (standardized.size() != static_cast<std::size_t>(n_scales)) {
    throw ValidationError("combine: expected " + std::to_string(n_scales) + " scale values, got " +
                          std::to_string(standardized.size()));
  }
  double sum = 0.0;
  for (double v : standardized) sum += v;
  sum += igc_standardized;
  return sum / (n_scales + 1);
}

std::vector<ResponseMap> raw_response_maps(const GrayImage& img, const Mask& mask, const MsldParams& params) {
  check_inputs(img, mask);
  const LineBank bank(params);
  std::vector<ResponseMap> maps(static_cast<std::size_t>(params.n_scales()),
                                ResponseMap::Zero(img.rows(), img.cols()));
  for (Index y = 0; y < img.rows(); ++y) {
    for (Index x = 0; x < img.cols(); ++x) {
      if (!mask(y, x)) continue;
      const RawResponse r = raw_response(img, mask, x, y, params, bank);
      for (std::size_t s = 0; s < maps.size(); ++s) maps[s](y, x) = r.response[s];
    }
  }
  return maps;
}

ResponseMap standardize_map(const ResponseMap& values, const Mask& mask, const RoiMoments& moments) {
  ResponseMap out = ResponseMap::Zero(values.rows(), values.cols());
  for (Index i = 0; i < values.size(); ++i) {
    if (mask.data()[i]) out.data()[i] = standardize(values.data()[i], moments.mean, moments.std);
  }
  return out;
}

ReferenceResult msld_reference(const GrayImage& img, const Mask& mask, const MsldParams& params) {
  const std::vector<ResponseMap> raw = raw_response_maps(img, mask, params);

  ReferenceResult result;
  result.stats.roi_count = mask.count();
  std::vector<ResponseMap> standardized;
  standardized.reserve(raw.size());
  for (const auto& map : raw) {
    const RoiMoments m = scale_stats(map, mask);
    result.stats.mean.push_back(m.mean);
    result.stats.std.push_back(m.std);
    standardized.push_back(standardize_map(map, mask, m));
  }

  const ResponseMap igc = img.cast<double>();
  const RoiMoments igc_moments = scale_stats(igc, mask);
  result.stats.igc_mean = igc_moments.mean;
  result.stats.igc_std = igc_moments.std;
  const ResponseMap igc_standardized = standardize_map(igc, mask, igc_moments);

  result.response = ResponseMap::Zero(img.rows(), img.cols());
  std::vector<double> terms(standardized.size());
  for (Index i = 0; i < img.size(); ++i) {
    if (!mask.data()[i]) continue;
    for (std::size_t s = 0; s < standardized.size(); ++s) terms[s] = standardized[s].data()[i];
    result.response.data()[i] = combine(terms, igc_standardized.data()[i], params.n_scales());
  }
  return result;
}

}  // namespace msld
