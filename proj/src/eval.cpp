#include "msld/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

namespace msld {

namespace {

void check_sizes(Index rows, Index cols, const Mask& a, const char* what) {
  if (a.rows() != rows || a.cols() != cols) {
    throw ValidationError(std::string(what) + " is " + std::to_string(a.cols()) + "x" + std::to_string(a.rows()) +
                          ", expected " + std::to_string(cols) + "x" + std::to_string(rows));
  }
}

struct Sample {
  double value;
  bool positive;
};

std::vector<Sample> roi_samples(const ResponseMap& response, const Mask& truth, const Mask& roi) {
  check_sizes(response.rows(), response.cols(), truth, "truth");
  check_sizes(response.rows(), response.cols(), roi, "roi");
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(roi.count()));
  for (Index i = 0; i < response.size(); ++i) {
    if (roi.data()[i]) samples.push_back({response.data()[i], truth.data()[i]});
  }
  return samples;
}

std::pair<Index, Index> class_counts(const std::vector<Sample>& samples) {
  Index pos = 0;
  for (const auto& s : samples) pos += s.positive ? 1 : 0;
  const Index neg = static_cast<Index>(samples.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw NumericError("ROI contains a single class (" + std::to_string(pos) + " vessel, " + std::to_string(neg) +
                       " background pixels)");
  }
  return {pos, neg};
}

void fill_rates(MetricsReport& r) {
  const auto& c = r.counts;
  r.roi_count = c.total();
  r.se = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  r.sp = c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
  r.acc = r.roi_count > 0 ? static_cast<double>(c.tp + c.tn) / static_cast<double>(r.roi_count) : 0.0;
}

double auc_of(std::vector<Sample> samples, Index pos, Index neg) {
  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.value < b.value; });
  // Sum of midranks (1-based) of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j].value == samples[i].value) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (samples[k].positive) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

}  // namespace

Mask binarize(const ResponseMap& response, const Mask& roi, double threshold) {
  check_sizes(response.rows(), response.cols(), roi, "roi");
  return roi && (response > threshold);
}

ConfusionCounts confusion(const Mask& predicted, const Mask& truth, const Mask& roi) {
  check_sizes(predicted.rows(), predicted.cols(), truth, "truth");
  check_sizes(predicted.rows(), predicted.cols(), roi, "roi");
  ConfusionCounts c;
  c.tp = (roi && predicted && truth).count();
  c.fp = (roi && predicted && !truth).count();
  c.fn = (roi && !predicted && truth).count();
  c.tn = (roi && !predicted && !truth).count();
  return c;
}

double auc(const ResponseMap& response, const Mask& truth, const Mask& roi) {
  auto samples = roi_samples(response, truth, roi);
  const auto [pos, neg] = class_counts(samples);
  return auc_of(std::move(samples), pos, neg);
}

MetricsReport evaluate_at(const ResponseMap& response, const Mask& truth, const Mask& roi, double threshold) {
  MetricsReport r;
  r.auc = auc(response, truth, roi);
  r.threshold = threshold;
  r.counts = confusion(binarize(response, roi, threshold), truth, roi);
  fill_rates(r);
  return r;
}

MetricsReport best_threshold(const ResponseMap& response, const Mask& truth, const Mask& roi) {
  auto samples = roi_samples(response, truth, roi);
  const auto [pos, neg] = class_counts(samples);

  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.value < b.value; });

  // Sweep thresholds upward. Start with t below the minimum: everything vessel.
  ConfusionCounts c{pos, neg, 0, 0};
  ConfusionCounts best = c;
  double best_t = std::nextafter(samples.front().value, -std::numeric_limits<double>::infinity());
  auto better = [](const ConfusionCounts& a, const ConfusionCounts& b) {
    // Higher accuracy first (same denominator), then higher specificity.
    if (a.tp + a.tn != b.tp + b.tn) return a.tp + a.tn > b.tp + b.tn;
    return a.tn > b.tn;
  };
  std::size_t i = 0;
  while (i < samples.size()) {
    const double t = samples[i].value;
    // Every sample equal to t flips to non-vessel.
    while (i < samples.size() && samples[i].value == t) {
      if (samples[i].positive) {
        --c.tp;
        ++c.fn;
      } else {
        --c.fp;
        ++c.tn;
      }
      ++i;
    }
    if (better(c, best)) {
      best = c;
      best_t = t;
    }
  }

  MetricsReport r;
  r.auc = auc_of(std::move(samples), pos, neg);
  r.threshold = best_t;
  r.counts = best;
  fill_rates(r);
  return r;
}

void write_report(std::ostream& out, const MetricsReport& report) {
  out << std::setprecision(17);
  out << "auc " << report.auc << '\n';
  out << "se " << report.se << '\n';
  out << "sp " << report.sp << '\n';
  out << "acc " << report.acc << '\n';
  out << "threshold " << report.threshold << '\n';
  out << "roi_count " << report.roi_count << '\n';
}

MetricsReport parse_report(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, value;
    if (ls >> key >> value) kv[key] = value;
  }
  auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError(std::string("metrics report is missing key '") + key + "'");
    return it->second;
  };
  MetricsReport r;
  r.auc = std::stod(get("auc"));
  r.se = std::stod(get("se"));
  r.sp = std::stod(get("sp"));
  r.acc = std::stod(get("acc"));
  r.threshold = std::stod(get("threshold"));
  r.roi_count = std::stoll(get("roi_count"));
  return r;
}

}  // namespace msld
