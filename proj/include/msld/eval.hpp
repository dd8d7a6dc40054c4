#pragma once

#include "msld/error.hpp"
#include "msld/types.hpp"

#include <iosfwd>
#include <string>

namespace msld {

struct ConfusionCounts {
  Index tp = 0;
  Index fp = 0;
  Index tn = 0;
  Index fn = 0;

  Index total() const { return tp + fp + tn + fn; }
};

/// All metrics are restricted to the ROI.
struct MetricsReport {
  double auc = 0.0;
  double se = 0.0;   // tp / (tp + fn)
  double sp = 0.0;   // tn / (tn + fp)
  double acc = 0.0;  // (tp + tn) / N
  double threshold = 0.0;
  Index roi_count = 0;
  ConfusionCounts counts;
};

/// ROI pixel is vessel iff response > threshold; pixels outside the ROI are never vessel.
Mask binarize(const ResponseMap& response, const Mask& roi, double threshold);

ConfusionCounts confusion(const Mask& predicted, const Mask& truth, const Mask& roi);

/// Mann-Whitney U with midranks for ties; equals the trapezoidal ROC area.
/// Throws NumericError if the ROI holds only one class.
double auc(const ResponseMap& response, const Mask& truth, const Mask& roi);

/// SE/SP/ACC at a fixed threshold, plus the AUC.
MetricsReport evaluate_at(const ResponseMap& response, const Mask& truth, const Mask& roi, double threshold);

/// Threshold maximizing ACC over every distinct ROI response value (and one
/// threshold below the minimum, i.e. everything vessel); ties go to higher SP.
MetricsReport best_threshold(const ResponseMap& response, const Mask& truth, const Mask& roi);

/// Flat "key value" lines: auc, se, sp, acc, threshold, roi_count.
void write_report(std::ostream& out, const MetricsReport& report);
MetricsReport parse_report(std::istream& in);

}  // namespace msld
