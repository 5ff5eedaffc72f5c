#pragma once

#include <string>
#include <vector>

#include "urn/types.hpp"

namespace urn {

/// C x C pixel counts; rows are ground truth, columns prediction. Ignore
/// pixels are excluded. Accumulation is associative, so dataset-level
/// metrics can be reduced over images in any grouping.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  void add(const LabelMask& prediction, const LabelMask& ground_truth);
  void merge(const ConfusionMatrix& other);

  int num_classes() const { return num_classes_; }
  std::uint64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
  std::uint64_t total() const;

 private:
  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

struct IouReport {
  std::vector<double> per_class;     // NaN for classes absent from GT and prediction
  std::vector<bool> class_present;   // participated in the mean
  double mean = 0.0;
  std::uint64_t evaluated_pixels = 0;
};

/// Dataset-aggregated IoU: sum confusion counts over all images, then
/// IoU_c = TP / (TP + FP + FN). Classes with an empty union are skipped.
IouReport miou(const std::vector<LabelMask>& predictions, const std::vector<LabelMask>& ground_truths,
               int num_classes);
IouReport miou(const ConfusionMatrix& confusion);

/// Area under the ROC curve of u as a score for the noisy-pixel class,
/// rank-sum formulation with midrank tie handling. Throws on a degenerate
/// indicator (all clean or all noisy).
double noise_auroc(const GrayMap& u, const GrayMap& noise_indicator);

/// Human-readable lines followed by a machine-readable [metrics] key=value
/// block. Deterministic formatting (fixed 6-digit precision).
std::string format_iou_report(const IouReport& report, const std::string& title);

}  // namespace urn
