#include "urn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace urn {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw ValidationError("ConfusionMatrix needs at least one class");
}

void ConfusionMatrix::add(const LabelMask& prediction, const LabelMask& ground_truth) {
  if (prediction.height() != ground_truth.height() || prediction.width() != ground_truth.width()) {
    throw ValidationError("confusion: prediction and ground truth dimensions differ");
  }
  for (std::size_t p = 0; p < prediction.pixel_count(); ++p) {
    const std::int32_t gt = ground_truth.labels()[p];
    const std::int32_t pr = prediction.labels()[p];
    if (gt == ground_truth.ignore_value() || pr == prediction.ignore_value()) continue;
    if (gt >= num_classes_ || pr >= num_classes_) {
      throw ValidationError("confusion: label outside the configured class count");
    }
    ++counts_[static_cast<std::size_t>(gt) * num_classes_ + pr];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw ValidationError("confusion: merging matrices with different class counts");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

IouReport miou(const ConfusionMatrix& confusion) {
  const int C = confusion.num_classes();
  IouReport report;
  report.per_class.assign(C, std::numeric_limits<double>::quiet_NaN());
  report.class_present.assign(C, false);
  report.evaluated_pixels = confusion.total();

  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < C; ++c) {
    const std::uint64_t tp = confusion.at(c, c);
    std::uint64_t fp = 0, fn = 0;
    for (int o = 0; o < C; ++o) {
      if (o == c) continue;
      fp += confusion.at(o, c);
      fn += confusion.at(c, o);
    }
    const std::uint64_t uni = tp + fp + fn;
    if (uni == 0) continue;  // absent from GT and prediction: skip, no 0/0
    report.per_class[c] = static_cast<double>(tp) / static_cast<double>(uni);
    report.class_present[c] = true;
    sum += report.per_class[c];
    ++counted;
  }
  if (counted == 0) throw ValidationError("miou: no class present in GT or predictions");
  report.mean = sum / counted;
  return report;
}

IouReport miou(const std::vector<LabelMask>& predictions,
               const std::vector<LabelMask>& ground_truths, int num_classes) {
  if (predictions.empty() || predictions.size() != ground_truths.size()) {
    throw ValidationError("miou: need equally many predictions and ground truths, at least one");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) cm.add(predictions[i], ground_truths[i]);
  return miou(cm);
}

double noise_auroc(const GrayMap& u, const GrayMap& noise_indicator) {
  if (u.height() != noise_indicator.height() || u.width() != noise_indicator.width()) {
    throw ValidationError("noise_auroc: map dimensions differ");
  }
  const std::size_t n = u.pixel_count();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = noise_indicator.values()[i];
    if (v != 0.0 && v != 1.0) throw ValidationError("noise_auroc: indicator must be binary");
    idx[i] = i;
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return u.values()[a] < u.values()[b];
  });

  // Midranks over tie groups; rank sum of the positive (noisy) pixels.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && u.values()[idx[j]] == u.values()[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (noise_indicator.values()[idx[k]] == 1.0) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("noise_auroc: indicator is degenerate (all clean or all noisy)");
  }
  const double np = static_cast<double>(positives), nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::string format_iou_report(const IouReport& report, const std::string& title) {
  std::string out = title + "\n";
  char buf[128];
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    if (!report.class_present[c]) {
      std::snprintf(buf, sizeof(buf), "  class %2zu  IoU --\n", c);
    } else {
      std::snprintf(buf, sizeof(buf), "  class %2zu  IoU %.6f\n", c, report.per_class[c]);
    }
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "  mIoU %.6f over %llu pixels\n", report.mean,
                static_cast<unsigned long long>(report.evaluated_pixels));
  out += buf;

  out += "[metrics]\n";
  std::snprintf(buf, sizeof(buf), "miou = %.6f\n", report.mean);
  out += buf;
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    if (!report.class_present[c]) continue;
    std::snprintf(buf, sizeof(buf), "iou_class_%zu = %.6f\n", c, report.per_class[c]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "evaluated_pixels = %llu\n",
                static_cast<unsigned long long>(report.evaluated_pixels));
  out += buf;
  return out;
}

}  // namespace urn
