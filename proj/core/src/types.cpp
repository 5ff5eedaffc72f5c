#include "urn/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace urn {

namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) {
    throw ValidationError("map dimensions must be positive, got " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
}

}  // namespace

ScoreMap::ScoreMap(int classes, int height, int width, ScoreKind kind)
    : classes_(classes), height_(height), width_(width), kind_(kind),
      values_(static_cast<std::size_t>(classes) * height * width, 0.0) {
  check_dims(height, width);
  if (classes < 1) throw ValidationError("ScoreMap needs at least one class");
}

ScoreMap::ScoreMap(int classes, int height, int width, ScoreKind kind, std::vector<double> values)
    : classes_(classes), height_(height), width_(width), kind_(kind), values_(std::move(values)) {
  check_dims(height, width);
  if (classes < 1) throw ValidationError("ScoreMap needs at least one class");
  if (values_.size() != static_cast<std::size_t>(classes) * height * width) {
    throw ValidationError("ScoreMap value count does not match C*H*W");
  }
  validate();
}

void ScoreMap::validate() const {
  for (const double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("ScoreMap contains non-finite values");
    if (kind_ == ScoreKind::probabilities && (v < 0.0 || v > 1.0)) {
      throw ValidationError("probability ScoreMap contains values outside [0,1]");
    }
  }
}

bool ScoreMap::is_normalized(double tol) const {
  const std::size_t hw = pixel_count();
  for (std::size_t p = 0; p < hw; ++p) {
    double sum = 0.0;
    for (int c = 0; c < classes_; ++c) sum += values_[c * hw + p];
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

LabelMask::LabelMask(int height, int width, int num_classes, int ignore_value)
    : height_(height), width_(width), num_classes_(num_classes), ignore_value_(ignore_value),
      labels_(static_cast<std::size_t>(height) * width, 0) {
  check_dims(height, width);
  if (num_classes < 1) throw ValidationError("LabelMask needs at least one class");
}

LabelMask::LabelMask(int height, int width, int num_classes, std::vector<std::int32_t> labels,
                     int ignore_value)
    : height_(height), width_(width), num_classes_(num_classes), ignore_value_(ignore_value),
      labels_(std::move(labels)) {
  check_dims(height, width);
  if (num_classes < 1) throw ValidationError("LabelMask needs at least one class");
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("LabelMask label count does not match H*W");
  }
  validate();
}

void LabelMask::validate() const {
  for (const std::int32_t v : labels_) {
    if (v != ignore_value_ && (v < 0 || v >= num_classes_)) {
      throw ValidationError("LabelMask label " + std::to_string(v) + " outside [0," +
                            std::to_string(num_classes_) + ") and not the ignore value");
    }
  }
}

GrayMap::GrayMap(int height, int width, double fill)
    : height_(height), width_(width), values_(static_cast<std::size_t>(height) * width, fill) {
  check_dims(height, width);
}

GrayMap::GrayMap(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims(height, width);
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("GrayMap value count does not match H*W");
  }
  validate();
}

void GrayMap::validate() const {
  for (const double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("GrayMap contains non-finite values");
  }
}

void GrayMap::validate_unit_range() const {
  for (const double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("GrayMap value outside [0,1]");
  }
}

RgbImage::RgbImage(int height, int width)
    : height_(height), width_(width), pixels_(static_cast<std::size_t>(height) * width * 3, 0) {
  check_dims(height, width);
}

RgbImage::RgbImage(int height, int width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  check_dims(height, width);
  if (pixels_.size() != static_cast<std::size_t>(height) * width * 3) {
    throw ValidationError("RgbImage pixel count does not match H*W*3");
  }
}

ScoreMap softmax_over_classes(const ScoreMap& x) {
  if (x.kind() != ScoreKind::logits) throw ValidationError("softmax_over_classes expects logits");
  x.validate();
  const int C = x.classes();
  const std::size_t hw = x.pixel_count();
  ScoreMap out(C, x.height(), x.width(), ScoreKind::probabilities);
  const std::vector<double>& in = x.values();
  std::vector<double>& ov = out.values();
  for (std::size_t p = 0; p < hw; ++p) {
    double max_logit = in[p];
    for (int c = 1; c < C; ++c) max_logit = std::max(max_logit, in[c * hw + p]);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
      const double e = std::exp(in[c * hw + p] - max_logit);
      ov[c * hw + p] = e;
      sum += e;
    }
    for (int c = 0; c < C; ++c) ov[c * hw + p] /= sum;
  }
  return out;
}

LabelMask argmax_over_classes(const ScoreMap& x) {
  const int C = x.classes();
  const std::size_t hw = x.pixel_count();
  LabelMask out(x.height(), x.width(), C);
  const std::vector<double>& in = x.values();
  for (std::size_t p = 0; p < hw; ++p) {
    int best = 0;
    double best_v = in[p];
    for (int c = 1; c < C; ++c) {
      const double v = in[c * hw + p];
      if (v > best_v) {  // strict: ties keep the lowest index
        best_v = v;
        best = c;
      }
    }
    out.labels()[p] = best;
  }
  return out;
}

std::vector<int> present_classes(const LabelMask& m, bool include_background) {
  std::set<int> seen;
  for (const std::int32_t v : m.labels()) {
    if (v == m.ignore_value()) continue;
    if (v == 0 && !include_background) continue;
    seen.insert(v);
  }
  return std::vector<int>(seen.begin(), seen.end());
}

}  // namespace urn
