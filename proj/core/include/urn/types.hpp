#pragma once

#include <cstdint>
#include <vector>

#include "urn/common.hpp"

namespace urn {

/// Label value reserved for "do not evaluate / do not train" pixels,
/// following the VOC mask convention.
inline constexpr int kIgnoreLabel = 255;

enum class ScoreKind { logits, probabilities };

/// Dense C x H x W per-class score tensor for one image. `kind` records
/// whether the values are raw logits or per-pixel probabilities.
///
/// Probability maps produced by softmax_over_classes or the CRF sum to one
/// per pixel. Channel-selected sub-maps (response scaling) keep their
/// original values, so their pixel sums can be below one; consumers that
/// need a proper distribution renormalize.
class ScoreMap {
 public:
  ScoreMap(int classes, int height, int width, ScoreKind kind);
  ScoreMap(int classes, int height, int width, ScoreKind kind, std::vector<double> values);

  int classes() const { return classes_; }
  int height() const { return height_; }
  int width() const { return width_; }
  ScoreKind kind() const { return kind_; }

  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Finiteness always; [0,1] range when kind is probabilities.
  void validate() const;
  /// True when every pixel's class column sums to 1 within tol.
  bool is_normalized(double tol = 1e-6) const;

 private:
  int classes_, height_, width_;
  ScoreKind kind_;
  std::vector<double> values_;
};

/// H x W integer class labels with an ignore sentinel.
class LabelMask {
 public:
  LabelMask(int height, int width, int num_classes, int ignore_value = kIgnoreLabel);
  LabelMask(int height, int width, int num_classes, std::vector<std::int32_t> labels,
            int ignore_value = kIgnoreLabel);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }
  int ignore_value() const { return ignore_value_; }

  std::int32_t at(int y, int x) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::int32_t& at(int y, int x) { return labels_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<std::int32_t>& labels() const { return labels_; }
  std::vector<std::int32_t>& labels() { return labels_; }
  std::size_t pixel_count() const { return labels_.size(); }

  void validate() const;

 private:
  int height_, width_, num_classes_, ignore_value_;
  std::vector<std::int32_t> labels_;
};

/// H x W real-valued map. Holds uncertainty, weights, per-pixel losses and
/// variance slices; the [0,1] range required by the uncertainty/weight roles
/// is checked by the operations that need it, not by the type.
class GrayMap {
 public:
  GrayMap(int height, int width, double fill = 0.0);
  GrayMap(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }

  double at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int y, int x) { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  std::size_t pixel_count() const { return values_.size(); }

  void validate() const;
  /// Throws unless every value lies in [0, 1] (weight / uncertainty roles).
  void validate_unit_range() const;

 private:
  int height_, width_;
  std::vector<double> values_;
};

/// H x W x 3 8-bit color image, interleaved RGB, row-major.
class RgbImage {
 public:
  RgbImage(int height, int width);
  RgbImage(int height, int width, std::vector<std::uint8_t> pixels);

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint8_t at(int y, int x, int ch) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + ch];
  }
  std::uint8_t& at(int y, int x, int ch) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + ch];
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

 private:
  int height_, width_;
  std::vector<std::uint8_t> pixels_;
};

/// Per-pixel softmax, stabilized by subtracting each pixel's max logit.
ScoreMap softmax_over_classes(const ScoreMap& x);

/// Per-pixel argmax over classes. Ties break to the lowest class index so
/// results are bit-reproducible across platforms.
LabelMask argmax_over_classes(const ScoreMap& x);

/// Sorted unique labels occurring in m, excluding the ignore sentinel.
/// Class 0 (background) is excluded unless include_background is set.
std::vector<int> present_classes(const LabelMask& m, bool include_background = false);

}  // namespace urn
