#pragma once

#include <optional>

#include "urn/types.hpp"

namespace urn {

struct LossReport {
  GrayMap per_pixel;            // loss per pixel, 0 on ignore pixels
  double mean = 0.0;            // sum(per_pixel) / count(non-ignored)
  double weighted_pixel_count = 0.0;  // sum of weights over non-ignored pixels

  explicit LossReport(int height, int width) : per_pixel(height, width) {}
};

/// Per pixel: L = -Y * log(softmax(x)[target]), probabilities floored at
/// 1e-12 inside the log. Ignore-labeled pixels contribute 0 and are excluded
/// from the mean; the mean divides by the non-ignored pixel count (so Y == 1
/// reproduces plain cross-entropy exactly). Throws "empty target" when every
/// pixel is ignored.
LossReport weighted_cross_entropy(const ScoreMap& x, const LabelMask& target, const GrayMap& y);

/// Gradient of the mean weighted cross-entropy with respect to the logits:
/// d/dz_c = Y * (softmax(x)_c - [c == target]) / count(non-ignored).
/// Returned as a logits-kind ScoreMap of the same shape as x.
ScoreMap weighted_cross_entropy_grad(const ScoreMap& x, const LabelMask& target, const GrayMap& y);

/// The probability-reweight ablation baseline: weight = softmax(x)[target]
/// per pixel, detached (no gradient flows through it). Ignore pixels get 0.
GrayMap probability_weights(const ScoreMap& x, const LabelMask& target);

}  // namespace urn
