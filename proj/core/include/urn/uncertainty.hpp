#pragma once

#include <vector>

#include "urn/response_scaling.hpp"
#include "urn/types.hpp"

namespace urn {

enum class VarianceMode {
  // Per-class membership outcome in {0,1}: invariant to class numbering.
  indicator,
  // The raw restricted argmax label as the outcome, the literal reading of
  // the variance formula; depends on channel ordering.
  raw_label,
};

struct WeightConfig {
  double threshold = 0.05;  // t; weights become {t, 1}
  VarianceMode variance_mode = VarianceMode::indicator;

  void validate() const;
};

/// Per-class sample variance over the N scale outcomes (1/(N-1) divisor).
/// Returns one H x W variance map per appeared foreground class.
std::vector<GrayMap> variance_over_scales(const ScaledMaskStack& stack,
                                          VarianceMode mode = VarianceMode::indicator);

/// Class-agnostic uncertainty: per-pixel max over the class variance maps,
/// then min-max normalized over the image to [0,1]. A constant map (max ==
/// min) normalizes to all zeros: no disagreement means fully certain.
GrayMap uncertainty_map(const std::vector<GrayMap>& variances);

/// W = 1 - U, then Y = 1 where W >= t else t. Output values are exactly
/// members of {t, 1}.
GrayMap weight_mask(const GrayMap& u, const WeightConfig& cfg);

}  // namespace urn
