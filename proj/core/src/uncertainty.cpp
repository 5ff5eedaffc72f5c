#include "urn/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace urn {

void WeightConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("WeightConfig.threshold must lie in [0,1]");
  }
}

std::vector<GrayMap> variance_over_scales(const ScaledMaskStack& stack, VarianceMode mode) {
  const int N = stack.scale_count;
  if (N < 2) throw ValidationError("variance undefined for fewer than two scales");
  const std::size_t hw = static_cast<std::size_t>(stack.height) * stack.width;

  std::vector<GrayMap> out;
  out.reserve(stack.class_indices.size());
  std::vector<double> outcome(N);
  for (std::size_t ci = 0; ci < stack.class_indices.size(); ++ci) {
    const int target = stack.target_channels[ci];
    GrayMap var(stack.height, stack.width);
    for (std::size_t p = 0; p < hw; ++p) {
      double mean = 0.0;
      for (int n = 0; n < N; ++n) {
        const std::int32_t label = stack.mask(static_cast<int>(ci), n).labels()[p];
        outcome[n] = mode == VarianceMode::indicator ? (label == target ? 1.0 : 0.0)
                                                     : static_cast<double>(label);
        mean += outcome[n];
      }
      mean /= N;
      double ss = 0.0;
      for (int n = 0; n < N; ++n) {
        const double d = outcome[n] - mean;
        ss += d * d;
      }
      var.values()[p] = ss / (N - 1);
    }
    out.push_back(std::move(var));
  }
  return out;
}

GrayMap uncertainty_map(const std::vector<GrayMap>& variances) {
  if (variances.empty()) throw ValidationError("uncertainty_map needs at least one variance map");
  const int h = variances.front().height();
  const int w = variances.front().width();
  for (const GrayMap& v : variances) {
    if (v.height() != h || v.width() != w) {
      throw ValidationError("uncertainty_map: variance maps have mismatched dimensions");
    }
  }

  GrayMap u(h, w);
  const std::size_t hw = u.pixel_count();
  for (std::size_t p = 0; p < hw; ++p) {
    double m = variances.front().values()[p];
    for (std::size_t c = 1; c < variances.size(); ++c) {
      m = std::max(m, variances[c].values()[p]);
    }
    u.values()[p] = m;
  }

  const auto [lo_it, hi_it] = std::minmax_element(u.values().begin(), u.values().end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    std::fill(u.values().begin(), u.values().end(), 0.0);
    return u;
  }
  const double inv = 1.0 / (hi - lo);
  for (double& v : u.values()) v = (v - lo) * inv;
  return u;
}

GrayMap weight_mask(const GrayMap& u, const WeightConfig& cfg) {
  cfg.validate();
  u.validate_unit_range();
  const double t = cfg.threshold;
  GrayMap y(u.height(), u.width());
  for (std::size_t p = 0; p < u.pixel_count(); ++p) {
    const double w = 1.0 - u.values()[p];
    // W = 0 counts as uncertain even at t = 0, where the plain w >= t rule
    // would hand the fully-uncertain pixels full weight instead of dropping
    // them.
    y.values()[p] = (w >= t && w > 0.0) ? 1.0 : t;
  }
  return y;
}

}  // namespace urn
