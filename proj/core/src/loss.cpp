#include "urn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace urn {

namespace {

constexpr double kLogFloor = 1e-12;

void check_shapes(const ScoreMap& x, const LabelMask& target) {
  if (x.height() != target.height() || x.width() != target.width()) {
    throw ValidationError("loss: score map and target mask dimensions differ");
  }
  for (const std::int32_t v : target.labels()) {
    if (v != target.ignore_value() && v >= x.classes()) {
      throw ValidationError("loss: target label " + std::to_string(v) +
                            " has no channel in the score map");
    }
  }
}

}  // namespace

LossReport weighted_cross_entropy(const ScoreMap& x, const LabelMask& target, const GrayMap& y) {
  check_shapes(x, target);
  if (y.height() != x.height() || y.width() != x.width()) {
    throw ValidationError("loss: weight map dimensions differ");
  }
  if (x.kind() != ScoreKind::logits) throw ValidationError("weighted_cross_entropy expects logits");

  const ScoreMap p = softmax_over_classes(x);
  const std::size_t hw = x.pixel_count();
  LossReport report(x.height(), x.width());
  std::size_t counted = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < hw; ++i) {
    const std::int32_t t = target.labels()[i];
    if (t == target.ignore_value()) continue;
    const double pt = std::max(p.values()[static_cast<std::size_t>(t) * hw + i], kLogFloor);
    const double l = -y.values()[i] * std::log(pt);
    report.per_pixel.values()[i] = l;
    total += l;
    report.weighted_pixel_count += y.values()[i];
    ++counted;
  }
  if (counted == 0) throw ValidationError("empty target: every pixel is ignored");
  report.mean = total / static_cast<double>(counted);
  return report;
}

ScoreMap weighted_cross_entropy_grad(const ScoreMap& x, const LabelMask& target, const GrayMap& y) {
  check_shapes(x, target);
  if (y.height() != x.height() || y.width() != x.width()) {
    throw ValidationError("loss: weight map dimensions differ");
  }
  if (x.kind() != ScoreKind::logits) throw ValidationError("weighted_cross_entropy_grad expects logits");

  const ScoreMap p = softmax_over_classes(x);
  const std::size_t hw = x.pixel_count();
  const int C = x.classes();
  std::size_t counted = 0;
  for (std::size_t i = 0; i < hw; ++i) {
    if (target.labels()[i] != target.ignore_value()) ++counted;
  }
  if (counted == 0) throw ValidationError("empty target: every pixel is ignored");

  ScoreMap grad(C, x.height(), x.width(), ScoreKind::logits);
  const double inv_count = 1.0 / static_cast<double>(counted);
  for (std::size_t i = 0; i < hw; ++i) {
    const std::int32_t t = target.labels()[i];
    if (t == target.ignore_value()) continue;
    const double w = y.values()[i] * inv_count;
    for (int c = 0; c < C; ++c) {
      const double indicator = c == t ? 1.0 : 0.0;
      grad.values()[c * hw + i] = w * (p.values()[c * hw + i] - indicator);
    }
  }
  return grad;
}

GrayMap probability_weights(const ScoreMap& x, const LabelMask& target) {
  check_shapes(x, target);
  const ScoreMap p = x.kind() == ScoreKind::logits ? softmax_over_classes(x) : x;
  const std::size_t hw = x.pixel_count();
  GrayMap w(x.height(), x.width());
  for (std::size_t i = 0; i < hw; ++i) {
    const std::int32_t t = target.labels()[i];
    w.values()[i] = t == target.ignore_value()
                        ? 0.0
                        : p.values()[static_cast<std::size_t>(t) * hw + i];
  }
  return w;
}

}  // namespace urn
