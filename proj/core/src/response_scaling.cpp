#include "urn/response_scaling.hpp"

#include <algorithm>
#include <cmath>

namespace urn {

ScaleSet ScaleSet::voc() { return {{0.15, 0.2, 0.25, 4.0, 5.0, 6.0}, ScalePreset::voc}; }

ScaleSet ScaleSet::coco() { return {{0.4, 0.5, 0.6, 2.0, 3.0, 4.0}, ScalePreset::coco}; }

ScaleSet ScaleSet::custom_factors(std::vector<double> factors) {
  ScaleSet s{std::move(factors), ScalePreset::custom};
  s.validate();
  return s;
}

void ScaleSet::validate() const {
  if (factors.size() < 2) {
    throw ValidationError("ScaleSet needs at least two factors (variance needs N-1 > 0)");
  }
  for (const double f : factors) {
    if (!std::isfinite(f) || f <= 0.0) {
      throw ValidationError("ScaleSet factors must be finite and > 0");
    }
  }
}

ChannelSelection select_channels(const ScoreMap& x, const LabelMask& m) {
  if (x.height() != m.height() || x.width() != m.width()) {
    throw ValidationError("select_channels: score map and mask dimensions differ");
  }
  bool any = false;
  for (const std::int32_t v : m.labels()) {
    if (v == m.ignore_value()) continue;
    any = true;
    if (v >= x.classes()) {
      throw ValidationError("select_channels: mask label " + std::to_string(v) +
                            " has no channel in a " + std::to_string(x.classes()) + "-class map");
    }
  }
  if (!any) throw ValidationError("empty pseudo-mask");

  // Background first so argmax always has a competitor, then the appeared
  // foreground classes in ascending order.
  std::vector<int> channels{0};
  for (const int c : present_classes(m, /*include_background=*/false)) channels.push_back(c);

  const std::size_t hw = x.pixel_count();
  ScoreMap sub(static_cast<int>(channels.size()), x.height(), x.width(), x.kind());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const double* src = x.values().data() + static_cast<std::size_t>(channels[k]) * hw;
    std::copy(src, src + hw, sub.values().data() + k * hw);
  }
  return {std::move(sub), std::move(channels)};
}

ScoreMap scale_channel(const ScoreMap& x, int channel, double s) {
  if (x.kind() != ScoreKind::probabilities) {
    throw ValidationError("scale_channel expects a probability map");
  }
  if (channel < 0 || channel >= x.classes()) {
    throw ValidationError("scale_channel: channel index out of range");
  }
  if (!std::isfinite(s) || s <= 0.0) {
    throw ValidationError("scale_channel: scale factor must be finite and > 0");
  }
  if (s == 1.0) return x;  // identity exponent, bit-exact

  const int C = x.classes();
  const std::size_t hw = x.pixel_count();
  ScoreMap out = x;
  for (std::size_t p = 0; p < hw; ++p) {
    double& target = out.values()[static_cast<std::size_t>(channel) * hw + p];
    target = std::pow(target, s);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) sum += out.values()[c * hw + p];
    if (sum > 0.0) {
      for (int c = 0; c < C; ++c) out.values()[c * hw + p] /= sum;
    }
  }
  return out;
}

ScaledMaskStack build_scaled_mask_stack(const ScoreMap& x, const RgbImage& img, const LabelMask& m,
                                        const ScaleSet& scales, const CrfParams& crf,
                                        const StackOptions& opts) {
  scales.validate();
  if (img.height() != x.height() || img.width() != x.width()) {
    throw ValidationError("build_scaled_mask_stack: image and score map dimensions differ");
  }

  if (!(opts.temperature > 0.0) || !std::isfinite(opts.temperature)) {
    throw ValidationError("build_scaled_mask_stack: temperature must be finite and > 0");
  }

  // Softmax over the full class space first: the scaling exponent is not
  // invariant to the normalizing constant, so selecting before softmax would
  // change the scaled distributions.
  ChannelSelection sel = x.kind() == ScoreKind::logits ? select_channels(softmax_over_classes(x), m)
                                                       : select_channels(x, m);
  ScoreMap probs = std::move(sel.scores);

  if (opts.temperature != 1.0) {
    const int C = probs.classes();
    const std::size_t hw = probs.pixel_count();
    const double inv_t = 1.0 / opts.temperature;
    for (std::size_t p = 0; p < hw; ++p) {
      double sum = 0.0;
      for (int c = 0; c < C; ++c) {
        double& v = probs.values()[c * hw + p];
        v = std::pow(v, inv_t);
        sum += v;
      }
      if (sum > 0.0) {
        for (int c = 0; c < C; ++c) probs.values()[c * hw + p] /= sum;
      }
    }
  }

  const std::vector<int> foreground = present_classes(m, /*include_background=*/false);
  if (foreground.empty()) throw ValidationError("empty foreground: no class to scale");

  ScaledMaskStack stack;
  stack.class_indices = foreground;
  stack.channel_classes = sel.channel_classes;
  stack.scale_count = static_cast<int>(scales.factors.size());
  stack.height = x.height();
  stack.width = x.width();
  for (const int cls : foreground) {
    const auto it = std::find(sel.channel_classes.begin(), sel.channel_classes.end(), cls);
    stack.target_channels.push_back(static_cast<int>(it - sel.channel_classes.begin()));
  }

  std::unique_ptr<DenseCrf> engine;
  if (opts.use_crf) engine = std::make_unique<DenseCrf>(img, crf, opts.crf_path);

  stack.masks.reserve(foreground.size() * scales.factors.size());
  for (std::size_t ci = 0; ci < foreground.size(); ++ci) {
    for (const double s : scales.factors) {
      ScoreMap scaled = scale_channel(probs, stack.target_channels[ci], s);
      if (engine) scaled = engine->refine(scaled);
      stack.masks.push_back(argmax_over_classes(scaled));
    }
  }
  return stack;
}

}  // namespace urn
