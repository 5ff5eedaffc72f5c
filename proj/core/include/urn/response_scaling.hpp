#pragma once

#include <vector>

#include "urn/densecrf.hpp"
#include "urn/types.hpp"

namespace urn {

enum class ScalePreset { voc, coco, custom };

/// The exponent set S applied to one class channel at a time to simulate
/// wider (s < 1) and narrower (s > 1) activation extents.
struct ScaleSet {
  std::vector<double> factors;
  ScalePreset preset = ScalePreset::custom;

  static ScaleSet voc();   // {0.15, 0.2, 0.25, 4, 5, 6}
  static ScaleSet coco();  // {0.4, 0.5, 0.6, 2, 3, 4}
  static ScaleSet custom_factors(std::vector<double> factors);

  void validate() const;  // needs >= 2 positive finite factors
};

/// Result of restricting a score map to the channels that appear in a mask.
struct ChannelSelection {
  ScoreMap scores;                  // C_sel x H x W, original values copied
  std::vector<int> channel_classes; // original class id per selected channel
};

/// Scaled pseudo-mask stack M_bar: one argmax mask per (appeared foreground
/// class, scale factor). Labels live in the restricted channel space
/// [0, channel_classes.size()).
struct ScaledMaskStack {
  std::vector<int> class_indices;      // appeared foreground classes (original ids)
  std::vector<int> target_channels;    // restricted channel index per class_indices entry
  std::vector<int> channel_classes;    // restricted -> original mapping (incl. background)
  int scale_count = 0;
  int height = 0, width = 0;
  // masks[c_bar * scale_count + n]
  std::vector<LabelMask> masks;

  const LabelMask& mask(int c_bar, int n) const { return masks[c_bar * scale_count + n]; }
};

/// Keeps background plus the classes present in m (the paper's "appeared
/// channels"). Values are copied untouched, so the selected map is generally
/// not renormalized; downstream argmax is unaffected and the CRF renormalizes
/// its input. Throws "empty pseudo-mask" if m is all ignore.
ChannelSelection select_channels(const ScoreMap& x, const LabelMask& m);

/// Raises one channel to the power s and renormalizes each pixel back to a
/// distribution. s = 1 returns the input bit-identically.
ScoreMap scale_channel(const ScoreMap& x, int channel, double s);

/// Options for building the stack. The CRF engine is built once per call and
/// shared across all (class, scale) slices.
struct StackOptions {
  bool use_crf = true;
  DenseCrf::Path crf_path = DenseCrf::Path::fast;
  // Softens the model's probabilities (p^(1/T), renormalized; equivalent to
  // dividing logits by T) before scaling. The loop needs responses that are
  // not saturated to move the argmax; deep backbones are soft already, the
  // desk-scale linear model is not. 1 = off.
  double temperature = 1.0;
};

/// For each appeared foreground class and each scale: scale that class's
/// channel, optionally CRF-refine, argmax over the restricted channels.
ScaledMaskStack build_scaled_mask_stack(const ScoreMap& x, const RgbImage& img, const LabelMask& m,
                                        const ScaleSet& scales, const CrfParams& crf,
                                        const StackOptions& opts = {});

}  // namespace urn
