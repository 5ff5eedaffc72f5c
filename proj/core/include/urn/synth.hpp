#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "urn/types.hpp"

namespace urn {

/// Controlled desk-scale segmentation dataset: textured background plus
/// colored geometric shapes (rect / circle / triangle keyed to class).
struct SynthConfig {
  int count = 50;
  int height = 64;
  int width = 64;
  int shape_classes = 3;  // classes 1..K; class 0 is background
  int shapes_min = 2;
  int shapes_max = 4;
  double color_jitter = 8.0;        // stddev of per-shape color offset, 8-bit units
  double texture_amplitude = 10.0;  // stddev of per-pixel background noise, 8-bit units
  std::uint64_t seed = 1;

  int num_classes() const { return shape_classes + 1; }
  void validate() const;
};

enum class NoiseMode { dilate, erode, mixed };

/// Morphological corruption of ground truth: dilation grows objects over
/// background (false positives, the wide-response regime), erosion shrinks
/// them (missing positives, the narrow-response regime).
struct NoiseSpec {
  NoiseMode mode = NoiseMode::mixed;
  int radius = 2;          // Chebyshev radius of the square structuring element
  double fraction = 0.5;   // share of object instances perturbed
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthImage {
  RgbImage image;
  LabelMask ground_truth;
};

/// Seeded, byte-deterministic generation. Shapes are placed fully inside the
/// image; later shapes occlude earlier ones.
std::vector<SynthImage> generate(const SynthConfig& cfg);

struct NoisyMask {
  LabelMask noisy;
  GrayMap noise_indicator;  // exactly the pixels whose label changed, as 0/1
};

/// Object instances are 4-connected components per foreground class, found in
/// scan order. A seeded shuffle picks round(fraction * count) of them; mixed
/// mode alternates dilate/erode over the selection. Dilation claims only
/// background pixels; erosion only removes the instance's own pixels.
NoisyMask inject_noise(const LabelMask& gt, const NoiseSpec& spec);

}  // namespace urn
