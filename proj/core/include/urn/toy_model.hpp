#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "urn/densecrf.hpp"
#include "urn/types.hpp"

namespace urn {

/// Per-pixel feature dimension: RGB (3) + normalized position (2) +
/// 3x3 local mean and stddev per RGB channel (6).
inline constexpr int kFeatureDim = 11;

/// Row-major [pixel][feature] grid of per-pixel descriptors.
struct FeatureGrid {
  int height = 0, width = 0;
  std::vector<double> data;  // (H*W) x kFeatureDim

  const double* pixel(std::size_t p) const { return data.data() + p * kFeatureDim; }
};

/// Deterministic handcrafted features. Border windows clamp coordinates to
/// the image (edge replication), so every window has nine samples; the
/// stddev is the population one (divide by 9). Colors and window statistics
/// are scaled to [0,1]; positions are (row, col) / (H-1, W-1), 0 for
/// single-row or single-column images.
FeatureGrid extract_features(const RgbImage& img);

struct TrainConfig {
  double learning_rate = 2.0;
  int epochs = 30;
  int batch_size = 256;
  // L2 penalty applied in the update step (decoupled from the reported
  // loss). Keeps logits bounded so softmax probabilities stay calibrated;
  // the response-scaling loop needs soft boundaries to perturb.
  double weight_decay = 0.0;
  std::uint64_t seed = 1;
};

/// Per-pixel linear softmax classifier: the desk-scale segmentation model.
struct ToyModel {
  int num_classes = 0;
  std::vector<double> weights;  // num_classes x kFeatureDim, row-major
  std::vector<double> bias;     // num_classes

  void validate() const;
};

struct TrainSample {
  const RgbImage* image = nullptr;
  const LabelMask* target = nullptr;
  const GrayMap* loss_weights = nullptr;  // optional, defaults to 1 everywhere
};

struct TrainResult {
  ToyModel model;
  std::vector<double> epoch_loss;  // full-dataset mean weighted CE after each epoch
};

/// Minibatch SGD on the mean weighted cross-entropy. Single-threaded and
/// seeded: identical inputs and seed give a bit-identical parameter
/// trajectory. Absent loss weights take the same code path with weight 1.0,
/// so a weights-of-ones run matches a weights-absent run exactly.
TrainResult train(const std::vector<TrainSample>& dataset, int num_classes, const TrainConfig& config);

/// Per-pixel linear scores.
ScoreMap predict(const ToyModel& model, const RgbImage& img);
ScoreMap predict(const ToyModel& model, const FeatureGrid& features);

/// Teacher relabeling for pseudo-mask distillation: predict, optionally
/// CRF-refine, argmax. The resulting masks train student models.
std::vector<LabelMask> distill_relabel(const ToyModel& teacher, const std::vector<RgbImage>& images,
                                       const std::optional<CrfParams>& crf = std::nullopt,
                                       DenseCrf::Path crf_path = DenseCrf::Path::fast);

/// Versioned little-endian binary: magic "URNM", version u32, C u32,
/// feature dim u32, then weights row-major and biases as 64-bit floats.
void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

}  // namespace urn
