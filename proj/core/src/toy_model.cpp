#include "urn/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "urn/rng.hpp"

namespace urn {

FeatureGrid extract_features(const RgbImage& img) {
  const int h = img.height(), w = img.width();
  FeatureGrid grid;
  grid.height = h;
  grid.width = w;
  grid.data.resize(static_cast<std::size_t>(h) * w * kFeatureDim);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* f = grid.data.data() + (static_cast<std::size_t>(y) * w + x) * kFeatureDim;
      for (int c = 0; c < 3; ++c) f[c] = img.at(y, x, c) / 255.0;
      f[3] = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
      f[4] = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0, sum_sq = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            const double v = img.at(yy, xx, c) / 255.0;
            sum += v;
            sum_sq += v * v;
          }
        }
        const double mean = sum / 9.0;
        const double var = std::max(0.0, sum_sq / 9.0 - mean * mean);
        f[5 + c] = mean;
        f[8 + c] = std::sqrt(var);
      }
    }
  }
  return grid;
}

void ToyModel::validate() const {
  if (num_classes < 1) throw ValidationError("ToyModel needs at least one class");
  if (weights.size() != static_cast<std::size_t>(num_classes) * kFeatureDim ||
      bias.size() != static_cast<std::size_t>(num_classes)) {
    throw ValidationError("ToyModel parameter shapes inconsistent with class count");
  }
  for (const double v : weights) {
    if (!std::isfinite(v)) throw ValidationError("ToyModel weights contain non-finite values");
  }
  for (const double v : bias) {
    if (!std::isfinite(v)) throw ValidationError("ToyModel bias contains non-finite values");
  }
}

namespace {

struct FlatSample {
  std::uint32_t image;
  std::uint32_t pixel;
  std::int32_t label;
  double weight;
};

// Forward pass for one sample; returns softmax probabilities.
inline void sample_softmax(const ToyModel& m, const double* f, std::vector<double>& probs) {
  const int C = m.num_classes;
  double max_z = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < C; ++c) {
    double z = m.bias[c];
    const double* row = m.weights.data() + static_cast<std::size_t>(c) * kFeatureDim;
    for (int k = 0; k < kFeatureDim; ++k) z += row[k] * f[k];
    probs[c] = z;
    max_z = std::max(max_z, z);
  }
  double sum = 0.0;
  for (int c = 0; c < C; ++c) {
    probs[c] = std::exp(probs[c] - max_z);
    sum += probs[c];
  }
  for (int c = 0; c < C; ++c) probs[c] /= sum;
}

}  // namespace

TrainResult train(const std::vector<TrainSample>& dataset, int num_classes,
                  const TrainConfig& config) {
  if (dataset.empty()) throw ValidationError("train: empty dataset");
  if (num_classes < 1) throw ValidationError("train: need at least one class");
  if (config.learning_rate <= 0 || config.epochs < 0 || config.batch_size < 1 ||
      config.weight_decay < 0 || config.learning_rate * config.weight_decay >= 1.0) {
    throw ValidationError("train: bad config");
  }

  // Precompute features and flatten the supervised pixels.
  std::vector<FeatureGrid> grids;
  grids.reserve(dataset.size());
  std::vector<FlatSample> samples;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const TrainSample& s = dataset[i];
    if (s.image == nullptr || s.target == nullptr) throw ValidationError("train: null sample");
    if (s.image->height() != s.target->height() || s.image->width() != s.target->width()) {
      throw ValidationError("train: image and target dimensions differ");
    }
    if (s.loss_weights != nullptr && (s.loss_weights->height() != s.image->height() ||
                                      s.loss_weights->width() != s.image->width())) {
      throw ValidationError("train: weight map dimensions differ");
    }
    grids.push_back(extract_features(*s.image));
    const std::size_t hw = s.target->pixel_count();
    for (std::size_t p = 0; p < hw; ++p) {
      const std::int32_t t = s.target->labels()[p];
      if (t == s.target->ignore_value()) continue;
      if (t >= num_classes) {
        throw ValidationError("train: target label " + std::to_string(t) + " >= class count");
      }
      const double w = s.loss_weights != nullptr ? s.loss_weights->values()[p] : 1.0;
      samples.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p), t, w});
    }
  }
  if (samples.empty()) throw ValidationError("train: all targets ignored");

  ToyModel model;
  model.num_classes = num_classes;
  model.weights.assign(static_cast<std::size_t>(num_classes) * kFeatureDim, 0.0);
  model.bias.assign(num_classes, 0.0);

  Rng rng(config.seed);
  const int C = num_classes;
  std::vector<double> probs(C);
  std::vector<double> grad_w(static_cast<std::size_t>(C) * kFeatureDim);
  std::vector<double> grad_b(C);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(samples);
    for (std::size_t start = 0; start < samples.size(); start += config.batch_size) {
      const std::size_t end = std::min(samples.size(), start + config.batch_size);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      for (std::size_t si = start; si < end; ++si) {
        const FlatSample& s = samples[si];
        const double* f = grids[s.image].pixel(s.pixel);
        sample_softmax(model, f, probs);
        for (int c = 0; c < C; ++c) {
          const double g = s.weight * (probs[c] - (c == s.label ? 1.0 : 0.0));
          grad_b[c] += g;
          double* row = grad_w.data() + static_cast<std::size_t>(c) * kFeatureDim;
          for (int k = 0; k < kFeatureDim; ++k) row[k] += g * f[k];
        }
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = 0; k < model.weights.size(); ++k) model.weights[k] -= step * grad_w[k];
      for (int c = 0; c < C; ++c) model.bias[c] -= step * grad_b[c];
      if (config.weight_decay > 0.0) {
        const double keep = 1.0 - config.learning_rate * config.weight_decay;
        for (double& w : model.weights) w *= keep;
      }
    }

    // Full-pass mean weighted loss for the curve.
    double total = 0.0;
    for (const FlatSample& s : samples) {
      sample_softmax(model, grids[s.image].pixel(s.pixel), probs);
      total += -s.weight * std::log(std::max(probs[s.label], 1e-12));
    }
    result.epoch_loss.push_back(total / static_cast<double>(samples.size()));
  }

  result.model = std::move(model);
  return result;
}

ScoreMap predict(const ToyModel& model, const FeatureGrid& features) {
  model.validate();
  const int C = model.num_classes;
  const std::size_t hw = static_cast<std::size_t>(features.height) * features.width;
  ScoreMap out(C, features.height, features.width, ScoreKind::logits);
  for (std::size_t p = 0; p < hw; ++p) {
    const double* f = features.pixel(p);
    for (int c = 0; c < C; ++c) {
      double z = model.bias[c];
      const double* row = model.weights.data() + static_cast<std::size_t>(c) * kFeatureDim;
      for (int k = 0; k < kFeatureDim; ++k) z += row[k] * f[k];
      out.values()[c * hw + p] = z;
    }
  }
  return out;
}

ScoreMap predict(const ToyModel& model, const RgbImage& img) {
  return predict(model, extract_features(img));
}

std::vector<LabelMask> distill_relabel(const ToyModel& teacher, const std::vector<RgbImage>& images,
                                       const std::optional<CrfParams>& crf, DenseCrf::Path crf_path) {
  std::vector<LabelMask> out;
  out.reserve(images.size());
  for (const RgbImage& img : images) {
    ScoreMap probs = softmax_over_classes(predict(teacher, img));
    if (crf.has_value()) probs = DenseCrf(img, *crf, crf_path).refine(probs);
    out.push_back(argmax_over_classes(probs));
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'U', 'R', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ofstream& f, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  f.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::ifstream& f) {
  unsigned char b[8];
  f.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_model(const ToyModel& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file for writing: " + path.string());
  f.write(kMagic, 4);
  write_u32(f, kVersion);
  write_u32(f, static_cast<std::uint32_t>(model.num_classes));
  write_u32(f, static_cast<std::uint32_t>(kFeatureDim));
  for (const double v : model.weights) write_f64(f, v);
  for (const double v : model.bias) write_f64(f, v);
  if (!f) throw IoError("failed writing model file: " + path.string());
}

ToyModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file: " + path.string());
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a URN model file (bad magic): " + path.string());
  }
  const std::uint32_t version = read_u32(f);
  if (version != kVersion) {
    throw IoError("unsupported model version " + std::to_string(version) + ": " + path.string());
  }
  const std::uint32_t classes = read_u32(f);
  const std::uint32_t dim = read_u32(f);
  if (dim != static_cast<std::uint32_t>(kFeatureDim)) {
    throw IoError("model feature dimension " + std::to_string(dim) + " does not match " +
                  std::to_string(kFeatureDim));
  }
  ToyModel model;
  model.num_classes = static_cast<int>(classes);
  model.weights.resize(static_cast<std::size_t>(classes) * kFeatureDim);
  model.bias.resize(classes);
  for (double& v : model.weights) v = read_f64(f);
  for (double& v : model.bias) v = read_f64(f);
  if (!f) throw IoError("truncated model file: " + path.string());
  model.validate();
  return model;
}

}  // namespace urn
