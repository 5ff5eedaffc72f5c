#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "urn/rng.hpp"
#include "urn/synth.hpp"
#include "urn/toy_model.hpp"

using namespace urn;

namespace {

// Two-class color dataset that a linear model separates easily: left half
// dark, right half bright, labels follow the split.
std::vector<SynthImage> separable_fixture(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SynthImage> out;
  for (int i = 0; i < count; ++i) {
    const int H = 16, W = 16;
    RgbImage img(H, W);
    LabelMask gt(H, W, 2);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const bool bright = x >= W / 2;
        for (int c = 0; c < 3; ++c) {
          const int base = bright ? 200 : 60;
          img.at(y, x, c) =
              static_cast<std::uint8_t>(std::clamp<int>(base + static_cast<int>(rng.next_below(21)) - 10, 0, 255));
        }
        gt.at(y, x) = bright ? 1 : 0;
      }
    }
    out.push_back({std::move(img), std::move(gt)});
  }
  return out;
}

double pixel_accuracy(const ToyModel& m, const std::vector<SynthImage>& data) {
  std::size_t hit = 0, total = 0;
  for (const auto& [img, gt] : data) {
    const LabelMask pred = argmax_over_classes(predict(m, img));
    for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
      hit += pred.labels()[i] == gt.labels()[i];
      ++total;
    }
  }
  return static_cast<double>(hit) / total;
}

}  // namespace

TEST_CASE("extract_features: constant image has zero local stddev") {
  RgbImage img(4, 4);
  for (auto& v : img.pixels()) v = 77;
  const FeatureGrid f = extract_features(img);
  for (std::size_t p = 0; p < 16; ++p) {
    CHECK(f.pixel(p)[8] == 0.0);
    CHECK(f.pixel(p)[9] == 0.0);
    CHECK(f.pixel(p)[10] == 0.0);
    CHECK(f.pixel(p)[5] == doctest::Approx(77.0 / 255.0).epsilon(1e-12));
  }
}

TEST_CASE("extract_features: corner position features") {
  RgbImage img(5, 7);
  const FeatureGrid f = extract_features(img);
  CHECK(f.pixel(0)[3] == 0.0);
  CHECK(f.pixel(0)[4] == 0.0);
  CHECK(f.pixel(5 * 7 - 1)[3] == 1.0);
  CHECK(f.pixel(5 * 7 - 1)[4] == 1.0);
}

TEST_CASE("extract_features: window statistics match a loop oracle") {
  Rng rng(5);
  RgbImage img(5, 5);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.next_below(256));
  const FeatureGrid f = extract_features(img);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      for (int c = 0; c < 3; ++c) {
        // clamped 3x3 window, population stddev
        double sum = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, 4), xx = std::clamp(x + dx, 0, 4);
            sum += img.at(yy, xx, c) / 255.0;
          }
        }
        const double mean = sum / 9.0;
        double ss = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, 4), xx = std::clamp(x + dx, 0, 4);
            const double v = img.at(yy, xx, c) / 255.0;
            ss += (v - mean) * (v - mean);
          }
        }
        const double* feat = f.pixel(static_cast<std::size_t>(y) * 5 + x);
        CHECK(std::abs(feat[5 + c] - mean) < 1e-12);
        CHECK(std::abs(feat[8 + c] - std::sqrt(ss / 9.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("train: unit weights equal absent weights bit-exactly") {
  const auto data = separable_fixture(3, 1);
  TrainConfig cfg;
  cfg.epochs = 5;
  std::vector<TrainSample> plain, weighted;
  const GrayMap ones(16, 16, 1.0);
  for (const auto& d : data) {
    plain.push_back({&d.image, &d.ground_truth, nullptr});
    weighted.push_back({&d.image, &d.ground_truth, &ones});
  }
  const TrainResult a = train(plain, 2, cfg);
  const TrainResult b = train(weighted, 2, cfg);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);
  CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("train: separable fixture reaches 99% accuracy") {
  const auto data = separable_fixture(4, 2);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1.0;
  std::vector<TrainSample> samples;
  for (const auto& d : data) samples.push_back({&d.image, &d.ground_truth, nullptr});
  const TrainResult r = train(samples, 2, cfg);
  CHECK(pixel_accuracy(r.model, data) >= 0.99);
  // loss curve is finite and decreasing overall
  for (const double l : r.epoch_loss) CHECK(std::isfinite(l));
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
}

TEST_CASE("train: doubling weights and halving the rate is bit-identical") {
  const auto data = separable_fixture(2, 3);
  GrayMap twos(16, 16, 2.0);
  std::vector<TrainSample> doubled, plain;
  for (const auto& d : data) {
    doubled.push_back({&d.image, &d.ground_truth, &twos});
    plain.push_back({&d.image, &d.ground_truth, nullptr});
  }
  TrainConfig full;
  full.learning_rate = 1.0;
  full.epochs = 1;
  TrainConfig half = full;
  half.learning_rate = 0.5;
  const TrainResult a = train(plain, 2, full);
  const TrainResult b = train(doubled, 2, half);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);
}

TEST_CASE("train: same seed gives bit-identical models, different seeds differ") {
  const auto data = separable_fixture(2, 4);
  std::vector<TrainSample> samples;
  for (const auto& d : data) samples.push_back({&d.image, &d.ground_truth, nullptr});
  TrainConfig cfg;
  cfg.epochs = 3;
  const TrainResult a = train(samples, 2, cfg);
  const TrainResult b = train(samples, 2, cfg);
  CHECK(a.model.weights == b.model.weights);
  cfg.seed = 99;
  const TrainResult c = train(samples, 2, cfg);
  CHECK(a.model.weights != c.model.weights);
}

TEST_CASE("train: validation errors") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train({}, 2, cfg), ValidationError);
  const auto data = separable_fixture(1, 5);
  LabelMask all_ignore(16, 16, 2);
  for (auto& v : all_ignore.labels()) v = 255;
  std::vector<TrainSample> samples{{&data[0].image, &all_ignore, nullptr}};
  CHECK_THROWS_AS(train(samples, 2, cfg), ValidationError);
}

TEST_CASE("predict: zero model gives uniform probabilities") {
  ToyModel m;
  m.num_classes = 3;
  m.weights.assign(3 * kFeatureDim, 0.0);
  m.bias.assign(3, 0.0);
  RgbImage img(3, 3);
  const ScoreMap p = softmax_over_classes(predict(m, img));
  for (const double v : p.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("predict: mirror equivariance via mirrored features") {
  const auto data = separable_fixture(1, 6);
  TrainConfig cfg;
  cfg.epochs = 10;
  std::vector<TrainSample> samples{{&data[0].image, &data[0].ground_truth, nullptr}};
  const TrainResult r = train(samples, 2, cfg);

  const RgbImage& img = data[0].image;
  const int H = img.height(), W = img.width();
  RgbImage mirrored(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) mirrored.at(y, x, c) = img.at(y, W - 1 - x, c);

  const ScoreMap a = predict(r.model, img);
  FeatureGrid mf = extract_features(mirrored);
  // mirror the column position feature back so features coincide
  for (std::size_t p = 0; p < static_cast<std::size_t>(H) * W; ++p) {
    mf.data[p * kFeatureDim + 4] = 1.0 - mf.data[p * kFeatureDim + 4];
  }
  const ScoreMap b = predict(r.model, mf);
  const std::size_t hw = a.pixel_count();
  for (int c = 0; c < 2; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        CHECK(a.at(c, y, x) ==
              doctest::Approx(b.at(c, y, W - 1 - x)).epsilon(1e-12));
      }
    }
  }
  (void)hw;
}

TEST_CASE("distill: teacher relabels equal its own argmax without CRF") {
  const auto data = separable_fixture(2, 7);
  TrainConfig cfg;
  cfg.epochs = 10;
  std::vector<TrainSample> samples;
  for (const auto& d : data) samples.push_back({&d.image, &d.ground_truth, nullptr});
  const TrainResult teacher = train(samples, 2, cfg);
  std::vector<RgbImage> images{data[0].image, data[1].image};
  const std::vector<LabelMask> relabeled = distill_relabel(teacher.model, images);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const LabelMask own = argmax_over_classes(predict(teacher.model, images[i]));
    CHECK(relabeled[i].labels() == own.labels());
  }
}

TEST_CASE("distill: student trained on teacher masks matches teacher accuracy") {
  const auto data = separable_fixture(4, 8);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1.0;
  std::vector<TrainSample> samples;
  for (const auto& d : data) samples.push_back({&d.image, &d.ground_truth, nullptr});
  const TrainResult teacher = train(samples, 2, cfg);

  std::vector<RgbImage> images;
  for (const auto& d : data) images.push_back(d.image);
  const std::vector<LabelMask> relabeled = distill_relabel(teacher.model, images);
  std::vector<TrainSample> student_samples;
  for (std::size_t i = 0; i < data.size(); ++i) {
    student_samples.push_back({&data[i].image, &relabeled[i], nullptr});
  }
  const TrainResult student = train(student_samples, 2, cfg);
  const double teacher_acc = pixel_accuracy(teacher.model, data);
  const double student_acc = pixel_accuracy(student.model, data);
  CHECK(student_acc >= teacher_acc - 0.01);
}

TEST_CASE("distill with CRF shrinks isolated single-pixel islands") {
  // teacher trained to reproduce a speckled mask; CRF cleans the speckles
  const int H = 16, W = 16;
  RgbImage img(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = x < W / 2 ? 60 : 200;

  // model that predicts class by brightness but with weak confidence, so
  // the CRF has room to act
  ToyModel weak;
  weak.num_classes = 2;
  weak.weights.assign(2 * kFeatureDim, 0.0);
  weak.bias.assign(2, 0.0);
  weak.weights[kFeatureDim + 0] = 2.0;  // class 1 likes red channel
  weak.bias[1] = -1.0;

  CrfParams crf;
  crf.iterations = 3;
  const std::vector<LabelMask> no_crf = distill_relabel(weak, {img});
  const std::vector<LabelMask> with_crf = distill_relabel(weak, {img}, crf);
  const auto count_islands = [&](const LabelMask& m) {
    int islands = 0;
    for (int y = 1; y + 1 < H; ++y) {
      for (int x = 1; x + 1 < W; ++x) {
        const std::int32_t v = m.at(y, x);
        if (m.at(y - 1, x) != v && m.at(y + 1, x) != v && m.at(y, x - 1) != v &&
            m.at(y, x + 1) != v) {
          ++islands;
        }
      }
    }
    return islands;
  };
  CHECK(count_islands(with_crf[0]) <= count_islands(no_crf[0]));
}

TEST_CASE("model serialization round-trips bit-exactly and rejects bad files") {
  const auto data = separable_fixture(1, 9);
  TrainConfig cfg;
  cfg.epochs = 2;
  std::vector<TrainSample> samples{{&data[0].image, &data[0].ground_truth, nullptr}};
  const TrainResult r = train(samples, 2, cfg);

  const std::filesystem::path path = std::filesystem::temp_directory_path() / "urn_test_model.urnm";
  save_model(r.model, path);
  const ToyModel loaded = load_model(path);
  CHECK(loaded.num_classes == r.model.num_classes);
  CHECK(loaded.weights == r.model.weights);
  CHECK(loaded.bias == r.model.bias);

  // corrupt the magic
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE garbage";
  }
  CHECK_THROWS_AS(load_model(path), IoError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.urnm"), IoError);
  std::filesystem::remove(path);
}
