#include <benchmark/benchmark.h>

#include "urn/pipeline.hpp"
#include "urn/synth.hpp"
#include "urn/toy_model.hpp"

using namespace urn;

namespace {

struct Fixture {
  std::vector<SynthImage> data;
  std::vector<NoisyMask> noisy;
  TrainResult base;
  int num_classes = 0;

  Fixture() {
    SynthConfig cfg;
    cfg.count = 8;
    cfg.seed = 42;
    num_classes = cfg.num_classes();
    data = generate(cfg);
    for (std::size_t i = 0; i < data.size(); ++i) {
      NoiseSpec spec;
      spec.seed = i;
      noisy.push_back(inject_noise(data[i].ground_truth, spec));
    }
    TrainConfig tc;
    tc.epochs = 10;
    std::vector<TrainSample> samples;
    for (std::size_t i = 0; i < data.size(); ++i) {
      samples.push_back({&data[i].image, &noisy[i].noisy, nullptr});
    }
    base = train(samples, num_classes, tc);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

static void BM_ExtractFeatures64x64(benchmark::State& state) {
  const RgbImage& img = fixture().data[0].image;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_features(img));
  }
}
BENCHMARK(BM_ExtractFeatures64x64)->Unit(benchmark::kMillisecond);

// One image through scale -> CRF -> argmax -> variance -> U -> Y with the
// calibrated loop settings.
static void BM_UncertaintyPerImage(benchmark::State& state) {
  Fixture& f = fixture();
  const ScoreMap scores = predict(f.base.model, f.data[0].image);
  CrfParams crf;
  crf.iterations = 1;
  crf.spatial_weight = 0.5;
  crf.bilateral_weight = 0.5;
  crf.bilateral_color_stddev = 15.0;
  WeightConfig wc;
  StackOptions opts;
  opts.temperature = 3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_uncertainty(scores, f.data[0].image, f.noisy[0].noisy, ScaleSet::voc(), crf, wc, opts));
  }
}
BENCHMARK(BM_UncertaintyPerImage)->Unit(benchmark::kMillisecond);

static void BM_TrainEpoch(benchmark::State& state) {
  Fixture& f = fixture();
  std::vector<TrainSample> samples;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    samples.push_back({&f.data[i].image, &f.noisy[i].noisy, nullptr});
  }
  TrainConfig tc;
  tc.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(samples, f.num_classes, tc));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);
