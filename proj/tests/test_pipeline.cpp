#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "urn/loss.hpp"
#include "urn/pipeline.hpp"

using namespace urn;
namespace fs = std::filesystem;

namespace {

Dataset small_noisy_dataset(int count, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.count = count;
  cfg.height = 32;
  cfg.width = 32;
  cfg.seed = seed;
  Dataset ds;
  ds.num_classes = cfg.num_classes();
  NoiseSpec spec;
  spec.radius = 2;
  spec.fraction = 0.5;
  for (auto& item : generate(cfg)) {
    NoiseSpec per = spec;
    per.seed = spec.seed + ds.images.size();
    NoisyMask noisy = inject_noise(item.ground_truth, per);
    ds.images.push_back(std::move(item.image));
    ds.ground_truth.push_back(std::move(item.ground_truth));
    ds.noisy.push_back(std::move(noisy.noisy));
    ds.noise_indicator.push_back(std::move(noisy.noise_indicator));
  }
  return ds;
}

}  // namespace

TEST_CASE("pipeline identity: unit scales and no CRF give U=0, Y=1, equal losses") {
  const Dataset ds = small_noisy_dataset(2, 41);
  TrainConfig tc;
  tc.epochs = 4;
  std::vector<TrainSample> samples;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    samples.push_back({&ds.images[i], &ds.noisy[i], nullptr});
  }
  const TrainResult base = train(samples, ds.num_classes, tc);

  const ScaleSet unit = ScaleSet::custom_factors({1.0, 1.0, 1.0});
  CrfParams crf;
  WeightConfig wc;
  StackOptions opts;
  opts.use_crf = false;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ScoreMap scores = predict(base.model, ds.images[i]);
    const UncertaintyResult r =
        compute_uncertainty(scores, ds.images[i], ds.noisy[i], unit, crf, wc, opts);
    for (const double v : r.uncertainty.values()) CHECK(v == 0.0);
    for (const double v : r.weights.values()) CHECK(v == 1.0);

    const LossReport weighted = weighted_cross_entropy(scores, ds.noisy[i], r.weights);
    const GrayMap ones(scores.height(), scores.width(), 1.0);
    const LossReport plain = weighted_cross_entropy(scores, ds.noisy[i], ones);
    CHECK(std::abs(weighted.mean - plain.mean) < 1e-12);
  }
}

TEST_CASE("run_urn: t = 1 makes the urn model identical to the baseline") {
  const Dataset ds = small_noisy_dataset(6, 42);
  UrnRunConfig cfg;
  cfg.scales = ScaleSet::voc();
  cfg.weights.threshold = 1.0;
  cfg.stack.use_crf = false;
  cfg.train.epochs = 4;
  cfg.holdout_fraction = 0.34;
  cfg.compare_probability_baseline = false;
  const UrnRunResult r = run_urn(ds, cfg, "");
  CHECK(std::abs(r.urn.mean - r.baseline.mean) < 1e-9);
}

TEST_CASE("run_urn writes a deterministic artifact tree; threads do not change it") {
  const Dataset ds = small_noisy_dataset(5, 43);
  UrnRunConfig cfg;
  cfg.train.epochs = 3;
  cfg.stack.temperature = 3.0;
  cfg.crf.iterations = 1;
  cfg.holdout_fraction = 0.2;

  const fs::path root = fs::temp_directory_path() / "urn_pipeline_test";
  fs::remove_all(root);
  cfg.threads = 1;
  const UrnRunResult a = run_urn(ds, cfg, root / "a");
  cfg.threads = 4;
  const UrnRunResult b = run_urn(ds, cfg, root / "b");
  CHECK(a.report == b.report);
  CHECK(a.urn.mean == b.urn.mean);
  CHECK(a.mean_noise_auroc == b.mean_noise_auroc);

  // identical trees byte for byte
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    std::ifstream fa(entry.path(), std::ios::binary), fb(root / "b" / rel, std::ios::binary);
    REQUIRE(fb.good());
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)), {});
    CHECK(bytes_a == bytes_b);
  }
  CHECK(files > 5 * 4);  // scores, U, heatmap, weights, combined per image + models + report
  fs::remove_all(root);
}

TEST_CASE("run_urn validates its configuration") {
  const Dataset ds = small_noisy_dataset(3, 44);
  UrnRunConfig cfg;
  cfg.holdout_fraction = 1.0;
  CHECK_THROWS_AS(run_urn(ds, cfg, ""), ValidationError);
  cfg.holdout_fraction = 0.0;
  CHECK_THROWS_WITH_AS(run_urn(ds, cfg, ""), doctest::Contains("holdout"), ValidationError);

  Dataset no_noisy = small_noisy_dataset(2, 45);
  no_noisy.noisy.clear();
  cfg.holdout_fraction = 0.5;
  CHECK_THROWS_AS(run_urn(no_noisy, cfg, ""), ValidationError);
}
