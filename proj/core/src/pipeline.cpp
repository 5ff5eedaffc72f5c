#include "urn/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "urn/loss.hpp"
#include "urn/npy.hpp"
#include "urn/parallel.hpp"
#include "urn/png_io.hpp"

namespace urn {

UncertaintyResult compute_uncertainty(const ScoreMap& scores, const RgbImage& image,
                                      const LabelMask& pseudo_mask, const ScaleSet& scales,
                                      const CrfParams& crf, const WeightConfig& weight_cfg,
                                      const StackOptions& stack_opts) {
  const ScaledMaskStack stack =
      build_scaled_mask_stack(scores, image, pseudo_mask, scales, crf, stack_opts);
  const std::vector<GrayMap> variances = variance_over_scales(stack, weight_cfg.variance_mode);
  GrayMap u = uncertainty_map(variances);
  GrayMap y = weight_mask(u, weight_cfg);
  return {std::move(u), std::move(y)};
}

namespace {

std::vector<TrainSample> make_samples(const Dataset& ds, std::size_t train_count,
                                      const std::vector<LabelMask>& targets,
                                      const std::vector<GrayMap>* weights) {
  std::vector<TrainSample> samples;
  samples.reserve(train_count);
  for (std::size_t i = 0; i < train_count; ++i) {
    samples.push_back({&ds.images[i], &targets[i], weights ? &(*weights)[i] : nullptr});
  }
  return samples;
}

IouReport evaluate_model(const ToyModel& model, const Dataset& ds, std::size_t holdout_begin,
                         int threads) {
  const std::size_t n = ds.size() - holdout_begin;
  if (n == 0) throw ValidationError("urn run: holdout split is empty");
  std::vector<std::optional<LabelMask>> predictions(n);
  parallel_for(n, threads, [&](std::size_t k) {
    predictions[k] = argmax_over_classes(predict(model, ds.images[holdout_begin + k]));
  });
  ConfusionMatrix cm(ds.num_classes);
  for (std::size_t k = 0; k < n; ++k) {  // fixed reduction order
    cm.add(*predictions[k], ds.ground_truth[holdout_begin + k]);
  }
  return miou(cm);
}

}  // namespace

UrnRunResult run_urn(const Dataset& dataset, const UrnRunConfig& config,
                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (dataset.size() == 0) throw ValidationError("urn run: empty dataset");
  if (dataset.noisy.size() != dataset.size()) {
    throw ValidationError("urn run: dataset has no noisy pseudo-masks");
  }
  config.scales.validate();
  config.crf.validate();
  config.weights.validate();
  if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
    throw ValidationError("urn run: holdout fraction must lie in [0,1)");
  }

  const std::size_t train_count = dataset.size() -
      static_cast<std::size_t>(std::llround(config.holdout_fraction * dataset.size()));
  if (train_count == 0) throw ValidationError("urn run: train split is empty");
  if (train_count == dataset.size()) {
    throw ValidationError("urn run: holdout split is empty; lower the holdout fraction");
  }
  const int threads = resolve_threads(config.threads);

  const bool writing = !out_dir.empty();
  if (writing) {
    std::error_code ec;
    for (const char* sub : {"scores", "uncertainty", "heatmaps", "weights", "combined", "models"}) {
      fs::create_directories(out_dir / sub, ec);
      if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
    }
  }

  // 1. Base model on the noisy pseudo-masks, no weights.
  const TrainResult base = train(make_samples(dataset, train_count, dataset.noisy, nullptr),
                                 dataset.num_classes, config.train);

  // 2-4. Predict, estimate uncertainty, derive weight masks (per train image,
  // parallel; every artifact lands in a preallocated slot).
  std::vector<std::optional<ScoreMap>> scores(train_count);
  std::vector<std::optional<UncertaintyResult>> unc(train_count);
  parallel_for(train_count, threads, [&](std::size_t i) {
    ScoreMap s = predict(base.model, dataset.images[i]);
    unc[i] = compute_uncertainty(s, dataset.images[i], dataset.noisy[i], config.scales, config.crf,
                                 config.weights, config.stack);
    scores[i] = std::move(s);
    if (writing) {
      const std::string stem = image_stem(i);
      write_score_map(*scores[i], out_dir / "scores" / (stem + ".npy"));
      write_gray_map(unc[i]->uncertainty, out_dir / "uncertainty" / (stem + ".npy"));
      write_heatmap_png(unc[i]->uncertainty, out_dir / "heatmaps" / (stem + ".png"));
      write_weight_png(unc[i]->weights, out_dir / "weights" / (stem + ".png"));
      write_combined_png(dataset.noisy[i], unc[i]->weights, out_dir / "combined" / (stem + ".png"));
    }
  });

  // The weight masks go through the same 8-bit PNG quantization the paper
  // uses for offline storage, whether or not files are written.
  std::vector<GrayMap> quantized_weights;
  quantized_weights.reserve(train_count);
  for (std::size_t i = 0; i < train_count; ++i) {
    GrayMap q = unc[i]->weights;
    for (double& v : q.values()) v = std::lround(v * 255.0) / 255.0;
    quantized_weights.push_back(std::move(q));
  }

  // 5. Retrain with the URN weights (same seed: identical init and shuffle).
  const TrainResult urn_model =
      train(make_samples(dataset, train_count, dataset.noisy, &quantized_weights),
            dataset.num_classes, config.train);

  // Probability-reweight ablation: detached softmax probability of the
  // target class as the per-pixel weight.
  std::optional<TrainResult> prob_model;
  if (config.compare_probability_baseline) {
    std::vector<GrayMap> prob_weights;
    prob_weights.reserve(train_count);
    for (std::size_t i = 0; i < train_count; ++i) {
      prob_weights.push_back(probability_weights(*scores[i], dataset.noisy[i]));
    }
    prob_model = train(make_samples(dataset, train_count, dataset.noisy, &prob_weights),
                       dataset.num_classes, config.train);
  }

  UrnRunResult result;
  result.baseline = evaluate_model(base.model, dataset, train_count, threads);
  result.urn = evaluate_model(urn_model.model, dataset, train_count, threads);
  if (prob_model) result.probability = evaluate_model(prob_model->model, dataset, train_count, threads);

  // Uncertainty quality against the true noise indicators, when present.
  double auroc_sum = 0.0;
  int auroc_count = 0;
  if (dataset.noise_indicator.size() == dataset.size()) {
    for (std::size_t i = 0; i < train_count; ++i) {
      bool has_noise = false, has_clean = false;
      for (const double v : dataset.noise_indicator[i].values()) {
        (v != 0.0 ? has_noise : has_clean) = true;
      }
      if (!has_noise || !has_clean) continue;  // degenerate, AUROC undefined
      auroc_sum += noise_auroc(unc[i]->uncertainty, dataset.noise_indicator[i]);
      ++auroc_count;
    }
  }
  result.mean_noise_auroc = auroc_count > 0 ? auroc_sum / auroc_count : 0.0;
  result.auroc_images = auroc_count;

  char buf[256];
  std::string report;
  report += "urn run\n";
  std::snprintf(buf, sizeof(buf), "train_images = %zu\nholdout_images = %zu\n", train_count,
                dataset.size() - train_count);
  report += buf;
  std::snprintf(buf, sizeof(buf), "threshold = %.6f\n", config.weights.threshold);
  report += buf;
  report += format_iou_report(result.baseline, "baseline (plain noisy-mask training)");
  report += format_iou_report(result.urn, "urn (uncertainty-reweighted training)");
  if (result.probability) {
    report += format_iou_report(*result.probability, "probability (softmax-reweighted training)");
  }
  if (auroc_count > 0) {
    std::snprintf(buf, sizeof(buf), "noise_auroc_mean = %.6f\nnoise_auroc_images = %d\n",
                  result.mean_noise_auroc, auroc_count);
    report += buf;
  }
  result.report = std::move(report);

  if (writing) {
    save_model(base.model, out_dir / "models" / "baseline.urnm");
    save_model(urn_model.model, out_dir / "models" / "urn.urnm");
    if (prob_model) save_model(prob_model->model, out_dir / "models" / "probability.urnm");
    std::ofstream f(out_dir / "report.txt", std::ios::binary);
    if (!f) throw IoError("cannot write report: " + (out_dir / "report.txt").string());
    f << result.report;
  }
  return result;
}

}  // namespace urn
