#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "urn/dataset.hpp"
#include "urn/densecrf.hpp"
#include "urn/eval.hpp"
#include "urn/response_scaling.hpp"
#include "urn/toy_model.hpp"
#include "urn/uncertainty.hpp"

namespace urn {

/// One image's pass through the uncertainty half of the loop:
/// scores -> scaled mask stack -> variances -> U -> Y.
struct UncertaintyResult {
  GrayMap uncertainty;
  GrayMap weights;
};

UncertaintyResult compute_uncertainty(const ScoreMap& scores, const RgbImage& image,
                                      const LabelMask& pseudo_mask, const ScaleSet& scales,
                                      const CrfParams& crf, const WeightConfig& weight_cfg,
                                      const StackOptions& stack_opts = {});

/// Configuration of the full train -> estimate -> reweight -> retrain loop.
struct UrnRunConfig {
  ScaleSet scales = ScaleSet::voc();
  CrfParams crf;
  WeightConfig weights;
  StackOptions stack;
  TrainConfig train;
  double holdout_fraction = 0.2;  // trailing images held out for evaluation
  int threads = 1;
  bool compare_probability_baseline = true;
};

struct UrnRunResult {
  IouReport baseline;            // plain training on the noisy masks
  IouReport urn;                 // retrained with the URN weight masks
  std::optional<IouReport> probability;  // probability-reweight ablation
  double mean_noise_auroc = 0.0;  // U vs true noise indicator, train split
  int auroc_images = 0;          // images with a non-degenerate indicator
  std::string report;            // deterministic text report
};

/// Runs the URN loop on a loaded dataset, writing artifacts (scores,
/// uncertainty maps, heatmaps, weight PNGs, combined PNGs, models, report)
/// under out_dir when it is non-empty. Deterministic for a fixed config:
/// threads only change wall time, never an output byte.
UrnRunResult run_urn(const Dataset& dataset, const UrnRunConfig& config,
                     const std::filesystem::path& out_dir);

}  // namespace urn
