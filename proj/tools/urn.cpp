// urn: batch front end for the uncertainty-reweighting pipeline.
//
// Subcommands chain through the filesystem: synth writes a dataset tree,
// predict turns images into score-map NPYs, uncertainty turns score maps
// into U maps, weights turns U into loss-weight PNGs, train/distill/eval
// consume any of the above. `urn urn` runs the whole loop in one go.
//
// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "urn/dataset.hpp"
#include "urn/densecrf.hpp"
#include "urn/eval.hpp"
#include "urn/loss.hpp"
#include "urn/npy.hpp"
#include "urn/parallel.hpp"
#include "urn/pipeline.hpp"
#include "urn/png_io.hpp"
#include "urn/response_scaling.hpp"
#include "urn/toy_model.hpp"
#include "urn/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace urn;

namespace {

// ---------------------------------------------------------------- helpers

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw IoError("no " + extension + " files in " + dir.string());
  }
  return files;
}

ScaleSet parse_scales(const std::string& spec) {
  if (spec == "voc") return ScaleSet::voc();
  if (spec == "coco") return ScaleSet::coco();
  std::vector<double> factors;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      factors.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ValidationError("bad scale factor '" + tok + "' in --scales");
    }
  }
  return ScaleSet::custom_factors(std::move(factors));
}

VarianceMode parse_variance_mode(const std::string& mode) {
  if (mode == "indicator") return VarianceMode::indicator;
  if (mode == "raw-label") return VarianceMode::raw_label;
  throw ValidationError("--variance-mode must be 'indicator' or 'raw-label'");
}

NoiseMode parse_noise_mode(const std::string& mode) {
  if (mode == "dilate") return NoiseMode::dilate;
  if (mode == "erode") return NoiseMode::erode;
  if (mode == "mixed") return NoiseMode::mixed;
  throw ValidationError("--noise-mode must be dilate, erode, mixed or none");
}

DenseCrf::Path parse_crf_path(const std::string& path) {
  if (path == "naive") return DenseCrf::Path::naive;
  if (path == "fast") return DenseCrf::Path::fast;
  throw ValidationError("--crf-path must be 'naive' or 'fast'");
}

void add_crf_options(CLI::App* cmd, CrfParams& p) {
  cmd->add_option("--crf-iterations", p.iterations, "Mean-field iterations");
  cmd->add_option("--spatial-weight", p.spatial_weight, "Spatial kernel weight w_s");
  cmd->add_option("--spatial-stddev", p.spatial_stddev, "Spatial kernel stddev (pixels)");
  cmd->add_option("--bilateral-weight", p.bilateral_weight, "Bilateral kernel weight w_b");
  cmd->add_option("--bilateral-spatial-stddev", p.bilateral_spatial_stddev,
                  "Bilateral spatial stddev (pixels)");
  cmd->add_option("--bilateral-color-stddev", p.bilateral_color_stddev,
                  "Bilateral color stddev (8-bit units)");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

const LabelMask& pick_targets(const Dataset& ds, const std::string& which, std::size_t i) {
  if (which == "gt") return ds.ground_truth[i];
  if (which == "noisy") {
    if (ds.noisy.size() != ds.size()) throw IoError("dataset has no noisy masks");
    return ds.noisy[i];
  }
  throw ValidationError("--targets must be 'gt' or 'noisy'");
}

// ------------------------------------------------------------ subcommands

struct SynthArgs {
  std::string out;
  SynthConfig cfg;
  std::string noise_mode = "mixed";
  NoiseSpec noise;
};

int cmd_synth(const SynthArgs& a) {
  std::optional<NoiseSpec> noise;
  if (a.noise_mode != "none") {
    NoiseSpec spec = a.noise;
    spec.mode = parse_noise_mode(a.noise_mode);
    noise = spec;
  }
  write_synth_dataset(a.out, a.cfg, noise);
  std::printf("wrote %d images under %s\n", a.cfg.count, a.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string data, out, targets = "noisy", weights_dir, combined_dir, curve_file;
  TrainConfig cfg;
};

int cmd_train(const TrainArgs& a) {
  const Dataset ds = load_dataset(a.data);
  std::vector<LabelMask> combined_targets;
  std::vector<GrayMap> weights;
  if (!a.combined_dir.empty()) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      auto [mask, w] =
          read_combined_png(fs::path(a.combined_dir) / (image_stem(i) + ".png"), ds.num_classes);
      combined_targets.push_back(std::move(mask));
      weights.push_back(std::move(w));
    }
  } else if (!a.weights_dir.empty()) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      weights.push_back(read_weight_png(fs::path(a.weights_dir) / (image_stem(i) + ".png")));
    }
  }

  std::vector<TrainSample> samples;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const LabelMask& target =
        combined_targets.empty() ? pick_targets(ds, a.targets, i) : combined_targets[i];
    samples.push_back({&ds.images[i], &target, weights.empty() ? nullptr : &weights[i]});
  }
  const TrainResult result = train(samples, ds.num_classes, a.cfg);
  save_model(result.model, a.out);
  if (!a.curve_file.empty()) {
    std::ofstream f(a.curve_file, std::ios::binary);
    if (!f) throw IoError("cannot write " + a.curve_file);
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "epoch %zu loss %.9f\n", e, result.epoch_loss[e]);
      f << buf;
    }
  }
  std::printf("trained %d epochs on %zu images -> %s (final loss %.6f)\n", a.cfg.epochs, ds.size(),
              a.out.c_str(), result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back());
  return 0;
}

struct PredictArgs {
  std::string data, model, out;
  int threads = 0;
};

int cmd_predict(const PredictArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const ToyModel model = load_model(a.model);
  ensure_dir(a.out);
  parallel_for(ds.size(), resolve_threads(a.threads), [&](std::size_t i) {
    write_score_map(predict(model, ds.images[i]), fs::path(a.out) / (image_stem(i) + ".npy"));
  });
  std::printf("wrote %zu score maps to %s\n", ds.size(), a.out.c_str());
  return 0;
}

struct CrfArgs {
  std::string data, scores, out, path = "fast";
  CrfParams params;
  int threads = 0;
};

int cmd_crf(const CrfArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const DenseCrf::Path path = parse_crf_path(a.path);
  ensure_dir(a.out);
  parallel_for(ds.size(), resolve_threads(a.threads), [&](std::size_t i) {
    const fs::path in = fs::path(a.scores) / (image_stem(i) + ".npy");
    ScoreMap scores = read_score_map(in);
    if (scores.kind() == ScoreKind::logits) scores = softmax_over_classes(scores);
    const DenseCrf crf(ds.images[i], a.params, path);
    write_score_map(crf.refine(scores), fs::path(a.out) / (image_stem(i) + ".npy"));
  });
  std::printf("refined %zu score maps to %s\n", ds.size(), a.out.c_str());
  return 0;
}

struct UncertaintyArgs {
  std::string data, scores, out, masks = "noisy", scales = "voc", variance_mode = "indicator";
  std::string crf_path = "fast";
  double temperature = 1.0;
  bool no_crf = false;
  CrfParams crf;
  int threads = 0;
};

int cmd_uncertainty(const UncertaintyArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const ScaleSet scales = parse_scales(a.scales);
  WeightConfig wcfg;  // threshold unused here; only U is emitted
  wcfg.variance_mode = parse_variance_mode(a.variance_mode);
  StackOptions opts;
  opts.use_crf = !a.no_crf;
  opts.crf_path = parse_crf_path(a.crf_path);
  opts.temperature = a.temperature;
  ensure_dir(a.out);
  parallel_for(ds.size(), resolve_threads(a.threads), [&](std::size_t i) {
    const ScoreMap scores = read_score_map(fs::path(a.scores) / (image_stem(i) + ".npy"));
    const UncertaintyResult r = compute_uncertainty(scores, ds.images[i],
                                                    pick_targets(ds, a.masks, i), scales, a.crf,
                                                    wcfg, opts);
    write_gray_map(r.uncertainty, fs::path(a.out) / (image_stem(i) + ".npy"));
    write_heatmap_png(r.uncertainty, fs::path(a.out) / (image_stem(i) + ".png"));
  });
  std::printf("wrote %zu uncertainty maps to %s\n", ds.size(), a.out.c_str());
  return 0;
}

struct WeightsArgs {
  std::string uncertainty, out, masks_dir, combined_out;
  double threshold = 0.05;
};

int cmd_weights(const WeightsArgs& a) {
  WeightConfig cfg;
  cfg.threshold = a.threshold;
  const std::vector<fs::path> files = list_files(a.uncertainty, ".npy");
  ensure_dir(a.out);
  if (!a.combined_out.empty()) {
    if (a.masks_dir.empty()) throw ValidationError("--combined-out needs --masks");
    ensure_dir(a.combined_out);
  }
  for (const fs::path& file : files) {
    const GrayMap u = read_gray_map(file);
    const GrayMap y = weight_mask(u, cfg);
    const std::string name = file.stem().string() + ".png";
    write_weight_png(y, fs::path(a.out) / name);
    if (!a.combined_out.empty()) {
      // 256 classes: accept any stored byte as a label
      const LabelMask mask = read_mask_png(fs::path(a.masks_dir) / name, 256);
      write_combined_png(mask, y, fs::path(a.combined_out) / name);
    }
  }
  std::printf("wrote %zu weight masks to %s\n", files.size(), a.out.c_str());
  return 0;
}

struct LossArgs {
  std::string data, scores, targets = "noisy", weights_dir, report, per_pixel_out;
};

int cmd_loss(const LossArgs& a) {
  const Dataset ds = load_dataset(a.data);
  if (!a.per_pixel_out.empty()) ensure_dir(a.per_pixel_out);
  double total = 0.0, weighted_count = 0.0;
  std::size_t pixel_count = 0;
  std::string lines;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ScoreMap scores = read_score_map(fs::path(a.scores) / (image_stem(i) + ".npy"));
    const LabelMask& target = pick_targets(ds, a.targets, i);
    GrayMap weights(scores.height(), scores.width(), 1.0);
    if (!a.weights_dir.empty()) {
      weights = read_weight_png(fs::path(a.weights_dir) / (image_stem(i) + ".png"));
    }
    const LossReport r = weighted_cross_entropy(scores, target, weights);
    std::size_t counted = 0;
    for (const std::int32_t t : target.labels()) {
      if (t != target.ignore_value()) ++counted;
    }
    total += r.mean * static_cast<double>(counted);
    weighted_count += r.weighted_pixel_count;
    pixel_count += counted;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "image %s mean_loss %.9f pixels %zu\n", image_stem(i).c_str(),
                  r.mean, counted);
    lines += buf;
    if (!a.per_pixel_out.empty()) {
      write_gray_map(r.per_pixel, fs::path(a.per_pixel_out) / (image_stem(i) + ".npy"));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "[metrics]\nmean_loss = %.9f\npixels = %zu\nweighted_pixel_count = %.3f\n",
                total / static_cast<double>(pixel_count), pixel_count, weighted_count);
  lines += buf;
  if (a.report.empty()) {
    std::fputs(lines.c_str(), stdout);
  } else {
    std::ofstream f(a.report, std::ios::binary);
    if (!f) throw IoError("cannot write " + a.report);
    f << lines;
  }
  return 0;
}

struct DistillArgs {
  std::string data, model, out;
  bool use_crf = false;
  std::string crf_path = "fast";
  CrfParams crf;
  int threads = 0;
};

int cmd_distill(const DistillArgs& a) {
  const Dataset ds = load_dataset(a.data);
  const ToyModel teacher = load_model(a.model);
  ensure_dir(a.out);
  const DenseCrf::Path path = parse_crf_path(a.crf_path);
  parallel_for(ds.size(), resolve_threads(a.threads), [&](std::size_t i) {
    ScoreMap probs = softmax_over_classes(predict(teacher, ds.images[i]));
    if (a.use_crf) probs = DenseCrf(ds.images[i], a.crf, path).refine(probs);
    write_mask_png(argmax_over_classes(probs), fs::path(a.out) / (image_stem(i) + ".png"));
  });
  std::printf("wrote %zu relabeled masks to %s\n", ds.size(), a.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string data, pred, uncertainty, report;
};

int cmd_eval(const EvalArgs& a) {
  const Dataset ds = load_dataset(a.data);
  std::string out;
  if (!a.pred.empty()) {
    std::vector<LabelMask> preds;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      preds.push_back(read_mask_png(fs::path(a.pred) / (image_stem(i) + ".png"), ds.num_classes));
    }
    out += format_iou_report(miou(preds, ds.ground_truth, ds.num_classes), "prediction vs gt");
  }
  if (!a.uncertainty.empty()) {
    if (ds.noise_indicator.size() != ds.size()) {
      throw IoError("dataset has no noise indicators for AUROC");
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      bool has_noise = false, has_clean = false;
      for (const double v : ds.noise_indicator[i].values()) {
        (v != 0.0 ? has_noise : has_clean) = true;
      }
      if (!has_noise || !has_clean) continue;
      const GrayMap u = read_gray_map(fs::path(a.uncertainty) / (image_stem(i) + ".npy"));
      sum += noise_auroc(u, ds.noise_indicator[i]);
      ++count;
    }
    if (count == 0) throw ValidationError("noise AUROC undefined: every indicator is degenerate");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "[metrics]\nnoise_auroc_mean = %.6f\nnoise_auroc_images = %d\n",
                  sum / count, count);
    out += buf;
  }
  if (out.empty()) throw ValidationError("eval: give --pred and/or --uncertainty");
  if (a.report.empty()) {
    std::fputs(out.c_str(), stdout);
  } else {
    std::ofstream f(a.report, std::ios::binary);
    if (!f) throw IoError("cannot write " + a.report);
    f << out;
  }
  return 0;
}

struct UrnArgs {
  std::string data, out, scales = "voc", variance_mode = "indicator", crf_path = "fast";
  double threshold = 0.05;
  double temperature = 1.0;
  bool no_crf = false;
  bool no_probability_baseline = false;
  double holdout = 0.2;
  CrfParams crf;
  TrainConfig train_cfg;
  int threads = 0;
};

int cmd_urn(const UrnArgs& a) {
  const Dataset ds = load_dataset(a.data);
  UrnRunConfig cfg;
  cfg.scales = parse_scales(a.scales);
  cfg.crf = a.crf;
  cfg.weights.threshold = a.threshold;
  cfg.weights.variance_mode = parse_variance_mode(a.variance_mode);
  cfg.stack.use_crf = !a.no_crf;
  cfg.stack.crf_path = parse_crf_path(a.crf_path);
  cfg.stack.temperature = a.temperature;
  cfg.train = a.train_cfg;
  cfg.holdout_fraction = a.holdout;
  cfg.threads = a.threads;
  cfg.compare_probability_baseline = !a.no_probability_baseline;
  if (!a.out.empty()) ensure_dir(a.out);
  const UrnRunResult result = run_urn(ds, cfg, a.out);
  std::fputs(result.report.c_str(), stdout);
  return 0;
}

struct VizArgs {
  std::string in, out;
};

int cmd_viz(const VizArgs& a) {
  const std::vector<fs::path> files = list_files(a.in, ".npy");
  ensure_dir(a.out);
  for (const fs::path& file : files) {
    write_heatmap_png(read_gray_map(file), fs::path(a.out) / (file.stem().string() + ".png"));
  }
  std::printf("wrote %zu heatmaps to %s\n", files.size(), a.out.c_str());
  return 0;
}

void add_train_options(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--lr", cfg.learning_rate, "SGD learning rate");
  cmd->add_option("--epochs", cfg.epochs, "Training epochs");
  cmd->add_option("--batch", cfg.batch_size, "Minibatch size");
  cmd->add_option("--weight-decay", cfg.weight_decay, "L2 penalty on the weights");
  cmd->add_option("--seed", cfg.seed, "Training seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"URN: uncertainty estimation via response scaling for noisy pseudo-masks"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with optional label noise");
  synth->set_config("--config");
  synth->add_option("--out", synth_args.out, "Output dataset directory")->required();
  synth->add_option("--count", synth_args.cfg.count, "Number of images");
  synth->add_option("--height", synth_args.cfg.height, "Image height");
  synth->add_option("--width", synth_args.cfg.width, "Image width");
  synth->add_option("--classes", synth_args.cfg.shape_classes, "Foreground shape classes");
  synth->add_option("--shapes-min", synth_args.cfg.shapes_min, "Min shapes per image");
  synth->add_option("--shapes-max", synth_args.cfg.shapes_max, "Max shapes per image");
  synth->add_option("--jitter", synth_args.cfg.color_jitter, "Per-shape color jitter stddev");
  synth->add_option("--texture", synth_args.cfg.texture_amplitude, "Background noise stddev");
  synth->add_option("--seed", synth_args.cfg.seed, "Generation seed");
  synth->add_option("--noise-mode", synth_args.noise_mode, "dilate|erode|mixed|none");
  synth->add_option("--noise-radius", synth_args.noise.radius, "Structuring element radius");
  synth->add_option("--noise-fraction", synth_args.noise.fraction, "Share of objects perturbed");
  synth->add_option("--noise-seed", synth_args.noise.seed, "Noise seed");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the toy segmenter");
  train_cmd->set_config("--config");
  train_cmd->add_option("--data", train_args.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_args.out, "Output model file")->required();
  train_cmd->add_option("--targets", train_args.targets, "gt|noisy");
  train_cmd->add_option("--weights", train_args.weights_dir, "Directory of weight PNGs");
  train_cmd->add_option("--combined", train_args.combined_dir,
                        "Directory of combined mask+weight PNGs (overrides --targets/--weights)");
  train_cmd->add_option("--loss-curve", train_args.curve_file, "Write per-epoch losses here");
  add_train_options(train_cmd, train_args.cfg);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Write score-map NPYs for a dataset");
  predict_cmd->set_config("--config");
  predict_cmd->add_option("--data", predict_args.data, "Dataset directory")->required();
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("--out", predict_args.out, "Output directory")->required();
  predict_cmd->add_option("--threads", predict_args.threads, "Worker threads");

  CrfArgs crf_args;
  auto* crf_cmd = app.add_subcommand("crf", "Dense-CRF refine score maps");
  crf_cmd->set_config("--config");
  crf_cmd->add_option("--data", crf_args.data, "Dataset directory (for images)")->required();
  crf_cmd->add_option("--scores", crf_args.scores, "Directory of score-map NPYs")->required();
  crf_cmd->add_option("--out", crf_args.out, "Output directory")->required();
  crf_cmd->add_option("--crf-path", crf_args.path, "naive|fast");
  crf_cmd->add_option("--threads", crf_args.threads, "Worker threads");
  add_crf_options(crf_cmd, crf_args.params);

  UncertaintyArgs unc_args;
  auto* unc_cmd = app.add_subcommand("uncertainty", "Response-scaling uncertainty maps");
  unc_cmd->set_config("--config");
  unc_cmd->add_option("--data", unc_args.data, "Dataset directory")->required();
  unc_cmd->add_option("--scores", unc_args.scores, "Directory of score-map NPYs")->required();
  unc_cmd->add_option("--out", unc_args.out, "Output directory")->required();
  unc_cmd->add_option("--masks", unc_args.masks, "Pseudo-mask source: gt|noisy");
  unc_cmd->add_option("--scales", unc_args.scales, "voc|coco|comma-separated factors");
  unc_cmd->add_option("--variance-mode", unc_args.variance_mode, "indicator|raw-label");
  unc_cmd->add_flag("--no-crf", unc_args.no_crf, "Skip CRF inside the scaling loop");
  unc_cmd->add_option("--temperature", unc_args.temperature, "Soften probabilities before scaling");
  unc_cmd->add_option("--crf-path", unc_args.crf_path, "naive|fast");
  unc_cmd->add_option("--threads", unc_args.threads, "Worker threads");
  add_crf_options(unc_cmd, unc_args.crf);

  WeightsArgs weights_args;
  auto* weights_cmd = app.add_subcommand("weights", "Threshold U maps into weight masks");
  weights_cmd->set_config("--config");
  weights_cmd->add_option("--uncertainty", weights_args.uncertainty, "Directory of U NPYs")->required();
  weights_cmd->add_option("--out", weights_args.out, "Output directory")->required();
  weights_cmd->add_option("--threshold", weights_args.threshold, "Weight threshold t");
  weights_cmd->add_option("--masks", weights_args.masks_dir, "Mask PNGs for combined output");
  weights_cmd->add_option("--combined-out", weights_args.combined_out,
                          "Write side-by-side mask+weight PNGs here");

  LossArgs loss_args;
  auto* loss_cmd = app.add_subcommand("loss", "Weighted cross-entropy report");
  loss_cmd->set_config("--config");
  loss_cmd->add_option("--data", loss_args.data, "Dataset directory")->required();
  loss_cmd->add_option("--scores", loss_args.scores, "Directory of score-map NPYs")->required();
  loss_cmd->add_option("--targets", loss_args.targets, "gt|noisy");
  loss_cmd->add_option("--weights", loss_args.weights_dir, "Directory of weight PNGs");
  loss_cmd->add_option("--report", loss_args.report, "Report file (stdout if omitted)");
  loss_cmd->add_option("--per-pixel-out", loss_args.per_pixel_out, "Write per-pixel loss NPYs");

  DistillArgs distill_args;
  auto* distill_cmd = app.add_subcommand("distill", "Teacher relabeling for distillation");
  distill_cmd->set_config("--config");
  distill_cmd->add_option("--data", distill_args.data, "Dataset directory")->required();
  distill_cmd->add_option("--model", distill_args.model, "Teacher model file")->required();
  distill_cmd->add_option("--out", distill_args.out, "Output mask directory")->required();
  distill_cmd->add_flag("--use-crf", distill_args.use_crf, "CRF-refine teacher predictions");
  distill_cmd->add_option("--crf-path", distill_args.crf_path, "naive|fast");
  distill_cmd->add_option("--threads", distill_args.threads, "Worker threads");
  add_crf_options(distill_cmd, distill_args.crf);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "mIoU and/or noise AUROC");
  eval_cmd->set_config("--config");
  eval_cmd->add_option("--data", eval_args.data, "Dataset directory")->required();
  eval_cmd->add_option("--pred", eval_args.pred, "Directory of predicted mask PNGs");
  eval_cmd->add_option("--uncertainty", eval_args.uncertainty, "Directory of U NPYs");
  eval_cmd->add_option("--report", eval_args.report, "Report file (stdout if omitted)");

  UrnArgs urn_args;
  auto* urn_cmd = app.add_subcommand("urn", "Full loop: train, estimate, reweight, retrain, eval");
  urn_cmd->set_config("--config");
  urn_cmd->add_option("--data", urn_args.data, "Dataset directory")->required();
  urn_cmd->add_option("--out", urn_args.out, "Artifact output directory");
  urn_cmd->add_option("--scales", urn_args.scales, "voc|coco|comma-separated factors");
  urn_cmd->add_option("--threshold", urn_args.threshold, "Weight threshold t");
  urn_cmd->add_option("--variance-mode", urn_args.variance_mode, "indicator|raw-label");
  urn_cmd->add_flag("--no-crf", urn_args.no_crf, "Skip CRF inside the scaling loop");
  urn_cmd->add_option("--temperature", urn_args.temperature, "Soften probabilities before scaling");
  urn_cmd->add_option("--crf-path", urn_args.crf_path, "naive|fast");
  urn_cmd->add_option("--holdout", urn_args.holdout, "Held-out fraction for evaluation");
  urn_cmd->add_flag("--no-probability-baseline", urn_args.no_probability_baseline,
                    "Skip the probability-reweight comparison model");
  urn_cmd->add_option("--threads", urn_args.threads, "Worker threads");
  add_train_options(urn_cmd, urn_args.train_cfg);
  add_crf_options(urn_cmd, urn_args.crf);

  VizArgs viz_args;
  auto* viz_cmd = app.add_subcommand("viz", "Render gray-map NPYs as heatmap PNGs");
  viz_cmd->set_config("--config");
  viz_cmd->add_option("--in", viz_args.in, "Directory of NPYs with values in [0,1]")->required();
  viz_cmd->add_option("--out", viz_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (predict_cmd->parsed()) return cmd_predict(predict_args);
    if (crf_cmd->parsed()) return cmd_crf(crf_args);
    if (unc_cmd->parsed()) return cmd_uncertainty(unc_args);
    if (weights_cmd->parsed()) return cmd_weights(weights_args);
    if (loss_cmd->parsed()) return cmd_loss(loss_args);
    if (distill_cmd->parsed()) return cmd_distill(distill_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (urn_cmd->parsed()) return cmd_urn(urn_args);
    if (viz_cmd->parsed()) return cmd_viz(viz_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
