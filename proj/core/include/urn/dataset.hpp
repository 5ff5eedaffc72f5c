#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urn/synth.hpp"
#include "urn/types.hpp"

namespace urn {

// On-disk dataset layout produced by the synth generator and consumed by
// every pipeline stage:
//   <root>/images/NNNN.png   RGB input
//   <root>/gt/NNNN.png       ground-truth palette mask
//   <root>/noisy/NNNN.png    corrupted pseudo-mask (training target)
//   <root>/noise/NNNN.png    binary indicator of corrupted pixels (0/255)
//   <root>/manifest.txt      key = value lines (config and seeds)
// NNNN is the zero-padded image index.

std::string image_stem(std::size_t index);  // "0000", "0001", ...

struct Dataset {
  std::vector<RgbImage> images;
  std::vector<LabelMask> ground_truth;
  std::vector<LabelMask> noisy;          // empty if the dataset has no noise dir
  std::vector<GrayMap> noise_indicator;  // empty if absent
  int num_classes = 0;

  std::size_t size() const { return images.size(); }
};

/// Generates, corrupts and writes a dataset in one go. noise = nullopt
/// writes noisy/ as a copy of gt/ with all-zero indicators, keeping the
/// layout uniform for downstream stages.
void write_synth_dataset(const std::filesystem::path& root, const SynthConfig& cfg,
                         const std::optional<NoiseSpec>& noise);

Dataset load_dataset(const std::filesystem::path& root);

/// manifest.txt parsing ("key = value" per line, '#' comments allowed).
std::map<std::string, std::string> read_manifest(const std::filesystem::path& root);

}  // namespace urn
