#pragma once

#include <filesystem>

#include "urn/types.hpp"

namespace urn {

// Restricted NPY v1.0 interchange: C-contiguous little-endian arrays,
// float32/float64 for score and gray maps, uint8/uint16 for label masks.
// Everything this toolkit writes is float64 / uint8; readers also accept the
// narrower types so prediction maps exported from external training stacks
// load directly. Malformed files raise IoError with a distinct message per
// defect (bad magic, bad header, Fortran order, unsupported dtype, size
// mismatch).

/// Score maps are 3-D (C, H, W). The logits/probabilities kind lives in the
/// "<path>.meta" sidecar ("kind = logits|probabilities"); a missing sidecar
/// reads as logits.
void write_score_map(const ScoreMap& map, const std::filesystem::path& path);
ScoreMap read_score_map(const std::filesystem::path& path);

/// Gray maps are 2-D (H, W) floats.
void write_gray_map(const GrayMap& map, const std::filesystem::path& path);
GrayMap read_gray_map(const std::filesystem::path& path);

/// Label masks are 2-D (H, W) unsigned integers; 255 is the ignore value.
void write_label_mask(const LabelMask& mask, const std::filesystem::path& path, int num_classes_hint = -1);
LabelMask read_label_mask(const std::filesystem::path& path, int num_classes);

}  // namespace urn
