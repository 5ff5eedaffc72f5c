#pragma once

#include <filesystem>
#include <utility>

#include "urn/types.hpp"

namespace urn {

/// Indexed 8-bit PNG with the VOC palette: pixel index = class label,
/// 255 = ignore. Readers reject non-indexed files.
void write_mask_png(const LabelMask& mask, const std::filesystem::path& path);
LabelMask read_mask_png(const std::filesystem::path& path, int num_classes);

/// 8-bit grayscale weight storage: v -> round(255 * v) on write, stored/255
/// on read. Quantization error is at most 1/510 per pixel.
void write_weight_png(const GrayMap& weights, const std::filesystem::path& path);
GrayMap read_weight_png(const std::filesystem::path& path);

/// Pseudo-mask and weight mask concatenated side by side into one grayscale
/// PNG (width doubled, mask on the left, raw label bytes, quantized weights
/// on the right) so training needs a single ground-truth file.
void write_combined_png(const LabelMask& mask, const GrayMap& weights,
                        const std::filesystem::path& path);
std::pair<LabelMask, GrayMap> read_combined_png(const std::filesystem::path& path, int num_classes);

/// RGB renderings.
void write_heatmap_png(const GrayMap& u, const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_rgb_png(const std::filesystem::path& path);

}  // namespace urn
