#pragma once

#include <array>
#include <cstdint>

namespace urn {

/// 256-stop piecewise-linear blue-to-red colormap used for uncertainty
/// heatmaps: blue -> cyan -> green -> yellow -> red with breakpoints at
/// indices 0, 64, 128, 192, 255. The full table is documented in
/// docs/colormap.md; pixels are exact table lookups of round(255 * v).
const std::array<std::array<std::uint8_t, 3>, 256>& heat_colormap();

/// The VOC indexed-PNG palette (bit-reversal construction); entry 255 is the
/// ignore color (224, 224, 192).
const std::array<std::array<std::uint8_t, 3>, 256>& voc_palette();

}  // namespace urn
