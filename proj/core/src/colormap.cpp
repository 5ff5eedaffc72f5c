#include "urn/colormap.hpp"

#include <cmath>

namespace urn {

namespace {

std::array<std::array<std::uint8_t, 3>, 256> build_heat() {
  constexpr int stops_idx[5] = {0, 64, 128, 192, 255};
  constexpr int stops_rgb[5][3] = {
      {0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}};
  std::array<std::array<std::uint8_t, 3>, 256> table{};
  for (int i = 0; i < 256; ++i) {
    int seg = 0;
    while (seg < 3 && i > stops_idx[seg + 1]) ++seg;
    const double t = static_cast<double>(i - stops_idx[seg]) /
                     static_cast<double>(stops_idx[seg + 1] - stops_idx[seg]);
    for (int c = 0; c < 3; ++c) {
      const double v = stops_rgb[seg][c] + t * (stops_rgb[seg + 1][c] - stops_rgb[seg][c]);
      table[i][c] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return table;
}

std::array<std::array<std::uint8_t, 3>, 256> build_voc() {
  std::array<std::array<std::uint8_t, 3>, 256> table{};
  for (int i = 0; i < 256; ++i) {
    int r = 0, g = 0, b = 0, c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1) << (7 - j);
      g |= ((c >> 1) & 1) << (7 - j);
      b |= ((c >> 2) & 1) << (7 - j);
      c >>= 3;
    }
    table[i] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                static_cast<std::uint8_t>(b)};
  }
  return table;
}

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 256>& heat_colormap() {
  static const auto table = build_heat();
  return table;
}

const std::array<std::array<std::uint8_t, 3>, 256>& voc_palette() {
  static const auto table = build_voc();
  return table;
}

}  // namespace urn
