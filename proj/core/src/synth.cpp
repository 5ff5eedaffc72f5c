#include "urn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "urn/rng.hpp"

namespace urn {

void SynthConfig::validate() const {
  if (count < 1) throw ValidationError("SynthConfig.count must be >= 1");
  if (height < 8 || width < 8) throw ValidationError("SynthConfig images must be at least 8x8");
  if (shape_classes < 1) throw ValidationError("SynthConfig.shape_classes must be >= 1");
  if (shapes_min < 1 || shapes_max < shapes_min) {
    throw ValidationError("SynthConfig shape count range is invalid");
  }
  if (color_jitter < 0 || texture_amplitude < 0) {
    throw ValidationError("SynthConfig noise magnitudes must be >= 0");
  }
  if (shape_classes > 254) throw ValidationError("SynthConfig supports at most 254 shape classes");
}

void NoiseSpec::validate() const {
  if (radius < 1) throw ValidationError("NoiseSpec.radius must be >= 1");
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("NoiseSpec.fraction must lie in [0,1]");
  }
}

namespace {

constexpr std::uint8_t kBackgroundBase[3] = {120, 120, 120};

// Saturated, mutually distant base colors; class c uses entry (c-1) % 8.
constexpr std::uint8_t kClassColors[8][3] = {
    {200, 60, 60}, {60, 180, 60},  {70, 90, 210},  {210, 190, 50},
    {190, 70, 190}, {60, 190, 190}, {230, 130, 40}, {140, 220, 90},
};

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

}  // namespace

std::vector<SynthImage> generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int h = cfg.height, w = cfg.width;
  const int size_min = std::max(4, std::min(h, w) / 6);
  const int size_max = std::max(size_min + 1, std::min(h, w) / 3);

  std::vector<SynthImage> out;
  out.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    RgbImage img(h, w);
    LabelMask gt(h, w, cfg.num_classes());

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          img.at(y, x, c) = clamp_channel(kBackgroundBase[c] + cfg.texture_amplitude * rng.next_normal());
        }
      }
    }

    const int shapes = static_cast<int>(rng.next_int(cfg.shapes_min, cfg.shapes_max));
    for (int s = 0; s < shapes; ++s) {
      const int cls = 1 + static_cast<int>(rng.next_below(cfg.shape_classes));
      const std::uint8_t* base = kClassColors[(cls - 1) % 8];
      std::uint8_t color[3];
      for (int c = 0; c < 3; ++c) {
        color[c] = clamp_channel(base[c] + cfg.color_jitter * rng.next_normal());
      }

      const auto paint = [&](int y, int x) {
        gt.at(y, x) = cls;
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
      };

      switch ((cls - 1) % 3) {
        case 0: {  // rectangle
          const int rw = static_cast<int>(rng.next_int(size_min, size_max));
          const int rh = static_cast<int>(rng.next_int(size_min, size_max));
          const int x0 = static_cast<int>(rng.next_int(0, w - rw));
          const int y0 = static_cast<int>(rng.next_int(0, h - rh));
          for (int y = y0; y < y0 + rh; ++y)
            for (int x = x0; x < x0 + rw; ++x) paint(y, x);
          break;
        }
        case 1: {  // circle
          const int r = static_cast<int>(rng.next_int(size_min / 2, size_max / 2));
          const int cx = static_cast<int>(rng.next_int(r, w - 1 - r));
          const int cy = static_cast<int>(rng.next_int(r, h - 1 - r));
          for (int y = cy - r; y <= cy + r; ++y)
            for (int x = cx - r; x <= cx + r; ++x)
              if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) paint(y, x);
          break;
        }
        default: {  // right triangle with equal legs
          const int leg = static_cast<int>(rng.next_int(size_min, size_max));
          const int x0 = static_cast<int>(rng.next_int(0, w - leg));
          const int y0 = static_cast<int>(rng.next_int(0, h - leg));
          for (int dy = 0; dy < leg; ++dy)
            for (int dx = 0; dx < leg - dy; ++dx) paint(y0 + dy, x0 + dx);
          break;
        }
      }
    }
    out.push_back({std::move(img), std::move(gt)});
  }
  return out;
}

namespace {

struct Component {
  std::int32_t cls = 0;
  std::vector<std::pair<int, int>> pixels;  // (y, x)
};

std::vector<Component> find_components(const LabelMask& gt) {
  const int h = gt.height(), w = gt.width();
  std::vector<char> visited(static_cast<std::size_t>(h) * w, 0);
  std::vector<Component> comps;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const std::int32_t cls = gt.at(y, x);
      if (visited[idx] || cls <= 0 || cls == gt.ignore_value()) continue;
      Component comp;
      comp.cls = cls;
      std::deque<std::pair<int, int>> queue{{y, x}};
      visited[idx] = 1;
      while (!queue.empty()) {
        const auto [cy, cx] = queue.front();
        queue.pop_front();
        comp.pixels.emplace_back(cy, cx);
        constexpr int dy[4] = {-1, 1, 0, 0};
        constexpr int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = cy + dy[k], nx = cx + dx[k];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (!visited[nidx] && gt.at(ny, nx) == cls) {
            visited[nidx] = 1;
            queue.emplace_back(ny, nx);
          }
        }
      }
      comps.push_back(std::move(comp));
    }
  }
  return comps;
}

}  // namespace

NoisyMask inject_noise(const LabelMask& gt, const NoiseSpec& spec) {
  spec.validate();
  gt.validate();
  const int h = gt.height(), w = gt.width();
  LabelMask noisy = gt;

  std::vector<Component> comps = find_components(gt);
  std::vector<std::size_t> order(comps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  const std::size_t selected = static_cast<std::size_t>(
      std::llround(spec.fraction * static_cast<double>(comps.size())));

  for (std::size_t k = 0; k < selected; ++k) {
    const Component& comp = comps[order[k]];
    const bool dilate = spec.mode == NoiseMode::dilate ||
                        (spec.mode == NoiseMode::mixed && k % 2 == 0);
    if (dilate) {
      // Grow over background only: other classes keep their pixels.
      for (const auto& [y, x] : comp.pixels) {
        for (int dy = -spec.radius; dy <= spec.radius; ++dy) {
          for (int dx = -spec.radius; dx <= spec.radius; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (gt.at(ny, nx) == 0 && noisy.at(ny, nx) == 0) noisy.at(ny, nx) = comp.cls;
          }
        }
      }
    } else {
      // Classic binary erosion of the instance; outside the image counts as
      // not-instance, so objects touching the border erode there too.
      std::vector<char> member(static_cast<std::size_t>(h) * w, 0);
      for (const auto& [y, x] : comp.pixels) member[static_cast<std::size_t>(y) * w + x] = 1;
      for (const auto& [y, x] : comp.pixels) {
        bool keep = true;
        for (int dy = -spec.radius; keep && dy <= spec.radius; ++dy) {
          for (int dx = -spec.radius; dx <= spec.radius; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w ||
                !member[static_cast<std::size_t>(ny) * w + nx]) {
              keep = false;
              break;
            }
          }
        }
        if (!keep) noisy.at(y, x) = 0;
      }
    }
  }

  GrayMap indicator(h, w);
  for (std::size_t p = 0; p < indicator.pixel_count(); ++p) {
    indicator.values()[p] = noisy.labels()[p] != gt.labels()[p] ? 1.0 : 0.0;
  }
  return {std::move(noisy), std::move(indicator)};
}

}  // namespace urn
