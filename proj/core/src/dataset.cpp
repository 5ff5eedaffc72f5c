#include "urn/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "urn/png_io.hpp"

namespace urn {

std::string image_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu", index);
  return buf;
}

namespace {

std::string noise_mode_name(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::dilate: return "dilate";
    case NoiseMode::erode: return "erode";
    case NoiseMode::mixed: return "mixed";
  }
  return "mixed";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_synth_dataset(const std::filesystem::path& root, const SynthConfig& cfg,
                         const std::optional<NoiseSpec>& noise) {
  cfg.validate();
  if (noise) noise->validate();

  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"images", "gt", "noisy", "noise"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError("cannot create " + (root / sub).string() + ": " + ec.message());
  }

  const std::vector<SynthImage> data = generate(cfg);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string stem = image_stem(i) + ".png";
    write_rgb_png(data[i].image, root / "images" / stem);
    write_mask_png(data[i].ground_truth, root / "gt" / stem);
    if (noise) {
      NoiseSpec per_image = *noise;
      per_image.seed = noise->seed + i;  // independent stream per image
      const NoisyMask corrupted = inject_noise(data[i].ground_truth, per_image);
      write_mask_png(corrupted.noisy, root / "noisy" / stem);
      write_weight_png(corrupted.noise_indicator, root / "noise" / stem);
    } else {
      write_mask_png(data[i].ground_truth, root / "noisy" / stem);
      write_weight_png(GrayMap(cfg.height, cfg.width, 0.0), root / "noise" / stem);
    }
  }

  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest: " + (root / "manifest.txt").string());
  manifest << "count = " << cfg.count << "\n"
           << "height = " << cfg.height << "\n"
           << "width = " << cfg.width << "\n"
           << "shape_classes = " << cfg.shape_classes << "\n"
           << "num_classes = " << cfg.num_classes() << "\n"
           << "shapes_min = " << cfg.shapes_min << "\n"
           << "shapes_max = " << cfg.shapes_max << "\n"
           << "color_jitter = " << format_double(cfg.color_jitter) << "\n"
           << "texture_amplitude = " << format_double(cfg.texture_amplitude) << "\n"
           << "seed = " << cfg.seed << "\n"
           << "noise_mode = " << (noise ? noise_mode_name(noise->mode) : "none") << "\n";
  if (noise) {
    manifest << "noise_radius = " << noise->radius << "\n"
             << "noise_fraction = " << format_double(noise->fraction) << "\n"
             << "noise_seed = " << noise->seed << "\n";
  }
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& root) {
  std::ifstream f(root / "manifest.txt");
  if (!f) throw IoError("missing manifest: " + (root / "manifest.txt").string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t");
      const std::size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& root) {
  const auto manifest = read_manifest(root);
  const auto get = [&](const std::string& key) -> std::string {
    const auto it = manifest.find(key);
    if (it == manifest.end()) throw IoError("manifest missing key '" + key + "'");
    return it->second;
  };
  const std::size_t count = std::stoull(get("count"));
  Dataset ds;
  ds.num_classes = std::stoi(get("num_classes"));

  const bool has_noise = std::filesystem::exists(root / "noisy" / (image_stem(0) + ".png"));
  for (std::size_t i = 0; i < count; ++i) {
    const std::string stem = image_stem(i) + ".png";
    ds.images.push_back(read_rgb_png(root / "images" / stem));
    ds.ground_truth.push_back(read_mask_png(root / "gt" / stem, ds.num_classes));
    if (has_noise) {
      ds.noisy.push_back(read_mask_png(root / "noisy" / stem, ds.num_classes));
      const std::filesystem::path noise_path = root / "noise" / stem;
      if (std::filesystem::exists(noise_path)) {
        ds.noise_indicator.push_back(read_weight_png(noise_path));
      }
    }
  }
  return ds;
}

}  // namespace urn
