#include "urn/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "urn/colormap.hpp"

namespace urn {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
  throw IoError(std::string("libpng: ") + msg);
}

void png_warning_silencer(png_structp, png_const_charp) {}

class PngWriter {
 public:
  PngWriter(const std::filesystem::path& path, int width, int height, int color_type) {
    file_.reset(std::fopen(path.string().c_str(), "wb"));
    if (!file_) throw IoError("cannot open for writing: " + path.string());
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                   png_warning_silencer);
    if (!png_) throw IoError("png_create_write_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) throw IoError("png_create_info_struct failed");
    png_init_io(png_, file_.get());
    png_set_compression_level(png_, 6);  // pinned: output bytes must be reproducible
    png_set_IHDR(png_, info_, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  }

  ~PngWriter() {
    if (png_) png_destroy_write_struct(&png_, &info_);
  }

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  void write_rows(const std::vector<std::uint8_t>& data, int height, std::size_t stride) {
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
      rows[y] = const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * stride);
    }
    png_write_info(png_, info_);
    png_write_image(png_, rows.data());
    png_write_end(png_, nullptr);
  }

 private:
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : path_(path.string()) {
    file_.reset(std::fopen(path_.c_str(), "rb"));
    if (!file_) throw IoError("cannot open: " + path_);
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      throw IoError("not a PNG file: " + path_);
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_exception,
                                  png_warning_silencer);
    if (!png_) throw IoError("png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) throw IoError("png_create_info_struct failed");
    png_init_io(png_, file_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
  }

  ~PngReader() {
    if (png_) png_destroy_read_struct(&png_, &info_, nullptr);
  }

  int width() const { return static_cast<int>(png_get_image_width(png_, info_)); }
  int height() const { return static_cast<int>(png_get_image_height(png_, info_)); }
  int color_type() const { return png_get_color_type(png_, info_); }
  int bit_depth() const { return png_get_bit_depth(png_, info_); }
  png_structp png() { return png_; }
  png_infop info() { return info_; }
  const std::string& path() const { return path_; }

  std::vector<std::uint8_t> read_rows(std::size_t stride) {
    std::vector<std::uint8_t> data(stride * height());
    std::vector<png_bytep> rows(height());
    for (int y = 0; y < height(); ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * stride;
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
    return data;
  }

 private:
  std::string path_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

std::uint8_t quantize_weight(double v) {
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

void write_gray8(const std::vector<std::uint8_t>& bytes, int height, int width,
                 const std::filesystem::path& path) {
  PngWriter writer(path, width, height, PNG_COLOR_TYPE_GRAY);
  writer.write_rows(bytes, height, static_cast<std::size_t>(width));
}

std::vector<std::uint8_t> read_gray8(const std::filesystem::path& path, int& height, int& width) {
  PngReader reader(path);
  if (reader.color_type() != PNG_COLOR_TYPE_GRAY || reader.bit_depth() != 8) {
    throw IoError("expected an 8-bit grayscale PNG: " + reader.path());
  }
  height = reader.height();
  width = reader.width();
  return reader.read_rows(static_cast<std::size_t>(width));
}

}  // namespace

void write_mask_png(const LabelMask& mask, const std::filesystem::path& path) {
  mask.validate();
  if (mask.num_classes() > 256) {
    throw ValidationError("indexed PNG masks support at most 256 classes");
  }
  PngWriter writer(path, mask.width(), mask.height(), PNG_COLOR_TYPE_PALETTE);

  const auto& pal = voc_palette();
  std::vector<png_color> colors(256);
  for (int i = 0; i < 256; ++i) colors[i] = {pal[i][0], pal[i][1], pal[i][2]};
  png_set_PLTE(writer.png(), writer.info(), colors.data(), 256);

  std::vector<std::uint8_t> bytes(mask.pixel_count());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(mask.labels()[i]);
  }
  writer.write_rows(bytes, mask.height(), static_cast<std::size_t>(mask.width()));
}

LabelMask read_mask_png(const std::filesystem::path& path, int num_classes) {
  PngReader reader(path);
  if (reader.color_type() != PNG_COLOR_TYPE_PALETTE) {
    throw IoError("non-indexed PNG, expected a palette mask: " + reader.path());
  }
  if (reader.bit_depth() != 8) {
    throw IoError("expected 8-bit palette indices: " + reader.path());
  }
  const int h = reader.height(), w = reader.width();
  const std::vector<std::uint8_t> bytes = reader.read_rows(static_cast<std::size_t>(w));
  std::vector<std::int32_t> labels(bytes.begin(), bytes.end());
  return LabelMask(h, w, num_classes, std::move(labels));
}

void write_weight_png(const GrayMap& weights, const std::filesystem::path& path) {
  weights.validate_unit_range();
  std::vector<std::uint8_t> bytes(weights.pixel_count());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize_weight(weights.values()[i]);
  write_gray8(bytes, weights.height(), weights.width(), path);
}

GrayMap read_weight_png(const std::filesystem::path& path) {
  int h = 0, w = 0;
  const std::vector<std::uint8_t> bytes = read_gray8(path, h, w);
  GrayMap out(h, w);
  for (std::size_t i = 0; i < bytes.size(); ++i) out.values()[i] = bytes[i] / 255.0;
  return out;
}

void write_combined_png(const LabelMask& mask, const GrayMap& weights,
                        const std::filesystem::path& path) {
  mask.validate();
  weights.validate_unit_range();
  if (mask.height() != weights.height() || mask.width() != weights.width()) {
    throw ValidationError("combined PNG: mask and weight dimensions differ");
  }
  if (mask.num_classes() > 256) {
    throw ValidationError("combined PNG supports at most 256 classes");
  }
  const int h = mask.height(), w = mask.width();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bytes[static_cast<std::size_t>(y) * (2 * w) + x] = static_cast<std::uint8_t>(mask.at(y, x));
      bytes[static_cast<std::size_t>(y) * (2 * w) + w + x] = quantize_weight(weights.at(y, x));
    }
  }
  write_gray8(bytes, h, 2 * w, path);
}

std::pair<LabelMask, GrayMap> read_combined_png(const std::filesystem::path& path, int num_classes) {
  int h = 0, w2 = 0;
  const std::vector<std::uint8_t> bytes = read_gray8(path, h, w2);
  if (w2 % 2 != 0) throw IoError("combined PNG width must be even: " + path.string());
  const int w = w2 / 2;
  LabelMask mask(h, w, num_classes);
  GrayMap weights(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      mask.at(y, x) = bytes[static_cast<std::size_t>(y) * w2 + x];
      weights.at(y, x) = bytes[static_cast<std::size_t>(y) * w2 + w + x] / 255.0;
    }
  }
  mask.validate();
  return {std::move(mask), std::move(weights)};
}

void write_heatmap_png(const GrayMap& u, const std::filesystem::path& path) {
  u.validate_unit_range();
  const auto& cmap = heat_colormap();
  const int h = u.height(), w = u.width();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t i = 0; i < u.pixel_count(); ++i) {
    const auto& rgb = cmap[quantize_weight(u.values()[i])];
    bytes[i * 3 + 0] = rgb[0];
    bytes[i * 3 + 1] = rgb[1];
    bytes[i * 3 + 2] = rgb[2];
  }
  PngWriter writer(path, w, h, PNG_COLOR_TYPE_RGB);
  writer.write_rows(bytes, h, static_cast<std::size_t>(w) * 3);
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  PngWriter writer(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB);
  writer.write_rows(image.pixels(), image.height(), static_cast<std::size_t>(image.width()) * 3);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  PngReader reader(path);
  if (reader.color_type() != PNG_COLOR_TYPE_RGB || reader.bit_depth() != 8) {
    throw IoError("expected an 8-bit RGB PNG: " + reader.path());
  }
  const int h = reader.height(), w = reader.width();
  std::vector<std::uint8_t> bytes = reader.read_rows(static_cast<std::size_t>(w) * 3);
  return RgbImage(h, w, std::move(bytes));
}

}  // namespace urn
