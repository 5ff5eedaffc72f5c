#include "urn/densecrf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>

#include "urn/permutohedral.hpp"

namespace urn {

void CrfParams::validate() const {
  if (iterations < 0) throw ValidationError("CrfParams.iterations must be >= 0");
  if (spatial_weight < 0 || bilateral_weight < 0) {
    throw ValidationError("CRF kernel weights must be >= 0");
  }
  if (spatial_stddev <= 0 || bilateral_spatial_stddev <= 0 || bilateral_color_stddev <= 0) {
    throw ValidationError("CRF kernel stddevs must be > 0");
  }
  if (unary_clamp <= 0) throw ValidationError("CrfParams.unary_clamp must be > 0");
}

namespace {

// The color-decomposed bilateral route engages when an image has at most
// this many distinct colors and at most this many pixels. Beyond either
// limit the permutohedral lattice takes over.
constexpr std::size_t kColorGroupBudget = 48;
constexpr std::size_t kColorRouteMaxPixels = 16384;
// Color weights below this threshold are dropped from the per-group
// scatter lists; with <= 48 groups the induced message error is < 5e-6.
constexpr double kColorWeightFloor = 1e-7;

std::vector<double> gaussian_taps(double stddev, int radius) {
  std::vector<double> taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-0.5 * (static_cast<double>(k) * k) / (stddev * stddev));
  }
  return taps;
}

// Separable 2-D Gaussian convolution on a pixel-major (H*W) x C buffer.
// Borders truncate (no padding), matching the exact kernel sum over the
// image domain. Unit peak, no normalization.
class SeparableConv {
 public:
  SeparableConv() = default;
  SeparableConv(int height, int width, double stddev)
      : h_(height), w_(width), radius_(static_cast<int>(std::ceil(6.0 * stddev))),
        taps_(gaussian_taps(stddev, radius_)) {}

  void apply(const double* in, double* out, int value_dim, std::vector<double>& scratch) const {
    const int C = value_dim;
    const std::size_t n = static_cast<std::size_t>(h_) * w_;
    scratch.assign(n * C, 0.0);
    // rows
    for (int y = 0; y < h_; ++y) {
      const double* row_in = in + static_cast<std::size_t>(y) * w_ * C;
      double* row_out = scratch.data() + static_cast<std::size_t>(y) * w_ * C;
      for (int x = 0; x < w_; ++x) {
        const int k0 = std::max(-radius_, -x);
        const int k1 = std::min(radius_, w_ - 1 - x);
        double* dst = row_out + static_cast<std::size_t>(x) * C;
        for (int k = k0; k <= k1; ++k) {
          const double t = taps_[k + radius_];
          const double* src = row_in + static_cast<std::size_t>(x + k) * C;
          for (int c = 0; c < C; ++c) dst[c] += t * src[c];
        }
      }
    }
    // columns
    std::fill(out, out + n * C, 0.0);
    for (int y = 0; y < h_; ++y) {
      const int k0 = std::max(-radius_, -y);
      const int k1 = std::min(radius_, h_ - 1 - y);
      double* dst_row = out + static_cast<std::size_t>(y) * w_ * C;
      for (int k = k0; k <= k1; ++k) {
        const double t = taps_[k + radius_];
        const double* src_row = scratch.data() + static_cast<std::size_t>(y + k) * w_ * C;
        for (std::size_t i = 0; i < static_cast<std::size_t>(w_) * C; ++i) {
          dst_row[i] += t * src_row[i];
        }
      }
    }
  }

 private:
  int h_ = 0, w_ = 0, radius_ = 0;
  std::vector<double> taps_;
};

// Exact bilateral messages for images with few distinct colors: the kernel
// factors into g_color(I_i, c_g) * g_spatial, so one masked spatial
// convolution per color group followed by a sparse color-weighted gather
// reproduces the full 5-D Gaussian sum.
class ColorDecomposedBilateral {
 public:
  ColorDecomposedBilateral(const RgbImage& img, double spatial_stddev, double color_stddev,
                           int group_count, const std::vector<int>& group_of_pixel)
      : h_(img.height()), w_(img.width()), groups_(group_count),
        group_of_pixel_(group_of_pixel), conv_(img.height(), img.width(), spatial_stddev) {
    const std::size_t n = static_cast<std::size_t>(h_) * w_;
    // representative color per group (first occurrence)
    std::vector<std::array<double, 3>> color(groups_);
    std::vector<char> seen(groups_, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int g = group_of_pixel_[i];
      if (!seen[g]) {
        seen[g] = 1;
        const int y = static_cast<int>(i) / w_, x = static_cast<int>(i) % w_;
        color[g] = {static_cast<double>(img.at(y, x, 0)), static_cast<double>(img.at(y, x, 1)),
                    static_cast<double>(img.at(y, x, 2))};
      }
    }
    // per-group scatter lists: pixels whose color responds to that group
    scatter_.resize(groups_);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ci = color[group_of_pixel_[i]];
      for (int g = 0; g < groups_; ++g) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = (ci[c] - color[g][c]) / color_stddev;
          d2 += d * d;
        }
        const double wgt = std::exp(-0.5 * d2);
        if (wgt >= kColorWeightFloor) scatter_[g].push_back({static_cast<std::uint32_t>(i), wgt});
      }
    }
  }

  void apply(const double* in, double* out, int value_dim, std::vector<double>& masked,
             std::vector<double>& conv_out, std::vector<double>& conv_scratch) const {
    const int C = value_dim;
    const std::size_t n = static_cast<std::size_t>(h_) * w_;
    std::fill(out, out + n * C, 0.0);
    for (int g = 0; g < groups_; ++g) {
      masked.assign(n * C, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (group_of_pixel_[i] == g) {
          for (int c = 0; c < C; ++c) masked[i * C + c] = in[i * C + c];
        }
      }
      conv_out.resize(n * C);
      conv_.apply(masked.data(), conv_out.data(), C, conv_scratch);
      for (const auto& [pixel, wgt] : scatter_[g]) {
        double* dst = out + static_cast<std::size_t>(pixel) * C;
        const double* src = conv_out.data() + static_cast<std::size_t>(pixel) * C;
        for (int c = 0; c < C; ++c) dst[c] += wgt * src[c];
      }
    }
  }

 private:
  struct Hit {
    std::uint32_t pixel;
    double weight;
  };
  int h_, w_, groups_;
  std::vector<int> group_of_pixel_;
  SeparableConv conv_;
  std::vector<std::vector<Hit>> scatter_;
};

std::vector<double> bilateral_features(const RgbImage& img, double sp_stddev, double col_stddev) {
  const int height = img.height(), width = img.width();
  std::vector<double> f(static_cast<std::size_t>(height) * width * 5);
  std::size_t i = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f[i++] = x / sp_stddev;
      f[i++] = y / sp_stddev;
      f[i++] = img.at(y, x, 0) / col_stddev;
      f[i++] = img.at(y, x, 1) / col_stddev;
      f[i++] = img.at(y, x, 2) / col_stddev;
    }
  }
  return f;
}

std::vector<double> spatial_features(int height, int width, double stddev) {
  std::vector<double> f(static_cast<std::size_t>(height) * width * 2);
  std::size_t i = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      f[i++] = x / stddev;
      f[i++] = y / stddev;
    }
  }
  return f;
}

// Exact unit-peak Gaussian kernel matrix (naive path).
std::vector<double> exact_kernel_matrix(const std::vector<double>& features, int dim,
                                        std::size_t n) {
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double d = features[i * dim + c] - features[j * dim + c];
        d2 += d * d;
      }
      const double v = std::exp(-0.5 * d2);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

struct Scratch {
  std::vector<double> a, b, c;
  PermutohedralLattice::Workspace lattice;
};

// One pairwise kernel with whichever backend the path selected.
struct Kernel {
  double weight = 0.0;
  std::vector<double> matrix;  // naive
  std::unique_ptr<SeparableConv> separable;              // fast, spatial
  std::unique_ptr<ColorDecomposedBilateral> color_route;  // fast, bilateral, few colors
  std::unique_ptr<PermutohedralLattice> lattice;          // fast, bilateral, general
  std::vector<double> norm;  // filter response to ones (row sums, self included)
  int h = 0, w = 0;

  void filter(const double* in, double* out, int value_dim, Scratch& s) const {
    if (!matrix.empty()) {
      const std::size_t n = static_cast<std::size_t>(h) * w;
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = matrix.data() + i * n;
        double* dst = out + i * value_dim;
        std::fill(dst, dst + value_dim, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          const double kv = row[j];
          const double* src = in + j * value_dim;
          for (int c = 0; c < value_dim; ++c) dst[c] += kv * src[c];
        }
      }
    } else if (separable) {
      separable->apply(in, out, value_dim, s.a);
    } else if (color_route) {
      color_route->apply(in, out, value_dim, s.a, s.b, s.c);
    } else {
      lattice->compute(in, out, value_dim, s.lattice);
    }
  }
};

}  // namespace

struct DenseCrf::Impl {
  int height = 0, width = 0;
  CrfParams params;
  Path path = Path::fast;
  std::vector<Kernel> kernels;
};

DenseCrf::DenseCrf(const RgbImage& image, const CrfParams& params, Path path)
    : impl_(std::make_unique<Impl>()) {
  params.validate();
  impl_->height = image.height();
  impl_->width = image.width();
  impl_->params = params;
  impl_->path = path;

  const std::size_t n = static_cast<std::size_t>(image.height()) * image.width();
  if (path == Path::naive && n > params.naive_pixel_cap) {
    throw ValidationError("refine_naive: " + std::to_string(n) + " pixels exceed the naive cap of " +
                          std::to_string(params.naive_pixel_cap) + "; use refine_fast");
  }

  // Spatial kernel.
  if (params.spatial_weight > 0.0) {
    Kernel k;
    k.weight = params.spatial_weight;
    k.h = image.height();
    k.w = image.width();
    if (path == Path::naive) {
      k.matrix = exact_kernel_matrix(spatial_features(k.h, k.w, params.spatial_stddev), 2, n);
    } else {
      k.separable = std::make_unique<SeparableConv>(k.h, k.w, params.spatial_stddev);
    }
    impl_->kernels.push_back(std::move(k));
  }

  // Bilateral kernel.
  if (params.bilateral_weight > 0.0) {
    Kernel k;
    k.weight = params.bilateral_weight;
    k.h = image.height();
    k.w = image.width();
    if (path == Path::naive) {
      k.matrix = exact_kernel_matrix(
          bilateral_features(image, params.bilateral_spatial_stddev, params.bilateral_color_stddev),
          5, n);
    } else {
      // Group pixels by exact color to decide the bilateral backend.
      std::unordered_map<std::uint32_t, int> color_ids;
      std::vector<int> group(n, 0);
      bool few_colors = n <= kColorRouteMaxPixels;
      if (few_colors) {
        for (std::size_t i = 0; i < n && few_colors; ++i) {
          const int y = static_cast<int>(i) / k.w, x = static_cast<int>(i) % k.w;
          const std::uint32_t key = (static_cast<std::uint32_t>(image.at(y, x, 0)) << 16) |
                                    (static_cast<std::uint32_t>(image.at(y, x, 1)) << 8) |
                                    image.at(y, x, 2);
          auto [it, inserted] = color_ids.try_emplace(key, static_cast<int>(color_ids.size()));
          group[i] = it->second;
          if (color_ids.size() > kColorGroupBudget) few_colors = false;
        }
      }
      if (few_colors) {
        k.color_route = std::make_unique<ColorDecomposedBilateral>(
            image, params.bilateral_spatial_stddev, params.bilateral_color_stddev,
            static_cast<int>(color_ids.size()), group);
      } else {
        k.lattice = std::make_unique<PermutohedralLattice>();
        k.lattice->init(
            bilateral_features(image, params.bilateral_spatial_stddev, params.bilateral_color_stddev),
            5, n);
      }
    }
    impl_->kernels.push_back(std::move(k));
  }

  // Row sums (self included) for the per-pixel message normalization.
  Scratch scratch;
  std::vector<double> ones(n, 1.0);
  for (Kernel& k : impl_->kernels) {
    k.norm.assign(n, 0.0);
    k.filter(ones.data(), k.norm.data(), 1, scratch);
    for (double& v : k.norm) v = std::max(v, 1e-12);
  }
}

DenseCrf::~DenseCrf() = default;
DenseCrf::DenseCrf(DenseCrf&&) noexcept = default;
DenseCrf& DenseCrf::operator=(DenseCrf&&) noexcept = default;

DenseCrf::Path DenseCrf::path() const { return impl_->path; }

ScoreMap DenseCrf::refine(const ScoreMap& p) const {
  if (p.kind() != ScoreKind::probabilities) {
    throw ValidationError("DenseCrf::refine expects a probability map");
  }
  if (p.height() != impl_->height || p.width() != impl_->width) {
    throw ValidationError("DenseCrf::refine: score map is " + std::to_string(p.height()) + "x" +
                          std::to_string(p.width()) + " but the image is " +
                          std::to_string(impl_->height) + "x" + std::to_string(impl_->width));
  }

  const int C = p.classes();
  const std::size_t n = p.pixel_count();
  const CrfParams& prm = impl_->params;

  // Unary energies and the initial marginals Q0 = softmax(-U), i.e. the
  // clamped input renormalized per pixel. Pixel-major layout from here on.
  std::vector<double> unary(n * C);
  std::vector<double> q(n * C);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
      const double pv = std::max(p.values()[c * n + i], prm.unary_clamp);
      unary[i * C + c] = -std::log(pv);
      q[i * C + c] = pv;
      sum += pv;
    }
    for (int c = 0; c < C; ++c) q[i * C + c] /= sum;
  }

  Scratch scratch;
  std::vector<double> filtered(n * C);
  std::vector<double> msg(n * C);
  std::vector<double> logits(C);
  for (int it = 0; it < prm.iterations; ++it) {
    std::fill(msg.begin(), msg.end(), 0.0);
    for (const Kernel& k : impl_->kernels) {
      k.filter(q.data(), filtered.data(), C, scratch);
      for (std::size_t i = 0; i < n; ++i) {
        const double scale = k.weight / k.norm[i];
        for (int c = 0; c < C; ++c) {
          // Exclude the self term: kernel peak is 1 at i == j.
          msg[i * C + c] += scale * (filtered[i * C + c] - q[i * C + c]);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double max_logit = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < C; ++c) {
        logits[c] = -unary[i * C + c] + msg[i * C + c];
        max_logit = std::max(max_logit, logits[c]);
      }
      double sum = 0.0;
      for (int c = 0; c < C; ++c) {
        const double e = std::exp(logits[c] - max_logit);
        q[i * C + c] = e;
        sum += e;
      }
      for (int c = 0; c < C; ++c) q[i * C + c] /= sum;
    }
  }

  ScoreMap out(C, p.height(), p.width(), ScoreKind::probabilities);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < C; ++c) out.values()[c * n + i] = q[i * C + c];
  }
  return out;
}

ScoreMap refine_naive(const ScoreMap& p, const RgbImage& image, const CrfParams& params) {
  return DenseCrf(image, params, DenseCrf::Path::naive).refine(p);
}

ScoreMap refine_fast(const ScoreMap& p, const RgbImage& image, const CrfParams& params) {
  return DenseCrf(image, params, DenseCrf::Path::fast).refine(p);
}

}  // namespace urn
