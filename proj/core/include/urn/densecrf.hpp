#pragma once

#include <memory>

#include "urn/types.hpp"

namespace urn {

/// Fully-connected CRF with Potts compatibility and two Gaussian pairwise
/// kernels: spatial exp(-|dp|^2 / 2*theta_gamma^2) and bilateral
/// exp(-|dp|^2 / 2*theta_alpha^2 - |dI|^2 / 2*theta_beta^2).
struct CrfParams {
  int iterations = 10;
  double spatial_weight = 3.0;          // w_s
  double spatial_stddev = 3.0;          // theta_gamma, pixels
  double bilateral_weight = 4.0;        // w_b
  double bilateral_spatial_stddev = 49.0;  // theta_alpha, pixels
  double bilateral_color_stddev = 5.0;  // theta_beta, 8-bit color units
  double unary_clamp = 1e-8;            // probability floor before -log
  std::size_t naive_pixel_cap = 4096;   // refine_naive refuses larger inputs

  void validate() const;
};

/// One image's CRF state: kernels are built once from the image geometry and
/// colors, then refine() can run on any number of score maps (the response
/// scaling loop refines C_bar * N maps of the same image).
///
/// Mean-field scheme shared by both paths, per iteration and label l:
///   msg_i(l) = sum_k w_k * (sum_{j != i} k(i,j) Q_j(l)) / (sum_j k(i,j))
///   Q_i(l)  <- softmax_l(-U_i(l) + msg_i(l))
/// with U = -log(clamp(p)). The per-pixel kernel-sum normalization follows
/// standard dense-CRF implementations; it keeps messages O(w) regardless of
/// image size.
///
/// The naive path evaluates the sums exactly in O(N^2). The fast path runs
/// the spatial kernel as an exact separable convolution and picks a
/// bilateral backend by image content: an exact color-decomposed separable
/// route when there are few distinct colors (one masked convolution per
/// color group), or permutohedral-lattice filtering for general images.
/// On flat-color imagery the two paths therefore agree to truncation noise;
/// on arbitrary images the lattice's usual few-percent filter error applies.
class DenseCrf {
 public:
  enum class Path { naive, fast };

  DenseCrf(const RgbImage& image, const CrfParams& params, Path path);
  ~DenseCrf();
  DenseCrf(DenseCrf&&) noexcept;
  DenseCrf& operator=(DenseCrf&&) noexcept;

  /// p: probability map matching the image's H x W. Returns the mean-field
  /// marginals after params.iterations updates (iterations = 0 returns the
  /// clamped, renormalized input). Thread-safe for concurrent calls.
  ScoreMap refine(const ScoreMap& p) const;

  Path path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact O(N^2) mean-field; requires H*W <= params.naive_pixel_cap.
ScoreMap refine_naive(const ScoreMap& p, const RgbImage& image, const CrfParams& params);

/// Lattice-accelerated mean-field, any image size.
ScoreMap refine_fast(const ScoreMap& p, const RgbImage& image, const CrfParams& params);

}  // namespace urn
