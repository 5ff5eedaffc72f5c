#pragma once

#include <cstdint>
#include <vector>

namespace urn {

// Approximate high-dimensional Gaussian filtering on a permutohedral lattice
// (Adams, Baek, Davis 2010). For n points with feature vectors f_i (already
// divided by the kernel standard deviations), compute() approximates
//
//   out_i = sum_j exp(-|f_i - f_j|^2 / 2) * in_j        (self term included)
//
// The lattice is built once per feature set and can then filter any number of
// value channels, so mean-field iterations reuse the splat/slice tables.
// The blur stage uses normalized (1/4, 1/2, 1/4) taps and the slice applies
// the 1/(1+2^-d) correction, keeping the implied kernel at unit peak; the
// terms a caller subtracts for self-exclusion stay on the right scale.
class PermutohedralLattice {
 public:
  PermutohedralLattice() = default;

  struct Workspace {
    std::vector<double> values;
    std::vector<double> fresh;
  };

  /// features: n * feature_dim, point-major.
  void init(const std::vector<double>& features, int feature_dim, std::size_t n);

  /// in, out: n * value_dim, point-major. Reentrant; scratch is per call.
  void compute(const double* in, double* out, int value_dim) const;
  /// Same, reusing caller-owned scratch across calls (mean-field iterations).
  void compute(const double* in, double* out, int value_dim, Workspace& ws) const;

  std::size_t lattice_point_count() const { return m_; }
  std::size_t point_count() const { return n_; }

 private:
  std::size_t n_ = 0;
  int d_ = 0;
  std::size_t m_ = 0;                    // occupied lattice points
  std::vector<std::int32_t> offset_;     // n*(d+1) lattice ids
  std::vector<double> barycentric_;      // n*(d+1) splat/slice weights
  std::vector<std::int32_t> blur_lo_;    // m*(d+1) neighbor ids, -1 if absent
  std::vector<std::int32_t> blur_hi_;    // m*(d+1)
};

}  // namespace urn
