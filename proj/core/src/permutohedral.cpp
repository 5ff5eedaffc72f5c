#include "urn/permutohedral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "urn/common.hpp"

namespace urn {

namespace {

// Hash for short integer key vectors (first d lattice coordinates).
struct KeyHash {
  std::size_t operator()(const std::vector<std::int16_t>& k) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const std::int16_t v : k) {
      h ^= static_cast<std::uint16_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

void PermutohedralLattice::init(const std::vector<double>& features, int feature_dim,
                                std::size_t n) {
  if (feature_dim < 1) throw ValidationError("lattice feature dimension must be >= 1");
  if (features.size() != n * static_cast<std::size_t>(feature_dim)) {
    throw ValidationError("lattice feature buffer size mismatch");
  }
  n_ = n;
  d_ = feature_dim;
  const int d = d_;

  offset_.assign(n_ * (d + 1), 0);
  barycentric_.assign(n_ * (d + 1), 0.0);

  // E-matrix scaling so the splat/blur/slice chain approximates a unit
  // Gaussian in feature space.
  std::vector<double> scale_factor(d);
  const double inv_std_dev = std::sqrt(2.0 / 3.0) * (d + 1);
  for (int i = 0; i < d; ++i) {
    scale_factor[i] = inv_std_dev / std::sqrt(static_cast<double>((i + 1) * (i + 2)));
  }

  // canonical[r][rank]: coordinate delta of simplex corner r.
  std::vector<int> canonical((d + 1) * (d + 1));
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d - i; ++j) canonical[i * (d + 1) + j] = i;
    for (int j = d - i + 1; j <= d; ++j) canonical[i * (d + 1) + j] = i - (d + 1);
  }

  std::unordered_map<std::vector<std::int16_t>, std::int32_t, KeyHash> hash;
  hash.reserve(n_ * 2);
  std::vector<std::vector<std::int16_t>> keys;  // insertion order, for blur tables

  std::vector<double> elevated(d + 1);
  std::vector<int> rem0(d + 1), rank(d + 1);
  std::vector<double> bary(d + 2);
  std::vector<std::int16_t> key(d);

  const double down_factor = 1.0 / (d + 1);

  for (std::size_t i = 0; i < n_; ++i) {
    const double* f = features.data() + i * d;

    // Embed into the hyperplane sum(x) = 0.
    double sm = 0.0;
    for (int j = d; j > 0; --j) {
      const double cf = f[j - 1] * scale_factor[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    // Closest zero-colored lattice point: round to multiples of d+1.
    int sum = 0;
    for (int j = 0; j <= d; ++j) {
      const double v = elevated[j] * down_factor;
      const int rd = static_cast<int>(std::lround(v));
      rem0[j] = rd * (d + 1);
      sum += rd;
      rank[j] = 0;
    }

    // Rank differentials to find the simplex containing the point.
    for (int a = 0; a < d; ++a) {
      const double da = elevated[a] - rem0[a];
      for (int b = a + 1; b <= d; ++b) {
        if (da < elevated[b] - rem0[b]) {
          ++rank[a];
        } else {
          ++rank[b];
        }
      }
    }

    // Repair points rounded to the wrong color (sum != 0).
    for (int j = 0; j <= d; ++j) {
      rank[j] += sum;
      if (rank[j] < 0) {
        rank[j] += d + 1;
        rem0[j] += d + 1;
      } else if (rank[j] > d) {
        rank[j] -= d + 1;
        rem0[j] -= d + 1;
      }
      if (rem0[j] > 30000 || rem0[j] < -30000) {
        throw ValidationError("lattice coordinate overflow: kernel stddev too small for the data range");
      }
    }

    std::fill(bary.begin(), bary.end(), 0.0);
    for (int j = 0; j <= d; ++j) {
      const double v = (elevated[j] - rem0[j]) * down_factor;
      bary[d - rank[j]] += v;
      bary[d + 1 - rank[j]] -= v;
    }
    bary[0] += 1.0 + bary[d + 1];

    for (int r = 0; r <= d; ++r) {
      for (int j = 0; j < d; ++j) {
        key[j] = static_cast<std::int16_t>(rem0[j] + canonical[r * (d + 1) + rank[j]]);
      }
      auto it = hash.find(key);
      std::int32_t id;
      if (it == hash.end()) {
        id = static_cast<std::int32_t>(keys.size());
        hash.emplace(key, id);
        keys.push_back(key);
      } else {
        id = it->second;
      }
      offset_[i * (d + 1) + r] = id;
      barycentric_[i * (d + 1) + r] = bary[r];
    }
  }

  m_ = keys.size();

  // Blur neighbors along each lattice axis. Only the first d coordinates are
  // stored; the last one is implied by the zero-sum constraint, so axis d
  // needs no special case.
  blur_lo_.assign(m_ * (d + 1), -1);
  blur_hi_.assign(m_ * (d + 1), -1);
  std::vector<std::int16_t> nlo(d), nhi(d);
  for (std::size_t l = 0; l < m_; ++l) {
    const auto& k = keys[l];
    for (int j = 0; j <= d; ++j) {
      for (int c = 0; c < d; ++c) {
        nlo[c] = static_cast<std::int16_t>(k[c] - 1);
        nhi[c] = static_cast<std::int16_t>(k[c] + 1);
      }
      if (j < d) {
        nlo[j] = static_cast<std::int16_t>(k[j] + d);
        nhi[j] = static_cast<std::int16_t>(k[j] - d);
      }
      const auto lo = hash.find(nlo);
      const auto hi = hash.find(nhi);
      blur_lo_[l * (d + 1) + j] = lo == hash.end() ? -1 : lo->second;
      blur_hi_[l * (d + 1) + j] = hi == hash.end() ? -1 : hi->second;
    }
  }
}

void PermutohedralLattice::compute(const double* in, double* out, int value_dim) const {
  Workspace ws;
  compute(in, out, value_dim, ws);
}

void PermutohedralLattice::compute(const double* in, double* out, int value_dim,
                                   Workspace& ws) const {
  const int d = d_;
  const int vd = value_dim;
  // Slot 0 is a zero sink for missing blur neighbors.
  std::vector<double>& values = ws.values;
  std::vector<double>& fresh = ws.fresh;
  values.assign((m_ + 1) * vd, 0.0);
  fresh.assign((m_ + 1) * vd, 0.0);

  // Splat.
  for (std::size_t i = 0; i < n_; ++i) {
    for (int r = 0; r <= d; ++r) {
      const std::size_t l = static_cast<std::size_t>(offset_[i * (d + 1) + r]) + 1;
      const double w = barycentric_[i * (d + 1) + r];
      double* dst = values.data() + l * vd;
      const double* src = in + i * vd;
      for (int k = 0; k < vd; ++k) dst[k] += w * src[k];
    }
  }

  // Blur along each axis with (1, 2, 1) / 2 taps: the center keeps unit
  // gain, so the implied kernel stays at k(i,i) ~= 1 and self-subtraction
  // by callers is on the right scale.
  for (int j = 0; j <= d; ++j) {
    for (std::size_t l = 0; l < m_; ++l) {
      const std::int32_t lo = blur_lo_[l * (d + 1) + j];
      const std::int32_t hi = blur_hi_[l * (d + 1) + j];
      const double* vlo = values.data() + static_cast<std::size_t>(lo + 1) * vd;
      const double* vhi = values.data() + static_cast<std::size_t>(hi + 1) * vd;
      const double* v = values.data() + (l + 1) * vd;
      double* nv = fresh.data() + (l + 1) * vd;
      for (int k = 0; k < vd; ++k) nv[k] = v[k] + 0.5 * (vlo[k] + vhi[k]);
    }
    std::swap(values, fresh);
  }

  // Slice.
  const double alpha = 1.0 / (1.0 + std::pow(2.0, -d));
  for (std::size_t i = 0; i < n_; ++i) {
    double* dst = out + i * vd;
    std::fill(dst, dst + vd, 0.0);
    for (int r = 0; r <= d; ++r) {
      const std::size_t l = static_cast<std::size_t>(offset_[i * (d + 1) + r]) + 1;
      const double w = barycentric_[i * (d + 1) + r] * alpha;
      const double* src = values.data() + l * vd;
      for (int k = 0; k < vd; ++k) dst[k] += w * src[k];
    }
  }
}

}  // namespace urn
