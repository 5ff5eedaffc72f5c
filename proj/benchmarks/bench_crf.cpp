#include <benchmark/benchmark.h>

#include "urn/densecrf.hpp"
#include "urn/permutohedral.hpp"
#include "urn/rng.hpp"

using namespace urn;

namespace {

RgbImage blobby_image(int H, int W, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(H, W);
  const std::uint8_t base[4][3] = {{60, 80, 180}, {180, 60, 60}, {60, 170, 90}, {150, 150, 150}};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int blob = ((x / 90) + (y / 110)) % 4;
      for (int c = 0; c < 3; ++c) {
        const int v = base[blob][c] + static_cast<int>(rng.next_below(13)) - 6;
        img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  }
  return img;
}

ScoreMap random_probs(int C, int H, int W, std::uint64_t seed) {
  Rng rng(seed);
  ScoreMap p(C, H, W, ScoreKind::probabilities);
  const std::size_t hw = p.pixel_count();
  for (std::size_t i = 0; i < hw; ++i) {
    double sum = 0;
    std::vector<double> v(C);
    for (int c = 0; c < C; ++c) {
      v[c] = 0.02 + rng.next_double();
      sum += v[c];
    }
    for (int c = 0; c < C; ++c) p.values()[c * hw + i] = v[c] / sum;
  }
  return p;
}

}  // namespace

// The throughput target: 512x512, 21 classes, 10 mean-field iterations on a
// single core in under 5 seconds, engine construction included.
static void BM_RefineFast512x512x21(benchmark::State& state) {
  const RgbImage img = blobby_image(512, 512, 1);
  const ScoreMap p = random_probs(21, 512, 512, 2);
  CrfParams prm;
  for (auto _ : state) {
    const DenseCrf crf(img, prm, DenseCrf::Path::fast);
    benchmark::DoNotOptimize(crf.refine(p));
  }
}
BENCHMARK(BM_RefineFast512x512x21)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_RefineFast64x64x4(benchmark::State& state) {
  const RgbImage img = blobby_image(64, 64, 3);
  const ScoreMap p = random_probs(4, 64, 64, 4);
  CrfParams prm;
  for (auto _ : state) {
    const DenseCrf crf(img, prm, DenseCrf::Path::fast);
    benchmark::DoNotOptimize(crf.refine(p));
  }
}
BENCHMARK(BM_RefineFast64x64x4)->Unit(benchmark::kMillisecond);

// Engine reuse across score maps of the same image, the response-scaling
// loop's access pattern (C_bar * N refines per image).
static void BM_RefineFastReused64x64(benchmark::State& state) {
  const RgbImage img = blobby_image(64, 64, 5);
  const ScoreMap p = random_probs(4, 64, 64, 6);
  CrfParams prm;
  prm.iterations = 1;
  const DenseCrf crf(img, prm, DenseCrf::Path::fast);
  for (auto _ : state) {
    benchmark::DoNotOptimize(crf.refine(p));
  }
}
BENCHMARK(BM_RefineFastReused64x64)->Unit(benchmark::kMillisecond);

static void BM_RefineNaive32x32(benchmark::State& state) {
  const RgbImage img = blobby_image(32, 32, 7);
  const ScoreMap p = random_probs(3, 32, 32, 8);
  CrfParams prm;
  for (auto _ : state) {
    const DenseCrf crf(img, prm, DenseCrf::Path::naive);
    benchmark::DoNotOptimize(crf.refine(p));
  }
}
BENCHMARK(BM_RefineNaive32x32)->Unit(benchmark::kMillisecond);

static void BM_LatticeFilter(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(9);
  std::vector<double> features(static_cast<std::size_t>(n) * 5);
  for (auto& v : features) v = rng.next_double(0, 20);
  std::vector<double> in(static_cast<std::size_t>(n) * 4), out(in.size());
  for (auto& v : in) v = rng.next_double();
  PermutohedralLattice lattice;
  lattice.init(features, 5, n);
  PermutohedralLattice::Workspace ws;
  for (auto _ : state) {
    lattice.compute(in.data(), out.data(), 4, ws);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_LatticeFilter)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
