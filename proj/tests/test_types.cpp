#include <doctest.h>

#include <cmath>

#include "urn/rng.hpp"
#include "urn/types.hpp"

using namespace urn;

namespace {

ScoreMap random_logits(int C, int H, int W, std::uint64_t seed, double lo = -50, double hi = 50) {
  Rng rng(seed);
  ScoreMap x(C, H, W, ScoreKind::logits);
  for (double& v : x.values()) v = rng.next_double(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("softmax: single class forces certainty") {
  ScoreMap x(1, 2, 2, ScoreKind::logits);
  for (double& v : x.values()) v = -17.25;
  const ScoreMap p = softmax_over_classes(x);
  for (const double v : p.values()) CHECK(v == 1.0);
}

TEST_CASE("softmax: symmetric logits split evenly") {
  ScoreMap x(2, 1, 1, ScoreKind::logits);
  x.at(0, 0, 0) = 0.0;
  x.at(1, 0, 0) = 0.0;
  const ScoreMap p = softmax_over_classes(x);
  CHECK(p.at(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.at(1, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax: closed form 1/(1+e^-1)") {
  ScoreMap x(2, 1, 1, ScoreKind::logits);
  x.at(0, 0, 0) = 1.0;
  x.at(1, 0, 0) = 0.0;
  const ScoreMap p = softmax_over_classes(x);
  CHECK(p.at(0, 0, 0) == doctest::Approx(0.7310586).epsilon(1e-7));
  CHECK(p.at(1, 0, 0) == doctest::Approx(0.2689414).epsilon(1e-7));
}

TEST_CASE("softmax: columns sum to one for wild logits") {
  const ScoreMap x = random_logits(5, 8, 8, 99);
  const ScoreMap p = softmax_over_classes(x);
  const std::size_t hw = p.pixel_count();
  for (std::size_t i = 0; i < hw; ++i) {
    double sum = 0;
    for (int c = 0; c < 5; ++c) sum += p.values()[c * hw + i];
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
  CHECK(p.is_normalized());
}

TEST_CASE("softmax rejects non-finite input") {
  ScoreMap x(2, 1, 1, ScoreKind::logits);
  x.at(0, 0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(softmax_over_classes(x), ValidationError);
}

TEST_CASE("argmax: basic and tie-break") {
  ScoreMap x(2, 1, 2, ScoreKind::probabilities);
  x.at(0, 0, 0) = 0.2;
  x.at(1, 0, 0) = 0.8;
  x.at(0, 0, 1) = 0.5;
  x.at(1, 0, 1) = 0.5;
  const LabelMask m = argmax_over_classes(x);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 1) == 0);  // tie goes to the lowest index
}

TEST_CASE("argmax matches per-pixel max-scan oracle") {
  Rng rng(7);
  ScoreMap x(3, 4, 4, ScoreKind::probabilities);
  const std::size_t hw = x.pixel_count();
  for (std::size_t i = 0; i < hw; ++i) {
    double sum = 0;
    for (int c = 0; c < 3; ++c) {
      x.values()[c * hw + i] = rng.next_double();
      sum += x.values()[c * hw + i];
    }
    for (int c = 0; c < 3; ++c) x.values()[c * hw + i] /= sum;
  }
  const LabelMask m = argmax_over_classes(x);
  // independent scan
  for (int y = 0; y < 4; ++y) {
    for (int xx = 0; xx < 4; ++xx) {
      int best = 0;
      for (int c = 1; c < 3; ++c) {
        if (x.at(c, y, xx) > x.at(best, y, xx)) best = c;
      }
      CHECK(m.at(y, xx) == best);
    }
  }
}

TEST_CASE("argmax commutes with softmax") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScoreMap x = random_logits(4, 5, 6, seed);
    const LabelMask a = argmax_over_classes(x);
    const LabelMask b = argmax_over_classes(softmax_over_classes(x));
    CHECK(a.labels() == b.labels());
  }
}

TEST_CASE("present_classes: ignore and background handling") {
  LabelMask m(2, 3, 10);
  m.labels() = {0, 255, 3, 7, 0, 255};
  CHECK(present_classes(m) == std::vector<int>{3, 7});
  CHECK(present_classes(m, true) == std::vector<int>{0, 3, 7});

  LabelMask only_bg(1, 2, 10);
  only_bg.labels() = {0, 255};
  CHECK(present_classes(only_bg).empty());

  LabelMask all_ignore(1, 2, 10);
  all_ignore.labels() = {255, 255};
  CHECK(present_classes(all_ignore, true).empty());
}

TEST_CASE("present_classes is sorted, unique, in range") {
  Rng rng(3);
  LabelMask m(16, 16, 9);
  for (auto& v : m.labels()) {
    v = rng.next_below(10) == 0 ? 255 : static_cast<std::int32_t>(rng.next_below(9));
  }
  const std::vector<int> present = present_classes(m, true);
  for (std::size_t i = 0; i + 1 < present.size(); ++i) CHECK(present[i] < present[i + 1]);
  for (const int c : present) {
    CHECK(c >= 0);
    CHECK(c < 9);
  }
}

TEST_CASE("type validation rejects bad construction") {
  CHECK_THROWS_AS(ScoreMap(0, 2, 2, ScoreKind::logits), ValidationError);
  CHECK_THROWS_AS(LabelMask(2, 2, 3, std::vector<std::int32_t>{0, 1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(GrayMap(2, 2, std::vector<double>{0, 1, 2}), ValidationError);
  CHECK_THROWS_AS(GrayMap(1, 2, std::vector<double>{0.0, std::nan("")}), ValidationError);
  // probability maps must be in [0,1]
  CHECK_THROWS_AS(ScoreMap(1, 1, 2, ScoreKind::probabilities, std::vector<double>{0.5, 1.5}),
                  ValidationError);
}
