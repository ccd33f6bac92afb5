#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "peace/errors.h"
#include "peace/fusion.h"
#include "peace/mock_backend.h"
#include "peace/world_gen.h"
#include "test_support.h"

using namespace peace;

namespace {

LogitStack stack_of(int w, int h, const std::vector<std::vector<float>>& channels) {
  LogitStack s;
  s.width = w;
  s.height = h;
  for (const auto& c : channels) {
    LogitMap m(w, h);
    m.values = c;
    s.channels.push_back(m);
  }
  return s;
}

LogitStack random_stack(std::mt19937_64& rng, int w, int h, int k, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  LogitStack s;
  s.width = w;
  s.height = h;
  for (int c = 0; c < k; ++c) {
    LogitMap m(w, h);
    // Multiples of 2^-10 keep shifted copies exactly representable.
    for (auto& v : m.values) v = static_cast<float>(std::round(u(rng) * 1024.0) / 1024.0);
    s.channels.push_back(m);
  }
  return s;
}

}  // namespace

TEST_CASE("softmax of (2, 1, 0) matches the hand-computed probabilities") {
  const auto fused = softmax_fuse(stack_of(1, 1, {{2.0f}, {1.0f}, {0.0f}}));
  // e^2, e^1, e^0 normalized by their sum 11.1073.
  CHECK(fused.channels[0].values[0] == doctest::Approx(0.665241).epsilon(1e-5));
  CHECK(fused.channels[1].values[0] == doctest::Approx(0.244728).epsilon(1e-5));
  CHECK(fused.channels[2].values[0] == doctest::Approx(0.090031).epsilon(1e-5));
}

TEST_CASE("two positives of (2, 1, 0) collapse to 0.9100") {
  const auto heat = fuse_logits(stack_of(1, 1, {{2.0f}, {1.0f}, {0.0f}}), 2, 1);
  CHECK(heat.values[0] == doctest::Approx(0.909969).epsilon(1e-5));
  const auto max_heat = fuse_logits(stack_of(1, 1, {{2.0f}, {1.0f}, {0.0f}}), 2, 1, CollapseMode::max);
  CHECK(max_heat.values[0] == doctest::Approx(0.665241).epsilon(1e-5));
}

TEST_CASE("per-pixel probabilities sum to one for several channel counts") {
  std::mt19937_64 rng(3);
  for (int k : {1, 2, 5, 13}) {
    const auto fused = softmax_fuse(random_stack(rng, 9, 7, k, 20.0));
    for (std::size_t i = 0; i < fused.channels[0].size(); ++i) {
      double sum = 0.0;
      for (const auto& c : fused.channels) sum += c.values[i];
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("softmax is unchanged by a per-pixel shift of every channel") {
  std::mt19937_64 rng(4);
  auto s = random_stack(rng, 5, 5, 4, 5.0);
  auto shifted = s;
  for (auto& c : shifted.channels) {
    for (auto& v : c.values) v += 64.0f;  // exactly representable shift
  }
  const auto a = softmax_fuse(s);
  const auto b = softmax_fuse(shifted);
  for (std::size_t c = 0; c < a.k(); ++c) {
    for (std::size_t i = 0; i < a.channels[c].size(); ++i) {
      CHECK(a.channels[c].values[i] == b.channels[c].values[i]);
    }
  }
}

TEST_CASE("large logits stay finite") {
  const auto fused = softmax_fuse(stack_of(1, 1, {{1000.0f}, {999.0f}}));
  CHECK(std::isfinite(fused.channels[0].values[0]));
  CHECK(fused.channels[0].values[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("a non-finite logit is reported with its location") {
  auto s = stack_of(2, 1, {{0.0f, std::numeric_limits<float>::quiet_NaN()}, {0.0f, 0.0f}});
  CHECK_THROWS_AS(softmax_fuse(s), ComputationError);
  s.channels[0].values[1] = std::numeric_limits<float>::infinity();
  try {
    softmax_fuse(s);
    FAIL("expected a ComputationError");
  } catch (const ComputationError& e) {
    CHECK(std::string(e.what()).find("(1, 0)") != std::string::npos);
  }
}

TEST_CASE("dropping negatives keeps the positive channels bit for bit") {
  std::mt19937_64 rng(5);
  const auto fused = softmax_fuse(random_stack(rng, 6, 4, 5, 3.0));
  const auto kept = drop_negatives(fused, 3, 2);
  REQUIRE(kept.k() == 3);
  for (std::size_t c = 0; c < 3; ++c) CHECK(kept.channels[c] == fused.channels[c]);
  CHECK_THROWS_AS(drop_negatives(fused, 3, 1), ContractError);
}

TEST_CASE("2x2 fusion agrees with a scalar brute-force oracle") {
  std::mt19937_64 rng(6);
  const auto s = random_stack(rng, 2, 2, 4, 6.0);
  const auto heat = fuse_logits(s, 2, 2);
  for (int i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (int c = 0; c < 4; ++c) denom += std::exp(static_cast<double>(s.channels[c].values[i]));
    const double expect = (std::exp(static_cast<double>(s.channels[0].values[i])) +
                           std::exp(static_cast<double>(s.channels[1].values[i]))) /
                          denom;
    CHECK(std::abs(heat.values[i] - expect) < 1e-9);
  }
}

TEST_CASE("a single positive channel yields a heatmap of ones") {
  std::mt19937_64 rng(7);
  const auto heat = fuse_logits(random_stack(rng, 4, 4, 1, 10.0), 1, 0);
  for (double v : heat.values) CHECK(v == 1.0);
}

TEST_CASE("collapse rejects an empty positive set") {
  FusedStack empty;
  CHECK_THROWS(collapse(empty));
}

TEST_CASE("mock world: water scores lower than grass in the fused heatmap") {
  auto backend = testing::mock_backend(11, 64);
  const auto vocab = testing::default_vocab(*backend);
  const auto targets = testing::default_targets();
  const World world = make_shape_world(64, 64, 1.0, "grass", {{0, 0, 32, 64, "water"}}, {}, {}, 1);
  RgbImage image = world.ortho;
  image.annotation = SyntheticAnnotation{{}, world.labels, world.classes};
  PromptConfig cfg;
  cfg.mode = PromptMode::plain;
  const auto set = generate_prompt_set(image, targets, *vocab, *backend, 0, cfg);
  const auto heat = fuse_pipeline(image, set, *backend);
  double water = 0.0, grass = 0.0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) (x < 32 ? water : grass) += heat.values.at(x, y);
  }
  CHECK(water < grass);

  // The grass channel outranks the building channel over grass pixels.
  const auto stack = segment_all(image, set, *backend);
  std::size_t grass_idx = 0, building_idx = 0;
  for (std::size_t i = 0; i < set.prompts.size(); ++i) {
    if (set.prompts[i].class_word == "grass") grass_idx = i;
    if (set.prompts[i].class_word == "building") building_idx = i;
  }
  double g = 0.0, b = 0.0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 32; x < 64; ++x) {
      g += stack.channels[grass_idx].at(x, y);
      b += stack.channels[building_idx].at(x, y);
    }
  }
  CHECK(g > b);
}

TEST_CASE("segment_all names the failing prompt") {
  auto backend = testing::mock_backend();
  PromptSet set;
  set.prompts = {{"A photo of grass.", "grass", Polarity::positive}, {"   ", "x", Polarity::negative}};
  set.x = 1;
  set.y = 1;
  RgbImage image(8, 8);
  try {
    segment_all(image, set, *backend);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'   '") != std::string::npos);
  }
}
