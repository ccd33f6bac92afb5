#include <doctest.h>

#include <cmath>

#include "peace/errors.h"
#include "peace/simulator.h"
#include "peace/world.h"
#include "peace/world_gen.h"
#include "test_support.h"

using namespace peace;

namespace {

EpisodeSetup small_setup(std::uint64_t seed = 7) {
  EpisodeSetup s;
  s.backend = testing::mock_backend(seed, 32);
  s.vocab = testing::default_vocab(*s.backend);
  s.targets = testing::default_targets();
  s.sim.camera_resolution = 32;
  return s;
}

}  // namespace

TEST_CASE("footprint side follows 2 h tan(fov / 2)") {
  CHECK(footprint_side(100.0, 60.0) == doctest::Approx(115.47).epsilon(1e-4));
  CHECK(footprint_side(50.0, 60.0) == doctest::Approx(footprint_side(100.0, 60.0) / 2.0));
}

TEST_CASE("camera view samples the world and flags partial footprints") {
  const World w = make_shape_world(200, 200, 1.0, "grass", {{0, 0, 100, 200, "road"}}, {}, {{"environment", "foggy"}});
  const auto center = camera_view(w, {150, 100, 50, 0}, 60.0, 16);
  CHECK_FALSE(center.partial);
  CHECK(center.geometry.footprint_m == doctest::Approx(footprint_side(50, 60)));
  CHECK(center.image.annotation->tags.at("environment") == "foggy");
  CHECK(center.image.annotation->labels.at(8, 8) == 1);  // grass

  const auto corner = camera_view(w, {1, 1, 50, 0}, 60.0, 16);
  CHECK(corner.partial);
  CHECK(corner.image.get(0, 0) == kBorderColor);
  CHECK(corner.image.annotation->labels.at(0, 0) == kUnknownClass);
  CHECK_THROWS_AS(camera_view(w, {1, 1, 0, 0}, 60.0, 16), ContractError);
}

TEST_CASE("tile tags follow the view center") {
  DomainShiftOptions o;
  o.size_px = 100;
  o.environment_words = {"foggy", "snow", "dark", "shadows"};
  const auto ds = make_domain_shift_world(3, o);
  CHECK(ds.tile_count == 4);
  CHECK(ds.tiles_with_static_word * 2 < ds.tile_count);
  const auto& w = ds.world;
  CHECK(w.tags_at(10, 10).at("environment") == w.tile_tags[0].at("environment"));
  CHECK(w.tags_at(90, 90).at("environment") == w.tile_tags[3].at("environment"));
}

TEST_CASE("kinematics integrates and floors altitude") {
  const UavPose p{10, 10, 50, 0};
  CHECK(kinematics_step(p, {}, 0.5) == UavPose{10, 10, 50, 0.5});
  CHECK(kinematics_step(p, {2, 0, 0}, 0.5).x == doctest::Approx(11.0));
  CHECK(kinematics_step({0, 0, 0.1, 0}, {0, 0, 1}, 0.5).altitude == 0.0);
  std::mt19937_64 a(1), b(1);
  CHECK(kinematics_step(p, {}, 0.5, 0.3, &a) == kinematics_step(p, {}, 0.5, 0.3, &b));
  CHECK_THROWS_AS(kinematics_step(p, {}, 0.0), ContractError);
}

TEST_CASE("world files round-trip") {
  testing::TempDir dir("world");
  DomainShiftOptions o;
  o.size_px = 64;
  o.environment_words = {"foggy", "snow"};
  const auto w = make_domain_shift_world(9, o).world;
  save_world(w, dir.path());
  const auto back = load_world(dir.path());
  CHECK(back.labels == w.labels);
  CHECK(back.ortho.pixels == w.ortho.pixels);
  CHECK(back.tile_tags == w.tile_tags);
  CHECK(back.meters_per_pixel == w.meters_per_pixel);
  CHECK_THROWS_AS(load_world(dir / "missing"), InputError);
}

TEST_CASE("pure grass world lands from 100 m") {
  const World w = make_uniform_world("grass", 400, 1.0);
  const auto r = run_episode(w, small_setup(), PromptMode::peace, 200, 200, 5);
  CHECK(r.success);
  CHECK(r.reason == EpisodeOutcome::reached_20m_over_safe);
  CHECK(r.path.front().altitude == 100.0);
  CHECK(r.path.back().altitude <= 20.0);
  CHECK(r.elapsed_s >= (100.0 - 20.0) / PolicyConfig{}.v_max_z);
  CHECK(r.elapsed_s < 1200.0);
  CHECK(r.horizontal_distance_m == doctest::Approx(path_length(r.path)).epsilon(1e-12));
}

TEST_CASE("pure water world times out at the hard bound") {
  const World w = make_uniform_world("water", 2000, 1.0);
  auto setup = small_setup();
  setup.policy.sweep_half_extent_m = 40.0;
  setup.backend = testing::mock_backend(7, 8);
  const auto r = run_episode(w, setup, PromptMode::plain, 1000, 1000, 5);
  CHECK_FALSE(r.success);
  CHECK(r.reason == EpisodeOutcome::timeout);
  CHECK(r.elapsed_s == 1200.0);
}

TEST_CASE("reaching 20 m over an unsafe label is not a success") {
  // With road as the only positive class the heatmap is 1 everywhere, so
  // the policy descends straight onto road.
  const World w = make_uniform_world("road", 300, 1.0);
  auto setup = small_setup();
  setup.targets = TargetLists{{"road"}, {}};
  const auto r = run_episode(w, setup, PromptMode::plain, 150, 150, 1);
  CHECK_FALSE(r.success);
  CHECK(r.reason == EpisodeOutcome::reached_20m_over_unsafe);
}

TEST_CASE("leaving the world ends the episode with a clamped pose") {
  const World w = make_uniform_world("water", 120, 1.0);
  auto setup = small_setup();
  setup.backend = testing::mock_backend(7, 8);
  const auto r = run_episode(w, setup, PromptMode::plain, 60, 60, 2);
  CHECK(r.reason == EpisodeOutcome::left_world);
  CHECK(w.contains(r.path.back().x, r.path.back().y));
}

TEST_CASE("episodes are deterministic for a fixed seed") {
  DomainShiftOptions o;
  o.size_px = 200;
  o.environment_words = {"foggy", "snow", "dark", "shadows"};
  const auto w = make_domain_shift_world(4, o).world;
  const auto setup = small_setup();
  const auto a = run_episode(w, setup, PromptMode::peace, 100, 100, 3);
  const auto b = run_episode(w, setup, PromptMode::peace, 100, 100, 3);
  CHECK(a == b);
}

TEST_CASE("matrix runs every mode over the same starts and seeds") {
  const World w = make_uniform_world("grass", 300, 1.0);
  const std::vector<PromptMode> modes{PromptMode::plain, PromptMode::dovesei, PromptMode::peace};
  const auto m = run_matrix({w}, small_setup(), modes, 10, 42);
  REQUIRE(m.episodes.size() == 30);
  for (std::size_t i = 0; i < m.episodes.size(); i += 3) {
    CHECK(m.episodes[i].seed == m.episodes[i + 1].seed);
    CHECK(m.episodes[i].seed == m.episodes[i + 2].seed);
    CHECK(m.episodes[i].result.path.front() == m.episodes[i + 2].result.path.front());
  }
  const auto again = run_matrix({w}, small_setup(), modes, 10, 42);
  for (std::size_t i = 0; i < m.episodes.size(); ++i) CHECK(m.episodes[i].result == again.episodes[i].result);
  CHECK_THROWS_AS(start_grid(w, 0, 100), ValidationError);
}
