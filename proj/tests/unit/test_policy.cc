#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "peace/distance_transform.h"
#include "peace/errors.h"
#include "peace/landing_policy.h"

using namespace peace;

namespace {

// Distance to the nearest zero pixel (or to the ring outside the grid).
double brute_clearance(const Grid<std::uint8_t>& g, int x, int y) {
  if (!g.at(x, y)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int yy = -1; yy <= g.height; ++yy) {
    for (int xx = -1; xx <= g.width; ++xx) {
      const bool outside = xx < 0 || yy < 0 || xx >= g.width || yy >= g.height;
      if (outside || !g.at(xx, yy)) best = std::min(best, std::hypot(xx - x, yy - y));
    }
  }
  return best;
}

Grid<double> uniform(int n, double v) { return Grid<double>(n, n, v); }

CameraGeometry camera(int n = 64, double footprint = 64.0) { return {footprint, n, n}; }

Observation obs_with(std::optional<LandingTarget> target, double altitude, double center) {
  Observation o;
  o.target = target;
  o.altitude_m = altitude;
  o.center_value = center;
  o.camera = camera();
  return o;
}

LandingTarget centered_target() { return {32, 32, 0.9, 20.0}; }

}  // namespace

TEST_CASE("distance transform matches brute force on random masks") {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution fg(0.75);
  for (int trial = 0; trial < 20; ++trial) {
    Grid<std::uint8_t> g(13, 9);
    for (auto& v : g.values) v = fg(rng) ? 1 : 0;
    const auto d = euclidean_distance_transform(g, true);
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) CHECK(d.at(x, y) == doctest::Approx(brute_clearance(g, x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("distance transform without a border treats an all-foreground grid as unbounded") {
  Grid<std::uint8_t> g(4, 4, 1);
  g.at(0, 0) = 0;
  const auto d = euclidean_distance_transform(g, false);
  CHECK(d.at(3, 3) == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("focus keeps only the central disk") {
  const auto f = apply_focus(uniform(64, 1.0), 0.25);
  CHECK(f.at(32, 32) == 1.0);
  CHECK(f.at(0, 0) == 0.0);
  // radius 16 px around (31.5, 31.5)
  CHECK(f.at(31 + 16, 31) == 1.0);
  CHECK(f.at(32 + 16, 31) == 0.0);
  CHECK(apply_focus(uniform(8, 0.7), 1.0).at(0, 0) == 0.7);
  CHECK(apply_focus(uniform(8, 0.7), 0.5).at(0, 0) == 0.0);  // outside the inscribed circle
  CHECK_THROWS_AS(apply_focus(uniform(8, 0.7), 0.0), ContractError);
}

TEST_CASE("select_target prefers clearance, then the center") {
  PolicyConfig cfg;
  cfg.safety_radius_m = 0.0;
  Grid<double> h(21, 21, 0.0);
  // small safe square near a corner, larger one off-center
  for (int y = 1; y < 4; ++y) {
    for (int x = 1; x < 4; ++x) h.at(x, y) = 0.9;
  }
  for (int y = 8; y < 19; ++y) {
    for (int x = 9; x < 20; ++x) h.at(x, y) = 0.8;
  }
  const auto t = select_target(h, cfg, camera(21, 21.0));
  REQUIRE(t);
  CHECK(t->u == 14);
  CHECK(t->v == 13);
  CHECK(t->clearance_px == doctest::Approx(6.0));

  cfg.safety_radius_m = 7.0;  // 1 m per pixel: nothing has 7 px clearance
  CHECK_FALSE(select_target(h, cfg, camera(21, 21.0)));
  CHECK_FALSE(select_target(uniform(8, 0.49), PolicyConfig{}, camera(8, 8.0)));
}

TEST_CASE("select_target on a uniform safe map picks the center") {
  const auto t = select_target(uniform(64, 0.8), PolicyConfig{}, camera());
  REQUIRE(t);
  CHECK(std::abs(t->u - 31.5) <= 0.5);
  CHECK(std::abs(t->v - 31.5) <= 0.5);
}

TEST_CASE("transition table") {
  using S = MachineState;
  CHECK(is_legal_transition(S::Searching, S::Aiming));
  CHECK(is_legal_transition(S::Waiting, S::Landing));
  CHECK_FALSE(is_legal_transition(S::Searching, S::Landing));
  CHECK_FALSE(is_legal_transition(S::Climbing, S::Searching));
  CHECK(parse_machine_state("Restarting") == S::Restarting);
  CHECK_THROWS_AS(parse_machine_state("Hovering"), ValidationError);
}

TEST_CASE("scripted observations visit every state") {
  LandingPolicy p(PolicyConfig{}, 1);
  std::set<MachineState> seen{p.state()};
  auto run = [&](const Observation& o) {
    const auto r = p.step(o);
    seen.insert(r.state);
    return r;
  };
  CHECK(run(obs_with(std::nullopt, 100, 0.0)).state == MachineState::Searching);
  CHECK(run(obs_with(centered_target(), 100, 0.9)).has(PolicyEvent::target_acquired));
  for (int i = 0; i < 5; ++i) run(obs_with(centered_target(), 100, 0.9));
  CHECK(p.state() == MachineState::Landing);
  const auto descend = run(obs_with(centered_target(), 99, 0.9));
  CHECK(descend.command.vz == doctest::Approx(2.0));
  run(obs_with(std::nullopt, 60, 0.1));
  CHECK(p.state() == MachineState::Waiting);
  StepResult r;
  for (int i = 0; i < 20; ++i) r = run(obs_with(std::nullopt, 60, 0.1));
  CHECK(r.has(PolicyEvent::wait_timeout));
  CHECK(p.state() == MachineState::Climbing);
  CHECK(r.command.vz < 0.0);
  run(obs_with(std::nullopt, 80, 0.1));
  CHECK(p.state() == MachineState::Climbing);
  run(obs_with(std::nullopt, 100, 0.1));
  CHECK(p.state() == MachineState::Restarting);
  for (int i = 0; i < 40 && p.state() == MachineState::Restarting; ++i) run(obs_with(std::nullopt, 100, 0.1));
  CHECK(p.state() == MachineState::Searching);
  CHECK(seen.size() == 6);
}

TEST_CASE("waiting recovers to landing when the center turns safe") {
  LandingPolicy p(PolicyConfig{}, 2);
  p.step(obs_with(centered_target(), 100, 0.9));
  for (int i = 0; i < 5; ++i) p.step(obs_with(centered_target(), 100, 0.9));
  REQUIRE(p.state() == MachineState::Landing);
  p.step(obs_with(std::nullopt, 90, 0.2));
  REQUIRE(p.state() == MachineState::Waiting);
  p.step(obs_with(centered_target(), 90, 0.8));
  CHECK(p.state() == MachineState::Landing);
}

TEST_CASE("aiming drops back to searching when the target is lost") {
  LandingPolicy p(PolicyConfig{}, 3);
  p.step(obs_with(LandingTarget{50, 10, 0.9, 5.0}, 100, 0.3));
  REQUIRE(p.state() == MachineState::Aiming);
  const auto r = p.step(obs_with(std::nullopt, 100, 0.3));
  CHECK(r.has(PolicyEvent::target_lost));
  CHECK(p.state() == MachineState::Searching);
}

TEST_CASE("aiming moves toward the target along image axes") {
  LandingPolicy p(PolicyConfig{}, 4);
  const auto r = p.step(obs_with(LandingTarget{60, 31, 0.9, 5.0}, 100, 0.3));
  CHECK(r.command.vx > 0.0);
  CHECK(std::abs(r.command.vy) < std::abs(r.command.vx));
  CHECK(r.command.vz == 0.0);
}

TEST_CASE("fuzzed observations never produce an illegal transition or an out-of-bounds command") {
  PolicyConfig cfg;
  LandingPolicy p(cfg, 99);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pix(0, 63);
  int illegal = 0;
  for (int i = 0; i < 10000; ++i) {
    std::optional<LandingTarget> t;
    if (unit(rng) < 0.6) t = LandingTarget{pix(rng), pix(rng), unit(rng), 10 * unit(rng)};
    const auto before = p.state();
    const auto r = p.step(obs_with(t, 110 * unit(rng), unit(rng)));
    if (!is_legal_transition(before, r.state)) ++illegal;
    CHECK(r.command.horizontal_speed() <= cfg.v_max_h + 1e-9);
    CHECK(std::abs(r.command.vz) <= cfg.v_max_z + 1e-9);
  }
  CHECK(illegal == 0);
}

TEST_CASE("policy config validation") {
  PolicyConfig c;
  c.success_altitude_m = 120;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PolicyConfig{};
  c.focus.landing = 0.0;
  CHECK_THROWS_AS(LandingPolicy(c, 1), ValidationError);
  LandingPolicy p(PolicyConfig{}, 1);
  Observation bad = obs_with(std::nullopt, std::nan(""), 0.0);
  CHECK_THROWS_AS(p.step(bad), ContractError);
}
