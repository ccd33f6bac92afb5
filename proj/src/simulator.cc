#include "peace/simulator.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "peace/errors.h"
#include "peace/hash.h"

namespace peace {

void SimulatorConfig::validate() const {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw ValidationError("simulator.fov_deg must be in (0, 180)");
  if (camera_resolution < 4) throw ValidationError("simulator.camera_resolution must be >= 4");
  if (!(control_rate_hz > 0.0)) throw ValidationError("simulator.control_rate_hz must be > 0");
  if (!(timeout_s > 0.0)) throw ValidationError("simulator.timeout_s must be > 0");
  if (!(start_altitude_m > 0.0)) throw ValidationError("simulator.start_altitude_m must be > 0");
  if (drift_sigma_m < 0.0) throw ValidationError("simulator.drift_sigma_m must be >= 0");
}

std::string_view to_string(EpisodeOutcome o) {
  switch (o) {
    case EpisodeOutcome::reached_20m_over_safe: return "reached_20m_over_safe";
    case EpisodeOutcome::reached_20m_over_unsafe: return "reached_20m_over_unsafe";
    case EpisodeOutcome::timeout: return "timeout";
    case EpisodeOutcome::left_world: return "left_world";
  }
  return "?";
}

EpisodeOutcome parse_episode_outcome(std::string_view s) {
  for (auto o : {EpisodeOutcome::reached_20m_over_safe, EpisodeOutcome::reached_20m_over_unsafe,
                 EpisodeOutcome::timeout, EpisodeOutcome::left_world}) {
    if (to_string(o) == s) return o;
  }
  throw ValidationError("unknown episode outcome '" + std::string(s) + "'");
}

double path_length(const std::vector<UavPose>& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    total += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
  }
  return total;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t world_index, int start_index) {
  return hash_combine(hash_combine(seed, world_index), static_cast<std::uint64_t>(start_index));
}

EpisodeResult run_episode(const World& world, const EpisodeSetup& setup, PromptMode mode, double start_x,
                          double start_y, std::uint64_t seed) {
  if (!setup.backend || !setup.vocab) throw ContractError("episode setup needs a backend and a vocabulary");
  setup.sim.validate();
  if (!world.contains(start_x, start_y)) throw ValidationError("start pose lies outside the world");

  const double dt = setup.sim.dt();
  const int res = setup.sim.camera_resolution;
  PromptConfig prompt_cfg = setup.prompt;
  prompt_cfg.mode = mode;
  PromptScheduler scheduler(prompt_cfg, setup.targets, setup.vocab, setup.backend);
  LandingPolicy policy(setup.policy, hash_combine(seed, 1));
  std::mt19937_64 drift_rng(hash_combine(seed, 2));

  EpisodeResult result;
  UavPose pose{start_x, start_y, setup.sim.start_altitude_m, 0.0};
  result.path.push_back(pose);
  std::set<std::string> seen_prompts;
  bool state_changed = false;
  bool finished = false;

  for (int frame = 0; !finished; ++frame) {
    // Compare against the step count so accumulated float time cannot overshoot.
    if (static_cast<double>(frame + 1) * dt > setup.sim.timeout_s + 1e-9) {
      result.reason = EpisodeOutcome::timeout;
      break;
    }
    const CameraView view = camera_view(world, pose, setup.sim.fov_deg, res);
    const PromptSet& prompts = scheduler.next(view.image, frame, state_changed);
    if (scheduler.last_regenerated() || frame == 0) {
      for (const auto& text : prompts.texts()) {
        if (seen_prompts.insert(text).second) result.prompts_used.push_back(text);
      }
    }
    const SafetyHeatmap heat = fuse_pipeline(view.image, prompts, *setup.backend, setup.collapse);
    const Grid<double> resampled = resample_nearest(heat.values, res, res);
    const Grid<double> focused = apply_focus(resampled, policy.state(), setup.policy);

    Observation obs;
    obs.target = select_target(focused, setup.policy, view.geometry);
    obs.altitude_m = pose.altitude;
    obs.center_value = center_value(focused);
    obs.t = pose.t;
    obs.dt = dt;
    obs.camera = view.geometry;

    const MachineState before = policy.state();
    const StepResult step = policy.step(obs);
    result.trace.push_back({pose.t, pose.x, pose.y, pose.altitude, step.state, obs.center_value});
    for (auto e : step.events) {
      std::string detail;
      if (e == PolicyEvent::state_changed) {
        detail = std::string(to_string(before)) + "->" + std::string(to_string(step.state));
      } else if (e == PolicyEvent::target_acquired && obs.target) {
        detail = std::to_string(obs.target->u) + "," + std::to_string(obs.target->v);
      }
      result.events.push_back({pose.t, std::string(to_string(e)), detail});
    }
    state_changed = step.has(PolicyEvent::state_changed);

    pose = kinematics_step(pose, step.command, dt, setup.sim.drift_sigma_m, &drift_rng);
    pose.t = (frame + 1) * dt;
    if (!world.contains(pose.x, pose.y)) {
      pose.x = std::clamp(pose.x, 0.0, std::nextafter(world.width_m(), 0.0));
      pose.y = std::clamp(pose.y, 0.0, std::nextafter(world.height_m(), 0.0));
      result.reason = EpisodeOutcome::left_world;
      finished = true;
    } else if (pose.altitude <= setup.policy.success_altitude_m + 1e-9) {
      result.success = world.is_safe_at(pose.x, pose.y);
      result.reason = result.success ? EpisodeOutcome::reached_20m_over_safe
                                     : EpisodeOutcome::reached_20m_over_unsafe;
      finished = true;
    }
    result.path.push_back(pose);
  }

  result.events.push_back({pose.t, "end", std::string(to_string(result.reason))});
  result.elapsed_s = pose.t;
  result.horizontal_distance_m = path_length(result.path);
  result.prompt_regenerations = scheduler.regenerations();
  return result;
}

std::vector<UavPose> start_grid(const World& world, int n_starts, double altitude) {
  if (n_starts < 1) throw ValidationError("n_starts must be >= 1");
  const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_starts))));
  std::vector<UavPose> starts;
  for (int i = 0; i < n_starts; ++i) {
    const int row = i / k;
    const int col = i % k;
    starts.push_back({world.width_m() * (0.25 + 0.5 * (col + 0.5) / k),
                      world.height_m() * (0.25 + 0.5 * (row + 0.5) / k), altitude, 0.0});
  }
  return starts;
}

MatrixResult run_matrix(const std::vector<World>& worlds, const EpisodeSetup& setup,
                        const std::vector<PromptMode>& modes, int n_starts, std::uint64_t seed,
                        const std::function<void(const MatrixEpisode&)>& on_episode) {
  if (modes.empty()) throw ValidationError("run_matrix needs at least one mode");
  MatrixResult out;
  out.modes = modes;
  out.seed = seed;
  for (std::size_t w = 0; w < worlds.size(); ++w) {
    const auto starts = start_grid(worlds[w], n_starts, setup.sim.start_altitude_m);
    for (int s = 0; s < n_starts; ++s) {
      const std::uint64_t es = episode_seed(seed, w, s);
      for (auto mode : modes) {
        MatrixEpisode ep{w, mode, s, es, run_episode(worlds[w], setup, mode, starts[s].x, starts[s].y, es)};
        if (on_episode) on_episode(ep);
        out.episodes.push_back(std::move(ep));
      }
    }
  }
  return out;
}

}  // namespace peace
