#include "peace/landing_policy.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "peace/distance_transform.h"
#include "peace/errors.h"
#include "peace/image.h"

namespace peace {

std::string_view to_string(MachineState s) {
  switch (s) {
    case MachineState::Searching: return "Searching";
    case MachineState::Aiming: return "Aiming";
    case MachineState::Landing: return "Landing";
    case MachineState::Waiting: return "Waiting";
    case MachineState::Climbing: return "Climbing";
    case MachineState::Restarting: return "Restarting";
  }
  return "?";
}

MachineState parse_machine_state(std::string_view s) {
  for (auto st : {MachineState::Searching, MachineState::Aiming, MachineState::Landing, MachineState::Waiting,
                  MachineState::Climbing, MachineState::Restarting}) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("unknown machine state '" + std::string(s) + "'");
}

bool is_legal_transition(MachineState from, MachineState to) {
  if (from == to) return true;
  using S = MachineState;
  switch (from) {
    case S::Searching: return to == S::Aiming;
    case S::Aiming: return to == S::Landing || to == S::Searching;
    case S::Landing: return to == S::Waiting;
    case S::Waiting: return to == S::Landing || to == S::Climbing;
    case S::Climbing: return to == S::Restarting;
    case S::Restarting: return to == S::Searching;
  }
  return false;
}

double FocusRadii::for_state(MachineState s) const {
  switch (s) {
    case MachineState::Searching: return searching;
    case MachineState::Aiming: return aiming;
    case MachineState::Landing: return landing;
    case MachineState::Waiting: return waiting;
    case MachineState::Climbing: return climbing;
    case MachineState::Restarting: return restarting;
  }
  return 1.0;
}

void PolicyConfig::validate() const {
  if (!(success_altitude_m > 0.0 && success_altitude_m < safe_altitude_m)) {
    throw ValidationError("policy: need 0 < success_altitude_m < safe_altitude_m");
  }
  if (!(tau_safe > 0.0 && tau_safe < 1.0)) throw ValidationError("policy: tau_safe must be in (0, 1)");
  if (!(v_max_h > 0.0) || !(v_max_z > 0.0)) throw ValidationError("policy: velocity limits must be positive");
  if (safety_radius_m < 0.0) throw ValidationError("policy: safety_radius_m must be >= 0");
  if (aim_hold_frames < 1) throw ValidationError("policy: aim_hold_frames must be >= 1");
  if (!(aim_epsilon_frac > 0.0)) throw ValidationError("policy: aim_epsilon_frac must be positive");
  if (!(wait_timeout_s > 0.0)) throw ValidationError("policy: wait_timeout_s must be positive");
  if (!(horizontal_gain > 0.0)) throw ValidationError("policy: horizontal_gain must be positive");
  if (!(sweep_half_extent_m > 0.0)) throw ValidationError("policy: sweep_half_extent_m must be positive");
  for (auto s : {MachineState::Searching, MachineState::Aiming, MachineState::Landing, MachineState::Waiting,
                 MachineState::Climbing, MachineState::Restarting}) {
    const double r = focus.for_state(s);
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("policy: focus radius must be in (0, 1]");
  }
}

double VelocityCommand::horizontal_speed() const { return std::hypot(vx, vy); }

std::string_view to_string(PolicyEvent e) {
  switch (e) {
    case PolicyEvent::state_changed: return "state_changed";
    case PolicyEvent::success: return "success";
    case PolicyEvent::target_acquired: return "target_acquired";
    case PolicyEvent::target_lost: return "target_lost";
    case PolicyEvent::wait_timeout: return "wait_timeout";
  }
  return "?";
}

bool StepResult::has(PolicyEvent e) const { return std::find(events.begin(), events.end(), e) != events.end(); }

Grid<double> resample_nearest(const Grid<double>& heatmap, int width, int height) {
  if (heatmap.width == width && heatmap.height == height) return heatmap;
  return resize_nearest(heatmap, width, height);
}

Grid<double> apply_focus(const Grid<double>& heatmap, double radius_fraction) {
  if (!(radius_fraction > 0.0 && radius_fraction <= 1.0)) {
    throw ContractError("focus radius fraction must be in (0, 1]");
  }
  Grid<double> out = heatmap;
  const double cx = (heatmap.width - 1) / 2.0;
  const double cy = (heatmap.height - 1) / 2.0;
  const double r = radius_fraction * std::min(heatmap.width, heatmap.height);
  const double r2 = r * r;
  for (int y = 0; y < heatmap.height; ++y) {
    for (int x = 0; x < heatmap.width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy > r2) out.at(x, y) = 0.0;
    }
  }
  return out;
}

Grid<double> apply_focus(const Grid<double>& heatmap, MachineState state, const PolicyConfig& cfg) {
  return apply_focus(heatmap, cfg.focus.for_state(state));
}

double center_value(const Grid<double>& heatmap) {
  if (heatmap.empty()) return 0.0;
  return heatmap.at(heatmap.width / 2, heatmap.height / 2);
}

std::optional<LandingTarget> select_target(const Grid<double>& heatmap, const PolicyConfig& cfg,
                                           const CameraGeometry& camera) {
  if (heatmap.empty()) return std::nullopt;
  Grid<std::uint8_t> safe(heatmap.width, heatmap.height, 0);
  bool any = false;
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    safe.values[i] = heatmap.values[i] >= cfg.tau_safe ? 1 : 0;
    any = any || safe.values[i] != 0;
  }
  if (!any) return std::nullopt;
  const auto clearance = euclidean_distance_transform(safe, true);
  const double mpp = camera.footprint_m > 0.0 && camera.width > 0
                         ? camera.footprint_m / camera.width
                         : 1.0;
  const double needed_px = cfg.safety_radius_m / mpp;
  const double cx = (heatmap.width - 1) / 2.0;
  const double cy = (heatmap.height - 1) / 2.0;

  std::optional<LandingTarget> best;
  double best_center_d2 = 0.0;
  for (int y = 0; y < heatmap.height; ++y) {
    for (int x = 0; x < heatmap.width; ++x) {
      if (!safe.at(x, y)) continue;
      const double c = clearance.at(x, y);
      if (c < needed_px) continue;
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      if (!best || c > best->clearance_px || (c == best->clearance_px && d2 < best_center_d2)) {
        best = LandingTarget{x, y, heatmap.at(x, y), c};
        best_center_d2 = d2;
      }
    }
  }
  return best;
}

LandingPolicy::LandingPolicy(PolicyConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

VelocityCommand LandingPolicy::clamp(VelocityCommand c) const {
  const double h = c.horizontal_speed();
  if (h > cfg_.v_max_h) {
    c.vx *= cfg_.v_max_h / h;
    c.vy *= cfg_.v_max_h / h;
  }
  c.vz = std::clamp(c.vz, -cfg_.v_max_z, cfg_.v_max_z);
  return c;
}

VelocityCommand LandingPolicy::toward_target(const LandingTarget& target, const CameraGeometry& cam,
                                             double dt) const {
  const double mpp = cam.meters_per_pixel();
  const double dx = (target.u - (cam.width - 1) / 2.0) * mpp;
  const double dy = (target.v - (cam.height - 1) / 2.0) * mpp;
  const double dist = std::hypot(dx, dy);
  // The four central pixels of an even-sized image are equally centered;
  // within one pixel of the center there is nothing to correct.
  if (dist <= mpp) return {};
  // Proportional, but never past the target within one control period.
  const double speed = std::min({cfg_.horizontal_gain * dist, cfg_.v_max_h, dist / dt});
  return {dx / dist * speed, dy / dist * speed, 0.0};
}

VelocityCommand LandingPolicy::sweep_command(const Observation& obs) {
  if (!sweep_active_) {
    sweep_active_ = true;
    sweep_ox_ = px_;
    sweep_oy_ = py_;
    sweep_stride_ = std::max(1.0, obs.camera.footprint_m / 2.0);
    sweep_index_ = 0;
  }
  const double e = cfg_.sweep_half_extent_m;
  const int rows = std::max(2, static_cast<int>(std::floor(2.0 * e / sweep_stride_)) + 1);
  auto waypoint = [&](int i) {
    const int r = i / 2;
    const int period = 2 * (rows - 1);
    const int rr = r % period;
    const int row = rr < rows ? rr : period - rr;
    const double y = std::min(e, -e + row * sweep_stride_);
    const bool forward = r % 2 == 0;
    const double x = ((i % 2 == 0) == forward) ? -e : e;
    return std::pair{sweep_ox_ + x, sweep_oy_ + y};
  };
  auto [wx, wy] = waypoint(sweep_index_);
  double dx = wx - px_;
  double dy = wy - py_;
  double dist = std::hypot(dx, dy);
  if (dist <= 1e-9) {
    ++sweep_index_;
    std::tie(wx, wy) = waypoint(sweep_index_);
    dx = wx - px_;
    dy = wy - py_;
    dist = std::hypot(dx, dy);
    if (dist <= 1e-9) return {};
  }
  const double speed = std::min(cfg_.v_max_h, dist / obs.dt);
  if (speed * obs.dt >= dist - 1e-9) ++sweep_index_;
  return {dx / dist * speed, dy / dist * speed, 0.0};
}

VelocityCommand LandingPolicy::restart_command(const Observation& obs, bool& done) {
  const double remaining = restart_distance_ - restart_travelled_;
  if (remaining <= 1e-9) {
    done = true;
    return {};
  }
  done = false;
  const double speed = std::min(cfg_.v_max_h, remaining / obs.dt);
  restart_travelled_ += speed * obs.dt;
  return {std::cos(restart_heading_) * speed, std::sin(restart_heading_) * speed, 0.0};
}

void LandingPolicy::enter(MachineState next, StepResult& result, const Observation& obs) {
  if (!is_legal_transition(state_, next)) {
    throw ContractError("illegal transition " + std::string(to_string(state_)) + " -> " +
                        std::string(to_string(next)));
  }
  if (next == state_) return;
  result.events.push_back(PolicyEvent::state_changed);
  state_ = next;
  switch (next) {
    case MachineState::Aiming: hold_frames_ = 0; break;
    case MachineState::Waiting: wait_elapsed_ = 0.0; break;
    case MachineState::Searching: sweep_active_ = false; break;
    case MachineState::Restarting: {
      std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
      restart_heading_ = heading(rng_);
      restart_travelled_ = 0.0;
      restart_distance_ = obs.camera.footprint_m;
      break;
    }
    default: break;
  }
}

StepResult LandingPolicy::step(const Observation& obs) {
  if (!std::isfinite(obs.altitude_m) || !std::isfinite(obs.center_value) || !std::isfinite(obs.dt) ||
      !(obs.dt > 0.0)) {
    throw ContractError("observation fields must be finite with dt > 0");
  }
  StepResult r;
  VelocityCommand cmd;
  const double aim_eps_px = cfg_.aim_epsilon_frac * obs.camera.width;
  auto centered = [&](const LandingTarget& t) {
    const double du = t.u - (obs.camera.width - 1) / 2.0;
    const double dv = t.v - (obs.camera.height - 1) / 2.0;
    return std::hypot(du, dv) <= aim_eps_px;
  };

  switch (state_) {
    case MachineState::Searching:
      if (obs.target) {
        r.events.push_back(PolicyEvent::target_acquired);
        enter(MachineState::Aiming, r, obs);
        cmd = toward_target(*obs.target, obs.camera, obs.dt);
        if (centered(*obs.target)) hold_frames_ = 1;
      } else {
        cmd = sweep_command(obs);
      }
      break;

    case MachineState::Aiming:
      if (!obs.target) {
        r.events.push_back(PolicyEvent::target_lost);
        enter(MachineState::Searching, r, obs);
        cmd = sweep_command(obs);
        break;
      }
      hold_frames_ = centered(*obs.target) ? hold_frames_ + 1 : 0;
      cmd = toward_target(*obs.target, obs.camera, obs.dt);
      if (hold_frames_ >= cfg_.aim_hold_frames) enter(MachineState::Landing, r, obs);
      break;

    case MachineState::Landing:
      if (obs.altitude_m <= cfg_.success_altitude_m) {
        r.events.push_back(PolicyEvent::success);
        break;
      }
      if (obs.center_value < cfg_.tau_safe) {
        enter(MachineState::Waiting, r, obs);
        break;
      }
      if (obs.target) cmd = toward_target(*obs.target, obs.camera, obs.dt);
      cmd.vz = std::min(cfg_.v_max_z, (obs.altitude_m - cfg_.success_altitude_m) / obs.dt);
      break;

    case MachineState::Waiting:
      if (obs.center_value >= cfg_.tau_safe) {
        enter(MachineState::Landing, r, obs);
        break;
      }
      wait_elapsed_ += obs.dt;
      if (wait_elapsed_ >= cfg_.wait_timeout_s) {
        r.events.push_back(PolicyEvent::wait_timeout);
        enter(MachineState::Climbing, r, obs);
        cmd.vz = -std::min(cfg_.v_max_z, std::max(0.0, cfg_.safe_altitude_m - obs.altitude_m) / obs.dt);
      }
      break;

    case MachineState::Climbing:
      if (obs.altitude_m >= cfg_.safe_altitude_m - 1e-9) {
        enter(MachineState::Restarting, r, obs);
        bool done = false;
        cmd = restart_command(obs, done);
      } else {
        cmd.vz = -std::min(cfg_.v_max_z, (cfg_.safe_altitude_m - obs.altitude_m) / obs.dt);
      }
      break;

    case MachineState::Restarting: {
      bool done = false;
      cmd = restart_command(obs, done);
      if (done) {
        enter(MachineState::Searching, r, obs);
        cmd = sweep_command(obs);
      }
      break;
    }
  }

  cmd = clamp(cmd);
  px_ += cmd.vx * obs.dt;
  py_ += cmd.vy * obs.dt;
  r.state = state_;
  r.command = cmd;
  return r;
}

}  // namespace peace
