#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "peace/grid.h"

namespace peace {

enum class MachineState { Searching, Aiming, Landing, Waiting, Climbing, Restarting };

std::string_view to_string(MachineState s);
MachineState parse_machine_state(std::string_view s);
/// The edge set of the landing state machine, self-loops included.
bool is_legal_transition(MachineState from, MachineState to);

/// Focus circle radius per state, as a fraction of the image's smaller side.
struct FocusRadii {
  double searching = 1.0;
  double aiming = 0.5;
  double landing = 0.25;
  double waiting = 0.25;
  double climbing = 1.0;
  double restarting = 1.0;

  double for_state(MachineState s) const;
};

struct PolicyConfig {
  double tau_safe = 0.5;
  double safety_radius_m = 1.5;
  double aim_epsilon_frac = 0.05;  // of image width
  int aim_hold_frames = 5;
  double wait_timeout_s = 10.0;
  double safe_altitude_m = 100.0;
  double success_altitude_m = 20.0;
  double v_max_h = 5.0;  // m/s
  double v_max_z = 2.0;  // m/s
  double horizontal_gain = 0.5;  // 1/s, proportional alignment
  double sweep_half_extent_m = 150.0;
  FocusRadii focus;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;
};

/// Ground coverage of the image handed to the policy.
struct CameraGeometry {
  double footprint_m = 0.0;  // square side
  int width = 0;
  int height = 0;

  double meters_per_pixel() const { return footprint_m / width; }
};

struct LandingTarget {
  int u = 0;
  int v = 0;
  double confidence = 0.0;  // heatmap value at (u, v)
  double clearance_px = 0.0;
};

/// Body-frame velocity; +x along image columns, +y along image rows,
/// vz positive descends.
struct VelocityCommand {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;

  double horizontal_speed() const;
};

enum class PolicyEvent { state_changed, success, target_acquired, target_lost, wait_timeout };

std::string_view to_string(PolicyEvent e);

struct Observation {
  std::optional<LandingTarget> target;
  double altitude_m = 0.0;
  double center_value = 0.0;  // focused heatmap at the image center
  double t = 0.0;
  double dt = 0.5;
  CameraGeometry camera;
};

struct StepResult {
  MachineState state = MachineState::Searching;
  VelocityCommand command;
  std::vector<PolicyEvent> events;

  bool has(PolicyEvent e) const;
};

/// Nearest-neighbor resample (heatmap resolution -> camera resolution).
Grid<double> resample_nearest(const Grid<double>& heatmap, int width, int height);

/// Zeroes pixels farther than radius_fraction * min(w, h) from the image center.
Grid<double> apply_focus(const Grid<double>& heatmap, double radius_fraction);
Grid<double> apply_focus(const Grid<double>& heatmap, MachineState state, const PolicyConfig& cfg);

/// Heatmap value at the center pixel (w/2, h/2).
double center_value(const Grid<double>& heatmap);

/// Binarizes at tau_safe, runs a Euclidean distance transform (image border
/// counts as unsafe) and keeps pixels whose clearance covers the safety
/// radius at the current ground resolution. Picks the largest clearance,
/// then the pixel closest to the image center, then scan order.
std::optional<LandingTarget> select_target(const Grid<double>& heatmap, const PolicyConfig& cfg,
                                           const CameraGeometry& camera);

/// Six-state landing controller. Owns per-episode memory (hold counter,
/// wait timer, dead-reckoned offset for the sweep and restart moves).
class LandingPolicy {
 public:
  LandingPolicy(PolicyConfig cfg, std::uint64_t seed);

  StepResult step(const Observation& obs);
  MachineState state() const { return state_; }
  const PolicyConfig& config() const { return cfg_; }

 private:
  VelocityCommand toward_target(const LandingTarget& target, const CameraGeometry& cam, double dt) const;
  VelocityCommand sweep_command(const Observation& obs);
  VelocityCommand restart_command(const Observation& obs, bool& done);
  VelocityCommand clamp(VelocityCommand c) const;
  void enter(MachineState next, StepResult& result, const Observation& obs);

  PolicyConfig cfg_;
  std::mt19937_64 rng_;
  MachineState state_ = MachineState::Searching;
  int hold_frames_ = 0;
  double wait_elapsed_ = 0.0;
  // Dead-reckoned horizontal offset from the episode start, from commands.
  double px_ = 0.0, py_ = 0.0;
  bool sweep_active_ = false;
  double sweep_ox_ = 0.0, sweep_oy_ = 0.0, sweep_stride_ = 1.0;
  int sweep_index_ = 0;
  double restart_heading_ = 0.0;
  double restart_travelled_ = 0.0;
  double restart_distance_ = 0.0;
};

}  // namespace peace
