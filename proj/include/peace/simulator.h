#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "peace/backend.h"
#include "peace/fusion.h"
#include "peace/landing_policy.h"
#include "peace/prompt_engine.h"
#include "peace/vocab.h"
#include "peace/world.h"

namespace peace {

struct SimulatorConfig {
  double fov_deg = 60.0;
  int camera_resolution = 64;
  double control_rate_hz = 2.0;
  double timeout_s = 1200.0;
  double start_altitude_m = 100.0;
  double drift_sigma_m = 0.0;  // per control step; 0 disables drift

  double dt() const { return 1.0 / control_rate_hz; }
  void validate() const;
};

/// reached_20m_over_unsafe marks an episode that descended to the success
/// altitude over a label that is not safe-flagged; it never counts as success.
enum class EpisodeOutcome { reached_20m_over_safe, reached_20m_over_unsafe, timeout, left_world };

std::string_view to_string(EpisodeOutcome o);
EpisodeOutcome parse_episode_outcome(std::string_view s);

struct TraceRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double altitude = 0.0;
  MachineState state = MachineState::Searching;
  double heatmap_center = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct EpisodeEvent {
  double t = 0.0;
  std::string kind;
  std::string detail;

  friend bool operator==(const EpisodeEvent&, const EpisodeEvent&) = default;
};

struct EpisodeResult {
  bool success = false;
  EpisodeOutcome reason = EpisodeOutcome::timeout;
  double horizontal_distance_m = 0.0;
  double elapsed_s = 0.0;
  std::vector<UavPose> path;  // start pose first, one pose per control step
  std::vector<std::string> prompts_used;  // distinct prompt texts, first-use order
  std::vector<TraceRow> trace;
  std::vector<EpisodeEvent> events;
  int prompt_regenerations = 0;

  friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

/// Everything an episode reads but never mutates.
struct EpisodeSetup {
  std::shared_ptr<const InferenceBackend> backend;
  std::shared_ptr<const DescriptionVocabulary> vocab;
  TargetLists targets;
  PromptConfig prompt;  // mode is overridden per episode
  PolicyConfig policy;
  SimulatorConfig sim;
  CollapseMode collapse = CollapseMode::sum;
};

/// Sum of consecutive horizontal displacements.
double path_length(const std::vector<UavPose>& path);

/// Flies one episode from (start_x, start_y) at the configured start altitude.
EpisodeResult run_episode(const World& world, const EpisodeSetup& setup, PromptMode mode, double start_x,
                          double start_y, std::uint64_t seed);

/// n starts on a square lattice over the central half of the world, row-major.
std::vector<UavPose> start_grid(const World& world, int n_starts, double altitude);

struct MatrixEpisode {
  std::size_t world_index = 0;
  PromptMode mode = PromptMode::peace;
  int start_index = 0;
  std::uint64_t seed = 0;
  EpisodeResult result;
};

struct MatrixResult {
  std::vector<PromptMode> modes;
  std::uint64_t seed = 0;
  std::vector<MatrixEpisode> episodes;  // world-major, then start, then mode
};

/// Paired design: every mode flies the same starts with the same episode seed.
MatrixResult run_matrix(const std::vector<World>& worlds, const EpisodeSetup& setup,
                        const std::vector<PromptMode>& modes, int n_starts, std::uint64_t seed,
                        const std::function<void(const MatrixEpisode&)>& on_episode = {});

std::uint64_t episode_seed(std::uint64_t seed, std::size_t world_index, int start_index);

}  // namespace peace
