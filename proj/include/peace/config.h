#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "peace/backend.h"
#include "peace/fusion.h"
#include "peace/landing_policy.h"
#include "peace/prompt_engine.h"
#include "peace/simulator.h"

namespace peace {

struct EvalConfig {
  double tau = 0.5;
  double blur_sigma = 1.5;
  int images = 40;
};

/// Merged configuration of one CLI invocation.
struct RunConfig {
  std::uint64_t seed = 0;
  /// Vocabulary document; the built-in one when unset. Its "targets" section
  /// supplies the positive and negative class words unless `targets` is set.
  std::optional<std::filesystem::path> vocabulary;
  std::optional<std::filesystem::path> targets;
  BackendDescriptor backend;
  PromptConfig prompt;
  CollapseMode collapse = CollapseMode::sum;
  PolicyConfig policy;
  SimulatorConfig simulator;
  EvalConfig eval;

  /// Throws ValidationError on the first violated invariant.
  void validate() const;
};

/// Parses a config document on top of `base`. Unknown keys at any level and
/// type mismatches raise SchemaError; relative paths resolve against
/// `base_dir`.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {},
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Effective configuration as a document parse_run_config accepts.
std::string serialize_run_config(const RunConfig& config);

}  // namespace peace
