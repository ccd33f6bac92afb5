#pragma once

#include <string>
#include <vector>

#include "peace/backend.h"
#include "peace/grid.h"
#include "peace/prompt_engine.h"

namespace peace {

/// One logit channel per prompt, in prompt order.
struct LogitStack {
  int width = 0;
  int height = 0;
  std::vector<LogitMap> channels;

  std::size_t k() const { return channels.size(); }
};

/// Per-pixel probabilities across channels; each pixel sums to 1.
struct FusedStack {
  int width = 0;
  int height = 0;
  std::vector<Grid<double>> channels;

  std::size_t k() const { return channels.size(); }
};

struct SafetyHeatmap {
  Grid<double> values;  // in [0, 1]
  std::vector<std::string> prompts;
  std::size_t x = 0;
  std::size_t y = 0;
};

enum class CollapseMode { sum, max };

std::string_view to_string(CollapseMode mode);
CollapseMode parse_collapse_mode(std::string_view s);

/// Calls backend.segment once per prompt. Failures name the prompt.
LogitStack segment_all(const RgbImage& image, const PromptSet& prompts, const InferenceBackend& backend);

/// Softmax across channels at every pixel, stabilized by subtracting the
/// per-pixel maximum. Non-finite logits raise ComputationError.
FusedStack softmax_fuse(const LogitStack& stack);

/// First `x` channels, untouched. Requires x + y == K.
FusedStack drop_negatives(const FusedStack& fused, std::size_t x, std::size_t y);

/// One scalar field from the positive channels: per-pixel sum (default) or max.
Grid<double> collapse(const FusedStack& positives, CollapseMode mode = CollapseMode::sum);

SafetyHeatmap fuse_pipeline(const RgbImage& image, const PromptSet& prompts, const InferenceBackend& backend,
                            CollapseMode mode = CollapseMode::sum);

/// Softmax fusion + negative drop + collapse over an existing logit stack.
Grid<double> fuse_logits(const LogitStack& stack, std::size_t x, std::size_t y,
                         CollapseMode mode = CollapseMode::sum);

}  // namespace peace
