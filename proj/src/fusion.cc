#include "peace/fusion.h"

#include <algorithm>
#include <cmath>

#include "peace/errors.h"

namespace peace {

std::string_view to_string(CollapseMode mode) { return mode == CollapseMode::sum ? "sum" : "max"; }

CollapseMode parse_collapse_mode(std::string_view s) {
  if (s == "sum") return CollapseMode::sum;
  if (s == "max") return CollapseMode::max;
  throw ValidationError("unknown collapse mode '" + std::string(s) + "' (sum|max)");
}

LogitStack segment_all(const RgbImage& image, const PromptSet& prompts, const InferenceBackend& backend) {
  if (prompts.prompts.empty()) throw ContractError("segment_all needs at least one prompt");
  LogitStack stack;
  stack.channels.reserve(prompts.prompts.size());
  for (const auto& p : prompts.prompts) {
    try {
      stack.channels.push_back(backend.segment(image, p.text));
    } catch (const Error& e) {
      throw BackendError("segmentation failed for prompt '" + p.text + "': " + e.what());
    }
    const auto& c = stack.channels.back();
    if (stack.channels.size() == 1) {
      stack.width = c.width;
      stack.height = c.height;
    } else if (c.width != stack.width || c.height != stack.height) {
      throw BackendError("prompt '" + p.text + "' produced a logit map of a different size");
    }
  }
  return stack;
}

FusedStack softmax_fuse(const LogitStack& stack) {
  const std::size_t k = stack.k();
  if (k == 0) throw ContractError("softmax_fuse needs at least one channel");
  FusedStack fused;
  fused.width = stack.width;
  fused.height = stack.height;
  fused.channels.assign(k, Grid<double>(stack.width, stack.height));
  for (const auto& c : stack.channels) {
    if (c.width != stack.width || c.height != stack.height) throw ContractError("logit channels differ in size");
  }
  const std::size_t n = static_cast<std::size_t>(stack.width) * stack.height;
  std::vector<double> e(k);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      const double v = stack.channels[c].values[i];
      if (!std::isfinite(v)) {
        throw ComputationError("non-finite logit at pixel (" + std::to_string(i % stack.width) + ", " +
                               std::to_string(i / stack.width) + ") channel " + std::to_string(c));
      }
      m = std::max(m, v);
    }
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      e[c] = std::exp(static_cast<double>(stack.channels[c].values[i]) - m);
      s += e[c];
    }
    for (std::size_t c = 0; c < k; ++c) fused.channels[c].values[i] = e[c] / s;
  }
  return fused;
}

FusedStack drop_negatives(const FusedStack& fused, std::size_t x, std::size_t y) {
  if (x + y != fused.k()) {
    throw ContractError("drop_negatives: X + Y = " + std::to_string(x + y) + " but K = " +
                        std::to_string(fused.k()));
  }
  FusedStack out;
  out.width = fused.width;
  out.height = fused.height;
  out.channels.assign(fused.channels.begin(), fused.channels.begin() + static_cast<std::ptrdiff_t>(x));
  return out;
}

Grid<double> collapse(const FusedStack& positives, CollapseMode mode) {
  if (positives.k() == 0) throw ContractError("collapse needs at least one positive channel");
  Grid<double> out(positives.width, positives.height, 0.0);
  for (const auto& c : positives.channels) {
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      out.values[i] = mode == CollapseMode::sum ? out.values[i] + c.values[i] : std::max(out.values[i], c.values[i]);
    }
  }
  for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Grid<double> fuse_logits(const LogitStack& stack, std::size_t x, std::size_t y, CollapseMode mode) {
  return collapse(drop_negatives(softmax_fuse(stack), x, y), mode);
}

SafetyHeatmap fuse_pipeline(const RgbImage& image, const PromptSet& prompts, const InferenceBackend& backend,
                            CollapseMode mode) {
  if (prompts.x == 0) throw ContractError("fuse_pipeline needs at least one positive prompt");
  const auto stack = segment_all(image, prompts, backend);
  SafetyHeatmap heat;
  heat.values = fuse_logits(stack, prompts.x, prompts.y, mode);
  heat.prompts = prompts.texts();
  heat.x = prompts.x;
  heat.y = prompts.y;
  return heat;
}

}  // namespace peace
