#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "peace/backend.h"
#include "peace/fusion.h"
#include "peace/grid.h"
#include "peace/image.h"
#include "peace/prompt_engine.h"
#include "peace/vocab.h"

namespace peace {

/// Nonzero = true. Dimensions must be positive.
using BinaryMask = Grid<std::uint8_t>;

/// value >= tau -> true. tau must lie in (0, 1).
BinaryMask binarize(const Grid<double>& heatmap, double tau);

/// |a & b| / |a | b|, with two empty masks scoring 1.0.
double iou(const BinaryMask& pred, const BinaryMask& gt);

using HeatmapPair = std::pair<Grid<double>, BinaryMask>;

/// Unweighted mean of per-pair IoU after binarizing each heatmap at tau.
double miou(const std::vector<HeatmapPair>& pairs, double tau);

/// Ground-truth mask of safe-flagged labels.
BinaryMask safe_mask(const Grid<std::uint16_t>& labels, const ClassTable& classes);

struct MiouSuiteOptions {
  int images = 40;
  int image_size = 64;
  double blur_sigma = 1.5;
  double tau = 0.5;
  std::uint64_t seed = 0;
};

struct MiouSuiteResult {
  double fused = 0.0;          // positives and negatives, negatives dropped
  double positive_only = 0.0;  // positives alone
  int images = 0;
};

/// Generates labeled scenes with planted description tags drawn from the
/// vocabulary, blurs them, segments with the given mode's prompts and scores
/// both fusion variants against the safe-label mask.
MiouSuiteResult run_miou_suite(const InferenceBackend& backend, const DescriptionVocabulary& vocab,
                               const TargetLists& targets, const PromptConfig& prompt,
                               const MiouSuiteOptions& options, CollapseMode collapse = CollapseMode::sum);

/// Tags with one seeded word per active vocabulary role.
std::map<std::string, std::string> planted_tags(const DescriptionVocabulary& vocab, std::uint64_t seed);

}  // namespace peace
