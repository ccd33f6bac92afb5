#include "peace/eval_metrics.h"

#include <random>

#include "peace/errors.h"
#include "peace/hash.h"
#include "peace/world_gen.h"

namespace peace {

namespace {

void require_mask(const BinaryMask& m, const char* what) {
  if (m.width <= 0 || m.height <= 0) throw ValidationError(std::string(what) + ": mask dimensions must be positive");
}

}  // namespace

BinaryMask binarize(const Grid<double>& heatmap, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("binarize: tau must lie in (0, 1)");
  BinaryMask out(heatmap.width, heatmap.height, 0);
  require_mask(out, "binarize");
  for (std::size_t i = 0; i < heatmap.size(); ++i) out.values[i] = heatmap.values[i] >= tau ? 1 : 0;
  return out;
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  require_mask(pred, "iou");
  require_mask(gt, "iou");
  if (!pred.same_shape(gt)) {
    throw ComputationError("iou: dimension mismatch " + std::to_string(pred.width) + "x" +
                           std::to_string(pred.height) + " vs " + std::to_string(gt.width) + "x" +
                           std::to_string(gt.height));
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred.values[i] != 0;
    const bool b = gt.values[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double miou(const std::vector<HeatmapPair>& pairs, double tau) {
  if (pairs.empty()) throw ValidationError("miou: empty pair list");
  double total = 0.0;
  for (const auto& [heat, gt] : pairs) total += iou(binarize(heat, tau), gt);
  return total / static_cast<double>(pairs.size());
}

BinaryMask safe_mask(const Grid<std::uint16_t>& labels, const ClassTable& classes) {
  BinaryMask out(labels.width, labels.height, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) out.values[i] = classes.is_safe(labels.values[i]) ? 1 : 0;
  return out;
}

std::map<std::string, std::string> planted_tags(const DescriptionVocabulary& vocab, std::uint64_t seed) {
  std::map<std::string, std::string> tags;
  std::mt19937_64 rng(hash_combine(seed, 0x7a65));
  for (const auto* type : vocab.active_types()) {
    std::uniform_int_distribution<std::size_t> pick(0, type->words.size() - 1);
    tags[type->role.name] = type->words[pick(rng)];
  }
  return tags;
}

MiouSuiteResult run_miou_suite(const InferenceBackend& backend, const DescriptionVocabulary& vocab,
                               const TargetLists& targets, const PromptConfig& prompt,
                               const MiouSuiteOptions& options, CollapseMode collapse) {
  if (options.images < 1) throw ValidationError("mIoU suite needs at least one image");
  std::vector<HeatmapPair> fused, positive_only;
  for (int i = 0; i < options.images; ++i) {
    const std::uint64_t s = hash_combine(options.seed, static_cast<std::uint64_t>(i));
    RgbImage image = make_labeled_scene(s, options.image_size, planted_tags(vocab, s));
    if (options.blur_sigma > 0.0) image = gaussian_blur(image, options.blur_sigma);
    const PromptSet prompts = generate_prompt_set(image, targets, vocab, backend, 0, prompt);
    const LogitStack stack = segment_all(image, prompts, backend);

    LogitStack positives = stack;
    positives.channels.resize(prompts.x);
    const auto& ann = *image.annotation;
    const auto gt_full = safe_mask(ann.labels, *ann.classes);
    const BinaryMask gt = resize_nearest(gt_full, stack.width, stack.height);
    fused.emplace_back(fuse_logits(stack, prompts.x, prompts.y, collapse), gt);
    positive_only.emplace_back(fuse_logits(positives, prompts.x, 0, collapse), gt);
  }
  return {miou(fused, options.tau), miou(positive_only, options.tau), options.images};
}

}  // namespace peace
