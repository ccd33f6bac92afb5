#include "peace/prompt_engine.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "peace/errors.h"

namespace peace {

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::plain: return "default";
    case PromptMode::dovesei: return "dovesei";
    case PromptMode::peace: return "peace";
  }
  return "?";
}

PromptMode parse_prompt_mode(std::string_view s) {
  if (s == "default") return PromptMode::plain;
  if (s == "dovesei") return PromptMode::dovesei;
  if (s == "peace") return PromptMode::peace;
  throw ValidationError("unknown prompt mode '" + std::string(s) + "' (default|dovesei|peace)");
}

const RoleChoice* WordSelection::find(std::string_view role) const {
  for (const auto& r : roles) {
    if (r.role == role) return &r;
  }
  return nullptr;
}

std::vector<std::string> PromptSet::texts() const {
  std::vector<std::string> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) out.push_back(p.text);
  return out;
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ComputationError("cosine_similarity: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (!(nu > 0.0) || !(nv > 0.0)) throw ComputationError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine_similarity(std::span<const float>(u.values), std::span<const float>(v.values));
}

namespace {

RoleChoice choose(const DescriptionType& type, const std::vector<double>& scores, std::size_t keep) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  // stable: equal scores keep file order
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RoleChoice choice{type.role.name, {}};
  keep = std::min(keep, order.size());
  for (std::size_t i = 0; i < keep; ++i) choice.words.push_back({type.words[order[i]], scores[order[i]]});
  return choice;
}

std::size_t keep_for(const DescriptionType& type, int env_top_k) {
  if (type.role.kind == RoleKind::environment) return static_cast<std::size_t>(std::max(1, env_top_k));
  return 1;
}

}  // namespace

WordSelection select_words(const EmbeddingVector& image_embedding, const DescriptionVocabulary& vocab,
                           int env_top_k) {
  WordSelection sel;
  for (const auto* type : vocab.active_types()) {
    if (!type->embedded()) throw ComputationError("vocabulary role '" + type->role.name + "' is not embedded");
    std::vector<double> scores;
    scores.reserve(type->words.size());
    for (const auto& e : type->embeddings) scores.push_back(cosine_similarity(image_embedding, e));
    sel.roles.push_back(choose(*type, scores, keep_for(*type, env_top_k)));
  }
  return sel;
}

WordSelection select_words(const EmbeddingVector& image_embedding, const DescriptionVocabulary& vocab,
                           int env_top_k, const TextEmbedder& embedder, const std::string& caption) {
  WordSelection sel;
  for (const auto* type : vocab.active_types()) {
    std::vector<double> scores;
    scores.reserve(type->words.size());
    for (const auto& w : type->words) {
      scores.push_back(cosine_similarity(image_embedding, embedder.embed_text(w + ", " + caption)));
    }
    sel.roles.push_back(choose(*type, scores, keep_for(*type, env_top_k)));
  }
  return sel;
}

EngineeredPrompt build_prompt(const WordSelection& selection, std::string_view class_word, Polarity polarity,
                              std::string_view template_text, std::string_view class_slot_marker) {
  if (class_word.empty()) throw ValidationError("class word must be non-empty");
  std::string text;
  std::size_t pos = 0;
  bool filled_class = false;
  while (pos < template_text.size()) {
    if (template_text.substr(pos).starts_with(class_slot_marker)) {
      text += class_word;
      pos += class_slot_marker.size();
      filled_class = true;
      continue;
    }
    if (template_text[pos] == '{') {
      const auto close = template_text.find('}', pos);
      if (close == std::string_view::npos) throw ValidationError("unterminated template placeholder");
      const auto role = Role::parse(template_text.substr(pos + 1, close - pos - 1)).name;
      const auto* choice = selection.find(role);
      if (choice == nullptr || choice->words.empty()) {
        throw ValidationError("selection has no word for role '" + role + "'");
      }
      for (std::size_t i = 0; i < choice->words.size(); ++i) {
        if (i > 0) text += ", ";
        text += choice->words[i].word;
      }
      pos = close + 1;
      continue;
    }
    text.push_back(template_text[pos++]);
  }
  if (!filled_class) throw ValidationError("template has no class slot");
  return {std::move(text), std::string(class_word), polarity};
}

std::string plain_prompt(std::string_view class_word) { return "A photo of " + std::string(class_word) + "."; }

std::string dovesei_prompt(std::string_view class_word) {
  return "Aerial view, drone footage photo of " + std::string(class_word) +
         ", shade, shadows, low resolution.";
}

EngineeredPrompt static_prompt(PromptMode mode, std::string_view class_word, Polarity polarity) {
  if (class_word.empty()) throw ValidationError("class word must be non-empty");
  switch (mode) {
    case PromptMode::plain: return {plain_prompt(class_word), std::string(class_word), polarity};
    case PromptMode::dovesei: return {dovesei_prompt(class_word), std::string(class_word), polarity};
    case PromptMode::peace: break;
  }
  throw ContractError("peace prompts need a word selection");
}

PromptSet generate_prompt_set(const RgbImage& image, const TargetLists& targets,
                              const DescriptionVocabulary& vocab, const InferenceBackend& backend,
                              int frame_index, const PromptConfig& config) {
  PromptSet set;
  set.frame_index = frame_index;
  set.mode = config.mode;
  set.x = targets.positives.size();
  set.y = targets.negatives.size();
  auto expand = [&](auto&& make) {
    for (const auto& w : targets.positives) set.prompts.push_back(make(w, Polarity::positive));
    for (const auto& w : targets.negatives) set.prompts.push_back(make(w, Polarity::negative));
  };
  if (config.mode != PromptMode::peace) {
    expand([&](const std::string& w, Polarity p) { return static_prompt(config.mode, w, p); });
    return set;
  }
  const auto image_embedding = backend.embed_image(image);
  std::optional<std::string> caption;
  if (config.caption_fusion) caption = backend.caption(image);
  set.selection = caption ? select_words(image_embedding, vocab, config.env_top_k, backend, *caption)
                          : select_words(image_embedding, vocab, config.env_top_k);
  expand([&](const std::string& w, Polarity p) {
    return build_prompt(*set.selection, w, p, vocab.template_text, vocab.class_slot_marker);
  });
  return set;
}

PromptSet maybe_regenerate(const std::optional<PromptSet>& cache, int frame_index, bool state_changed,
                           int cadence, const std::function<PromptSet(int)>& regenerate, bool* regenerated) {
  if (cadence < 1) throw ContractError("prompt cadence must be >= 1");
  const bool due = !cache || state_changed || frame_index % cadence == 0;
  if (regenerated != nullptr) *regenerated = due;
  if (due) return regenerate(frame_index);
  PromptSet out = *cache;
  out.frame_index = frame_index;
  return out;
}

PromptScheduler::PromptScheduler(PromptConfig config, TargetLists targets,
                                 std::shared_ptr<const DescriptionVocabulary> vocab,
                                 std::shared_ptr<const InferenceBackend> backend)
    : config_(config), targets_(std::move(targets)), vocab_(std::move(vocab)), backend_(std::move(backend)) {
  if (config_.cadence < 1) throw ValidationError("prompt.cadence must be >= 1");
}

const PromptSet& PromptScheduler::next(const RgbImage& image, int frame_index, bool state_changed) {
  if (config_.mode != PromptMode::peace && cache_) {
    // Static prompts never depend on the frame.
    cache_->frame_index = frame_index;
    last_regenerated_ = false;
    return *cache_;
  }
  cache_ = maybe_regenerate(
      cache_, frame_index, state_changed, config_.cadence,
      [&](int f) { return generate_prompt_set(image, targets_, *vocab_, *backend_, f, config_); },
      &last_regenerated_);
  if (last_regenerated_) ++regenerations_;
  return *cache_;
}

}  // namespace peace
