#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peace/backend.h"
#include "peace/vocab.h"

namespace peace {

/// default: "A photo of {}."; dovesei: the static aerial string;
/// peace: per-frame word selection filled into the vocabulary template.
enum class PromptMode { plain, dovesei, peace };

std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view s);

enum class Polarity { positive, negative };

struct ScoredWord {
  std::string word;
  double score = 0.0;
};

struct RoleChoice {
  std::string role;
  std::vector<ScoredWord> words;  // descending score; size = top-k for environment, else 1
};

struct WordSelection {
  std::vector<RoleChoice> roles;  // active vocabulary order

  const RoleChoice* find(std::string_view role) const;
};

struct EngineeredPrompt {
  std::string text;
  std::string class_word;
  Polarity polarity = Polarity::positive;
};

struct PromptSet {
  std::vector<EngineeredPrompt> prompts;  // positives first, then negatives
  std::size_t x = 0;
  std::size_t y = 0;
  std::optional<WordSelection> selection;
  int frame_index = 0;
  PromptMode mode = PromptMode::peace;

  std::vector<std::string> texts() const;
};

struct PromptConfig {
  PromptMode mode = PromptMode::peace;
  int cadence = 4;
  int env_top_k = 1;
  bool caption_fusion = false;
};

/// u.v / (|u||v|). Throws ComputationError on zero norm or dimension mismatch.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Per active type, the word with the highest cosine similarity to the image
/// (lowest index wins ties). The environment role keeps the top `env_top_k`.
WordSelection select_words(const EmbeddingVector& image_embedding, const DescriptionVocabulary& vocab,
                           int env_top_k = 1);

/// Caption-fused variant: each word is scored as the text "word, caption".
WordSelection select_words(const EmbeddingVector& image_embedding, const DescriptionVocabulary& vocab,
                           int env_top_k, const TextEmbedder& embedder, const std::string& caption);

/// Fills the template's role slots with the selection (multi-word slots are
/// comma-joined) and the class slot with `class_word`.
EngineeredPrompt build_prompt(const WordSelection& selection, std::string_view class_word, Polarity polarity,
                              std::string_view template_text = kDefaultTemplate,
                              std::string_view class_slot_marker = "{}");

std::string plain_prompt(std::string_view class_word);
std::string dovesei_prompt(std::string_view class_word);

/// Prompt text for a fixed (non-adaptive) mode.
EngineeredPrompt static_prompt(PromptMode mode, std::string_view class_word, Polarity polarity);

/// Embeds the image once (peace mode), selects once, and expands every
/// positive then every negative target.
PromptSet generate_prompt_set(const RgbImage& image, const TargetLists& targets,
                              const DescriptionVocabulary& vocab, const InferenceBackend& backend,
                              int frame_index, const PromptConfig& config = {});

/// Regenerates when there is no cache, frame_index is a multiple of the
/// cadence, or a machine-state change was signalled; otherwise returns the
/// cache with frame_index bumped.
PromptSet maybe_regenerate(const std::optional<PromptSet>& cache, int frame_index, bool state_changed,
                           int cadence, const std::function<PromptSet(int)>& regenerate,
                           bool* regenerated = nullptr);

/// Owns the prompt cache for one episode.
class PromptScheduler {
 public:
  PromptScheduler(PromptConfig config, TargetLists targets, std::shared_ptr<const DescriptionVocabulary> vocab,
                  std::shared_ptr<const InferenceBackend> backend);

  const PromptSet& next(const RgbImage& image, int frame_index, bool state_changed);
  bool last_regenerated() const { return last_regenerated_; }
  int regenerations() const { return regenerations_; }

 private:
  PromptConfig config_;
  TargetLists targets_;
  std::shared_ptr<const DescriptionVocabulary> vocab_;
  std::shared_ptr<const InferenceBackend> backend_;
  std::optional<PromptSet> cache_;
  bool last_regenerated_ = false;
  int regenerations_ = 0;
};

}  // namespace peace
