#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "peace/backend.h"

namespace peace {

/// Lowercased word tokens; letters, digits, '-' and '\'' stay inside a token.
std::vector<std::string> word_tokens(std::string_view text);

/// Deterministic stand-in for a dual encoder plus an open-vocabulary
/// segmenter, driven entirely by an image's SyntheticAnnotation.
///
/// Text embeddings are bag-of-words sums of seeded per-token unit vectors.
/// An annotated image embeds as the sum of its tag words' text embeddings
/// plus seeded noise, so a tag shared with a vocabulary word rotates the
/// image vector toward that word and plants it as the cosine argmax.
///
/// Segmentation reads the annotation's label grid: pixels of the prompt's
/// class score match_logit, related classes related_logit, all others
/// other_logit, plus seeded Gaussian noise. When the image carries a tag for
/// one of the domain roles and the prompt does not mention that word, the
/// class structure is scaled by domain_shift_gain and the noise raised to
/// domain_shift_noise.
class MockBackend final : public InferenceBackend {
 public:
  explicit MockBackend(BackendDescriptor descriptor);

  EmbeddingVector embed_text(std::string_view text) const override;
  int embed_dim() const override { return descriptor_.embed_dim; }
  EmbeddingVector embed_image(const RgbImage& image) const override;
  LogitMap segment(const RgbImage& image, std::string_view prompt) const override;
  std::optional<std::string> caption(const RgbImage& image) const override;
  const BackendDescriptor& descriptor() const override { return descriptor_; }

  /// Class word the prompt refers to, if any known class word occurs in it.
  std::optional<std::string> prompt_class(std::string_view prompt,
                                          const ClassTable* classes) const;
  /// True when the prompt mentions every planted domain-role word.
  bool in_domain(const RgbImage& image, std::string_view prompt) const;
  /// Noise-free class logit for a pixel of class `pixel_class`.
  double base_logit(std::string_view pixel_class, std::string_view prompt_class) const;

 private:
  std::vector<float> token_vector(std::string_view token) const;
  std::vector<float> unit_gaussian(std::uint64_t stream) const;

  BackendDescriptor descriptor_;
  std::uint64_t seed_;
};

}  // namespace peace
