#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peace/grid.h"
#include "peace/image.h"

namespace peace {

struct EmbeddingVector {
  std::vector<float> values;
  /// Set when the input text exceeded the tokenizer limit and was cut.
  bool truncated = false;

  std::size_t dim() const { return values.size(); }
  double norm() const;
};

/// Unit-L2 copy. Throws ComputationError for a zero vector.
EmbeddingVector normalize(EmbeddingVector v);

/// Raw, unbounded per-pixel logits for one prompt.
using LogitMap = Grid<float>;

enum class BackendKind { mock, portable_graph };

/// Knobs of the deterministic mock. Defaults are what the test suites
/// and the CLI use unless overridden in the run config.
struct MockOptions {
  double embed_noise = 0.25;   // image-embedding noise, relative to planted signal norm
  double seg_noise = 0.25;     // per-pixel logit noise sigma
  double match_logit = 2.0;
  double related_logit = 0.5;
  double other_logit = -2.0;
  /// Roles whose planted word must appear in the prompt for the logits to
  /// keep their class structure.
  std::vector<std::string> domain_roles{"environment"};
  double domain_shift_gain = 0.0;
  double domain_shift_noise = 1.0;
  /// Symmetric "related class" pairs.
  std::vector<std::pair<std::string, std::string>> affinity = default_affinity();

  static std::vector<std::pair<std::string, std::string>> default_affinity();
};

struct BackendDescriptor {
  BackendKind kind = BackendKind::mock;
  int embed_dim = 512;
  int seg_width = 64;
  int seg_height = 64;
  std::optional<std::uint64_t> seed = 7;
  std::optional<std::filesystem::path> model_dir;
  MockOptions mock;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  /// Unit-norm embedding. Deterministic for fixed backend and text.
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
  virtual int embed_dim() const = 0;
};

/// Immutable after construction; every method is safe to call concurrently.
class InferenceBackend : public TextEmbedder {
 public:
  virtual EmbeddingVector embed_image(const RgbImage& image) const = 0;
  virtual LogitMap segment(const RgbImage& image, std::string_view prompt) const = 0;
  virtual std::optional<std::string> caption(const RgbImage& image) const = 0;
  virtual const BackendDescriptor& descriptor() const = 0;
};

/// Validates the descriptor and builds the backend. Model-loading failures
/// surface here as BackendError, never at call time.
std::shared_ptr<const InferenceBackend> make_backend(const BackendDescriptor& descriptor);

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view s);

}  // namespace peace
