#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "peace/backend.h"

namespace peace {

/// Precomputed word embeddings in the "PEAC" binary layout:
///   "PEAC" | u32 version | u32 dim | u32 count | count*dim float32 (LE)
///   | count newline-terminated UTF-8 words, in row order.
class EmbeddingTable final : public TextEmbedder {
 public:
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingTable() = default;
  EmbeddingTable(std::uint32_t dim, std::vector<std::string> words, std::vector<float> rows);

  static EmbeddingTable read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  std::uint32_t dim() const { return dim_; }
  std::size_t count() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::vector<float> row(std::size_t i) const;

  /// Looks the text up as a word; throws ValidationError when absent.
  EmbeddingVector embed_text(std::string_view text) const override;
  int embed_dim() const override { return static_cast<int>(dim_); }

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> rows_;
};

}  // namespace peace
