#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace peace {

/// Byte-level BPE tokenizer compatible with the CLIP token table
/// (bpe_simple_vocab_16e6.txt[.gz]): 256 byte symbols, their "</w>"
/// word-final variants, one entry per merge, then <|startoftext|> and
/// <|endoftext|>. The full table yields 49,408 ids.
class BpeTokenizer {
 public:
  static constexpr int kContextLength = 77;
  static constexpr std::size_t kStandardMerges = 49152 - 256 - 2;

  /// Reads a merges file (plain or gzip). The first line is a version header.
  static BpeTokenizer from_file(const std::filesystem::path& path);
  /// Merge lines "a b", header line excluded.
  explicit BpeTokenizer(const std::vector<std::pair<std::string, std::string>>& merges);

  struct Encoding {
    std::vector<std::int64_t> ids;  // <|startoftext|> ... <|endoftext|>, zero padded
    std::vector<std::int64_t> attention_mask;
    int length = 0;                 // non-padding tokens
    bool truncated = false;
  };

  /// Token ids of `text` without start/end markers.
  std::vector<std::int64_t> encode(std::string_view text) const;
  /// Model input with markers, truncated (end marker kept) and padded.
  Encoding encode_for_model(std::string_view text, int context_length = kContextLength) const;
  std::string decode(const std::vector<std::int64_t>& ids) const;

  std::size_t vocab_size() const { return decoder_.size(); }
  std::int64_t start_token() const { return sot_; }
  std::int64_t end_token() const { return eot_; }
  std::int64_t token_id(const std::string& symbol) const;

 private:
  std::vector<std::string> bpe(const std::string& token) const;

  std::unordered_map<std::string, std::int64_t> encoder_;
  std::vector<std::string> decoder_;
  std::map<std::pair<std::string, std::string>, int> ranks_;
  std::vector<std::string> byte_symbol_;  // byte -> UTF-8 of its mapped code point
  std::unordered_map<std::string, std::uint8_t> symbol_byte_;
  std::int64_t sot_ = 0;
  std::int64_t eot_ = 0;
};

}  // namespace peace
