#include "peace/bpe_tokenizer.h"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <climits>
#include <sstream>

#include "peace/errors.h"

namespace peace {
namespace {

std::string utf8(std::uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return s;
}

// Splits a UTF-8 string into code-point substrings.
std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = 1;
    if (c >= 0xF0) n = 4;
    else if (c >= 0xE0) n = 3;
    else if (c >= 0xC0) n = 2;
    n = std::min(n, s.size() - i);
    out.emplace_back(s.substr(i, n));
    i += n;
  }
  return out;
}

// The byte order of the reference bytes_to_unicode table: printable bytes
// keep their code point, the rest map to 256 + n in ascending byte order.
std::vector<std::pair<std::uint8_t, std::uint32_t>> byte_unicode_order() {
  std::vector<std::pair<std::uint8_t, std::uint32_t>> order;
  auto printable = [](int b) {
    return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
  };
  for (int b = 0; b < 256; ++b) {
    if (printable(b)) order.emplace_back(static_cast<std::uint8_t>(b), static_cast<std::uint32_t>(b));
  }
  std::uint32_t n = 0;
  for (int b = 0; b < 256; ++b) {
    if (!printable(b)) order.emplace_back(static_cast<std::uint8_t>(b), 256 + n++);
  }
  return order;
}

enum class CharClass { letter, number, space, other };

CharClass classify(const std::string& ch) {
  const auto c = static_cast<unsigned char>(ch[0]);
  if (ch.size() == 1) {
    if (std::isalpha(c)) return CharClass::letter;
    if (std::isdigit(c)) return CharClass::number;
    if (std::isspace(c)) return CharClass::space;
    return CharClass::other;
  }
  // Non-ASCII: no Unicode tables; treat as letters.
  return CharClass::letter;
}

// Pre-tokenization equivalent to the reference pattern
//   <|startoftext|>|<|endoftext|>|'s|'t|'re|'ve|'m|'ll|'d|\p{L}+|\p{N}|[^\s\p{L}\p{N}]+
std::vector<std::string> pretokenize(const std::string& text) {
  static const char* kSpecial[] = {"<|startoftext|>", "<|endoftext|>"};
  static const char* kContractions[] = {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"};
  std::vector<std::string> out;
  const auto chars = utf8_chars(text);
  std::size_t byte_pos = 0;
  std::vector<std::size_t> offsets;
  for (const auto& ch : chars) {
    offsets.push_back(byte_pos);
    byte_pos += ch.size();
  }
  std::size_t i = 0;
  while (i < chars.size()) {
    const std::string_view rest(text.data() + offsets[i], text.size() - offsets[i]);
    bool matched = false;
    for (const char* sp : kSpecial) {
      if (rest.starts_with(sp)) {
        out.emplace_back(sp);
        i += std::string_view(sp).size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (const char* k : kContractions) {
      if (rest.starts_with(k)) {
        out.emplace_back(k);
        i += std::string_view(k).size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const auto cls = classify(chars[i]);
    if (cls == CharClass::space) {
      ++i;
      continue;
    }
    std::string tok = chars[i++];
    if (cls == CharClass::letter) {
      while (i < chars.size() && classify(chars[i]) == CharClass::letter) tok += chars[i++];
    } else if (cls == CharClass::other) {
      // Stops at whitespace, letters, digits; a leading apostrophe of a
      // contraction still belongs here, matching the reference regex scan.
      while (i < chars.size() && classify(chars[i]) == CharClass::other) tok += chars[i++];
    }
    out.push_back(std::move(tok));
  }
  return out;
}

std::string clean_text(std::string_view text) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

std::string read_maybe_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw InputError("cannot open token table " + path.string());
  std::string data;
  char buf[1 << 15];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw InputError("corrupt token table " + path.string());
  return data;
}

}  // namespace

BpeTokenizer BpeTokenizer::from_file(const std::filesystem::path& path) {
  std::istringstream in(read_maybe_gzip(path));
  std::string line;
  std::getline(in, line);  // version header
  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < kStandardMerges && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw InputError("malformed merge line: " + line);
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return BpeTokenizer(merges);
}

BpeTokenizer::BpeTokenizer(const std::vector<std::pair<std::string, std::string>>& merges) {
  byte_symbol_.resize(256);
  std::vector<std::string> base;
  for (const auto& [b, cp] : byte_unicode_order()) {
    byte_symbol_[b] = utf8(cp);
    symbol_byte_[byte_symbol_[b]] = b;
    base.push_back(byte_symbol_[b]);
  }
  decoder_ = base;
  for (const auto& s : base) decoder_.push_back(s + "</w>");
  for (std::size_t r = 0; r < merges.size(); ++r) {
    decoder_.push_back(merges[r].first + merges[r].second);
    ranks_.emplace(merges[r], static_cast<int>(r));
  }
  decoder_.emplace_back("<|startoftext|>");
  decoder_.emplace_back("<|endoftext|>");
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    // Later duplicates must not shadow earlier ids.
    encoder_.emplace(decoder_[i], static_cast<std::int64_t>(i));
  }
  sot_ = encoder_.at("<|startoftext|>");
  eot_ = encoder_.at("<|endoftext|>");
}

std::int64_t BpeTokenizer::token_id(const std::string& symbol) const {
  auto it = encoder_.find(symbol);
  if (it == encoder_.end()) throw ContractError("unknown BPE symbol '" + symbol + "'");
  return it->second;
}

std::vector<std::string> BpeTokenizer::bpe(const std::string& token) const {
  auto word = utf8_chars(token);
  if (word.empty()) return {};
  word.back() += "</w>";
  while (word.size() > 1) {
    int best_rank = INT_MAX;
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      auto it = ranks_.find({word[i], word[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = i;
      }
    }
    if (best_rank == INT_MAX) break;
    const std::string first = word[best];
    const std::string second = word[best + 1];
    std::vector<std::string> merged;
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == first && word[i + 1] == second) {
        merged.push_back(first + second);
        i += 2;
      } else {
        merged.push_back(word[i]);
        ++i;
      }
    }
    word = std::move(merged);
  }
  return word;
}

std::vector<std::int64_t> BpeTokenizer::encode(std::string_view text) const {
  std::vector<std::int64_t> ids;
  for (const auto& piece : pretokenize(clean_text(text))) {
    if (piece == "<|startoftext|>" || piece == "<|endoftext|>") {
      ids.push_back(encoder_.at(piece));
      continue;
    }
    std::string mapped;
    for (unsigned char b : piece) mapped += byte_symbol_[b];
    for (const auto& sym : bpe(mapped)) ids.push_back(encoder_.at(sym));
  }
  return ids;
}

BpeTokenizer::Encoding BpeTokenizer::encode_for_model(std::string_view text, int context_length) const {
  if (context_length < 2) throw ContractError("context length must be at least 2");
  auto body = encode(text);
  Encoding e;
  e.ids.push_back(sot_);
  e.ids.insert(e.ids.end(), body.begin(), body.end());
  e.ids.push_back(eot_);
  if (static_cast<int>(e.ids.size()) > context_length) {
    e.ids.resize(context_length);
    e.ids.back() = eot_;
    e.truncated = true;
  }
  e.length = static_cast<int>(e.ids.size());
  e.attention_mask.assign(e.ids.size(), 1);
  e.ids.resize(context_length, 0);
  e.attention_mask.resize(context_length, 0);
  return e;
}

std::string BpeTokenizer::decode(const std::vector<std::int64_t>& ids) const {
  std::string joined;
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= decoder_.size()) continue;
    joined += decoder_[id];
  }
  std::string out;
  std::string_view rest = joined;
  while (!rest.empty()) {
    if (rest.starts_with("</w>")) {
      out.push_back(' ');
      rest.remove_prefix(4);
      continue;
    }
    auto ch = utf8_chars(rest.substr(0, std::min<std::size_t>(4, rest.size())))[0];
    auto it = symbol_byte_.find(ch);
    if (it != symbol_byte_.end()) {
      out.push_back(static_cast<char>(it->second));
    } else {
      out += ch;
    }
    rest.remove_prefix(ch.size());
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace peace
