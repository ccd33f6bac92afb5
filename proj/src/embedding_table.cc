#include "peace/embedding_table.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "peace/errors.h"

namespace peace {
namespace {

static_assert(std::endian::native == std::endian::little, "PEAC I/O assumes a little-endian host");

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw InputError("truncated embedding table header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::uint32_t dim, std::vector<std::string> words, std::vector<float> rows)
    : dim_(dim), words_(std::move(words)), rows_(std::move(rows)) {
  if (rows_.size() != static_cast<std::size_t>(dim_) * words_.size()) {
    throw ValidationError("embedding table row data does not match dim x count");
  }
  for (const auto& w : words_) {
    if (w.find('\n') != std::string::npos) throw ValidationError("table words may not contain newlines");
  }
}

EmbeddingTable EmbeddingTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PEAC", 4) != 0) {
    throw InputError("not a PEAC embedding table: " + path.string());
  }
  const auto version = read_u32(in);
  if (version != kVersion) throw InputError("unsupported PEAC version " + std::to_string(version));
  const auto dim = read_u32(in);
  const auto count = read_u32(in);
  std::vector<float> rows(static_cast<std::size_t>(dim) * count);
  if (!in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size() * 4))) {
    throw InputError("truncated PEAC matrix: " + path.string());
  }
  std::vector<std::string> words;
  std::string line;
  while (words.size() < count && std::getline(in, line)) words.push_back(line);
  if (words.size() != count) throw InputError("PEAC word list shorter than row count");
  return EmbeddingTable(dim, std::move(words), std::move(rows));
}

void EmbeddingTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write("PEAC", 4);
  write_u32(out, kVersion);
  write_u32(out, dim_);
  write_u32(out, static_cast<std::uint32_t>(words_.size()));
  out.write(reinterpret_cast<const char*>(rows_.data()), static_cast<std::streamsize>(rows_.size() * 4));
  for (const auto& w : words_) out << w << '\n';
}

std::vector<float> EmbeddingTable::row(std::size_t i) const {
  auto begin = rows_.begin() + static_cast<std::ptrdiff_t>(i * dim_);
  return {begin, begin + dim_};
}

EmbeddingVector EmbeddingTable::embed_text(std::string_view text) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == text) return normalize(EmbeddingVector{row(i), false});
  }
  throw ValidationError("word '" + std::string(text) + "' not in embedding table");
}

}  // namespace peace
