#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace peace {

struct GraphSpec {
  std::filesystem::path file;
  std::map<std::string, std::string> inputs;  // logical name -> tensor name
  std::string output;
};

/// Sidecar manifest describing exported graphs and the token table.
struct ModelManifest {
  std::string variant;
  int embed_dim = 512;
  int opset = 14;
  int image_size = 224;
  int seg_width = 352;
  int seg_height = 352;
  int context_length = 77;
  GraphSpec text_encoder;
  GraphSpec image_encoder;
  GraphSpec segmenter;
  std::filesystem::path token_table;
  std::string token_table_sha256;
  std::optional<std::filesystem::path> embedding_table;
  std::optional<GraphSpec> captioner;
};

/// Parses `manifest.json` in `model_dir`, resolving file paths against it.
/// Throws BackendError on schema problems, missing files, opset < 14 or a
/// token-table hash mismatch.
ModelManifest load_manifest(const std::filesystem::path& model_dir);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace peace
