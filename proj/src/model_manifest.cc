#include "peace/model_manifest.h"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>

#include "peace/errors.h"

namespace peace {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

namespace {

GraphSpec graph_from_json(const nlohmann::json& j, const std::filesystem::path& dir,
                          const std::string& name) {
  if (!j.is_object()) throw BackendError("manifest." + name + " must be an object");
  GraphSpec g;
  g.file = dir / j.at("file").get<std::string>();
  for (const auto& [k, v] : j.at("inputs").items()) g.inputs[k] = v.get<std::string>();
  g.output = j.at("output").get<std::string>();
  if (!std::filesystem::exists(g.file)) {
    throw BackendError("graph file missing for " + name + ": " + g.file.string());
  }
  return g;
}

}  // namespace

ModelManifest load_manifest(const std::filesystem::path& model_dir) {
  const auto path = model_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw BackendError("model manifest not found: " + path.string());
  ModelManifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.variant = j.at("variant").get<std::string>();
    m.embed_dim = j.at("embed_dim").get<int>();
    m.opset = j.value("opset", 14);
    m.image_size = j.value("image_size", 224);
    if (j.contains("seg_resolution")) {
      m.seg_width = j.at("seg_resolution").at(0).get<int>();
      m.seg_height = j.at("seg_resolution").at(1).get<int>();
    }
    m.context_length = j.value("context_length", 77);
    m.text_encoder = graph_from_json(j.at("text_encoder"), model_dir, "text_encoder");
    m.image_encoder = graph_from_json(j.at("image_encoder"), model_dir, "image_encoder");
    m.segmenter = graph_from_json(j.at("segmenter"), model_dir, "segmenter");
    m.token_table = model_dir / j.at("token_table").at("file").get<std::string>();
    m.token_table_sha256 = j.at("token_table").at("sha256").get<std::string>();
    if (j.contains("embedding_table") && !j.at("embedding_table").is_null()) {
      m.embedding_table = model_dir / j.at("embedding_table").get<std::string>();
    }
    if (j.contains("captioner") && !j.at("captioner").is_null()) {
      m.captioner = graph_from_json(j.at("captioner"), model_dir, "captioner");
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("invalid model manifest " + path.string() + ": " + e.what());
  }
  if (m.opset < 14) throw BackendError("graphs must use opset >= 14");
  if (m.embed_dim <= 0) throw BackendError("manifest embed_dim must be positive");
  if (!std::filesystem::exists(m.token_table)) {
    throw BackendError("token table missing: " + m.token_table.string());
  }
  if (sha256_file(m.token_table) != m.token_table_sha256) {
    throw BackendError("token table SHA-256 does not match manifest");
  }
  return m;
}

}  // namespace peace
