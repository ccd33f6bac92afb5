#include "peace/onnx_backend.h"

#include <cstdlib>

#include "peace/bpe_tokenizer.h"
#include "peace/errors.h"
#include "peace/model_manifest.h"
#include "peace/preprocess.h"

#ifdef PEACE_HAVE_ONNXRUNTIME
#include <onnxruntime_cxx_api.h>
#endif

namespace peace {
namespace {

std::filesystem::path resolve_model_dir(const BackendDescriptor& d) {
  if (d.model_dir) return *d.model_dir;
  if (const char* env = std::getenv("PEACE_MODEL_DIR"); env != nullptr && *env != '\0') return env;
  throw BackendError("portable_graph backend needs model_dir or PEACE_MODEL_DIR");
}

#ifdef PEACE_HAVE_ONNXRUNTIME

class OnnxBackend final : public InferenceBackend {
 public:
  OnnxBackend(BackendDescriptor descriptor, ModelManifest manifest)
      : descriptor_(std::move(descriptor)),
        manifest_(std::move(manifest)),
        tokenizer_(BpeTokenizer::from_file(manifest_.token_table)),
        env_(ORT_LOGGING_LEVEL_WARNING, "peace"),
        memory_(Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault)) {
    descriptor_.embed_dim = manifest_.embed_dim;
    descriptor_.seg_width = manifest_.seg_width;
    descriptor_.seg_height = manifest_.seg_height;
    try {
      text_ = std::make_unique<Ort::Session>(env_, manifest_.text_encoder.file.c_str(), options_);
      image_ = std::make_unique<Ort::Session>(env_, manifest_.image_encoder.file.c_str(), options_);
      seg_ = std::make_unique<Ort::Session>(env_, manifest_.segmenter.file.c_str(), options_);
    } catch (const Ort::Exception& e) {
      throw BackendError(std::string("failed to load graph: ") + e.what());
    }
  }

  EmbeddingVector embed_text(std::string_view text) const override {
    if (text.empty()) throw ValidationError("embed_text requires non-empty text");
    auto enc = tokenizer_.encode_for_model(text, manifest_.context_length);
    const std::array<std::int64_t, 2> shape{1, manifest_.context_length};
    std::vector<Ort::Value> inputs;
    std::vector<const char*> names;
    const auto& in = manifest_.text_encoder.inputs;
    inputs.push_back(Ort::Value::CreateTensor<std::int64_t>(memory_, enc.ids.data(), enc.ids.size(),
                                                            shape.data(), shape.size()));
    names.push_back(in.at("input_ids").c_str());
    if (auto it = in.find("attention_mask"); it != in.end()) {
      inputs.push_back(Ort::Value::CreateTensor<std::int64_t>(
          memory_, enc.attention_mask.data(), enc.attention_mask.size(), shape.data(), shape.size()));
      names.push_back(it->second.c_str());
    }
    auto out = run(*text_, names, inputs, manifest_.text_encoder.output);
    EmbeddingVector v{std::move(out), enc.truncated};
    return normalize(std::move(v));
  }

  int embed_dim() const override { return manifest_.embed_dim; }

  EmbeddingVector embed_image(const RgbImage& image) const override {
    if (image.empty()) throw InputError("embed_image: zero-sized image");
    auto pixels = image_to_tensor(image, manifest_.image_size);
    const std::array<std::int64_t, 4> shape{1, 3, manifest_.image_size, manifest_.image_size};
    std::vector<Ort::Value> inputs;
    inputs.push_back(Ort::Value::CreateTensor<float>(memory_, pixels.data(), pixels.size(), shape.data(),
                                                     shape.size()));
    std::vector<const char*> names{manifest_.image_encoder.inputs.at("pixel_values").c_str()};
    return normalize(EmbeddingVector{run(*image_, names, inputs, manifest_.image_encoder.output), false});
  }

  LogitMap segment(const RgbImage& image, std::string_view prompt) const override {
    if (prompt.empty()) throw ValidationError("segment requires a non-empty prompt");
    auto pixels = image_to_tensor(image, manifest_.seg_width, manifest_.seg_height, Normalization{});
    auto enc = tokenizer_.encode_for_model(prompt, manifest_.context_length);
    const std::array<std::int64_t, 4> pshape{1, 3, manifest_.seg_height, manifest_.seg_width};
    const std::array<std::int64_t, 2> tshape{1, manifest_.context_length};
    const auto& in = manifest_.segmenter.inputs;
    std::vector<Ort::Value> inputs;
    std::vector<const char*> names;
    inputs.push_back(Ort::Value::CreateTensor<float>(memory_, pixels.data(), pixels.size(), pshape.data(),
                                                     pshape.size()));
    names.push_back(in.at("pixel_values").c_str());
    inputs.push_back(Ort::Value::CreateTensor<std::int64_t>(memory_, enc.ids.data(), enc.ids.size(),
                                                            tshape.data(), tshape.size()));
    names.push_back(in.at("input_ids").c_str());
    if (auto it = in.find("attention_mask"); it != in.end()) {
      inputs.push_back(Ort::Value::CreateTensor<std::int64_t>(
          memory_, enc.attention_mask.data(), enc.attention_mask.size(), tshape.data(), tshape.size()));
      names.push_back(it->second.c_str());
    }
    auto out = run(*seg_, names, inputs, manifest_.segmenter.output);
    const std::size_t expected = static_cast<std::size_t>(manifest_.seg_width) * manifest_.seg_height;
    if (out.size() != expected) throw BackendError("segmenter output size does not match seg_resolution");
    LogitMap map(manifest_.seg_width, manifest_.seg_height);
    map.values = std::move(out);
    return map;
  }

  // Autoregressive caption decoding is not wired up; absence is valid.
  std::optional<std::string> caption(const RgbImage&) const override { return std::nullopt; }

  const BackendDescriptor& descriptor() const override { return descriptor_; }

 private:
  std::vector<float> run(Ort::Session& session, const std::vector<const char*>& names,
                         std::vector<Ort::Value>& inputs, const std::string& output) const {
    const char* out_name = output.c_str();
    try {
      auto outs = session.Run(Ort::RunOptions{nullptr}, names.data(), inputs.data(), inputs.size(),
                              &out_name, 1);
      const auto count = outs[0].GetTensorTypeAndShapeInfo().GetElementCount();
      const float* data = outs[0].GetTensorData<float>();
      return {data, data + count};
    } catch (const Ort::Exception& e) {
      throw BackendError(std::string("inference failed: ") + e.what());
    }
  }

  BackendDescriptor descriptor_;
  ModelManifest manifest_;
  BpeTokenizer tokenizer_;
  Ort::Env env_;
  Ort::SessionOptions options_;
  Ort::MemoryInfo memory_;
  std::unique_ptr<Ort::Session> text_;
  std::unique_ptr<Ort::Session> image_;
  std::unique_ptr<Ort::Session> seg_;
};

#endif

}  // namespace

bool portable_graph_available() {
#ifdef PEACE_HAVE_ONNXRUNTIME
  return true;
#else
  return false;
#endif
}

std::shared_ptr<const InferenceBackend> make_portable_graph_backend(const BackendDescriptor& descriptor) {
  auto manifest = load_manifest(resolve_model_dir(descriptor));
#ifdef PEACE_HAVE_ONNXRUNTIME
  return std::make_shared<OnnxBackend>(descriptor, std::move(manifest));
#else
  throw BackendError("portable_graph backend unavailable: built without ONNX Runtime (variant '" +
                     manifest.variant + "')");
#endif
}

}  // namespace peace
