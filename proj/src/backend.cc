#include "peace/backend.h"

#include <cmath>

#include "peace/errors.h"
#include "peace/mock_backend.h"
#include "peace/onnx_backend.h"

namespace peace {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (float v : values) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

EmbeddingVector normalize(EmbeddingVector v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ComputationError("cannot normalize a zero vector");
  for (auto& x : v.values) x = static_cast<float>(x / n);
  return v;
}

std::vector<std::pair<std::string, std::string>> MockOptions::default_affinity() {
  return {
      {"grass", "garden"},     {"grass", "vegetation"}, {"grass", "open-field"},
      {"garden", "vegetation"}, {"dirt", "open-field"},  {"sidewalk", "road"},
      {"tree", "vegetation"},  {"house", "building"},   {"car", "road"},
  };
}

std::shared_ptr<const InferenceBackend> make_backend(const BackendDescriptor& descriptor) {
  if (descriptor.embed_dim <= 0) throw BackendError("embed_dim must be positive");
  if (descriptor.seg_width <= 0 || descriptor.seg_height <= 0) {
    throw BackendError("seg_resolution must be positive");
  }
  switch (descriptor.kind) {
    case BackendKind::mock:
      if (!descriptor.seed) throw BackendError("mock backend requires a seed");
      return std::make_shared<MockBackend>(descriptor);
    case BackendKind::portable_graph:
      return make_portable_graph_backend(descriptor);
  }
  throw ContractError("unknown backend kind");
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::mock ? "mock" : "portable_graph";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "mock") return BackendKind::mock;
  if (s == "portable_graph") return BackendKind::portable_graph;
  throw ValidationError("unknown backend kind '" + std::string(s) + "'");
}

}  // namespace peace
