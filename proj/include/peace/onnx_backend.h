#pragma once

#include <memory>

#include "peace/backend.h"

namespace peace {

/// Builds the ONNX Runtime backed backend from descriptor.model_dir (or
/// $PEACE_MODEL_DIR). Validates the manifest first; throws BackendError when
/// assets are missing or the library was built without ONNX Runtime.
std::shared_ptr<const InferenceBackend> make_portable_graph_backend(const BackendDescriptor& descriptor);

/// True when this build links ONNX Runtime.
bool portable_graph_available();

}  // namespace peace
