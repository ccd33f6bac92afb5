#include "peace/vocab.h"

namespace peace {

// Mirrors config/vocabulary.json; a unit test keeps the two in sync.
std::string_view default_vocabulary_json() {
  static constexpr std::string_view kJson = R"json({
  "notes": "Word lists extend the quoted examples and are defaults, not ground truth. The negative target list is a project default.",
  "class_slot_marker": "{}",
  "template": "A {resolution} {frame} of {} in {environment}.",
  "types": [
    {"role": "resolution", "words": ["high-resolution", "low-resolution", "blurred", "rendered", "pixelated", "sharp", "grainy"]},
    {"role": "frame", "words": ["photo", "screen", "image", "view", "artwork", "picture", "screenshot"]},
    {"role": "environment", "words": ["sunny", "rainy", "foggy", "snow", "bright", "dark", "heat", "heat-map", "map", "piece", "shadows", "cloudy"]},
    {"role": "aerial", "enabled": false, "words": ["high", "top", "altitude", "overhead"]},
    {"role": "context_aware", "enabled": false, "words": ["next to", "top of", "behind"]}
  ],
  "targets": {
    "positives": ["grass", "open-field", "sidewalk", "dirt", "garden", "vegetation"],
    "negatives": ["building", "house", "road", "car", "water", "tree", "person"]
  }
}
)json";
  return kJson;
}

}  // namespace peace
