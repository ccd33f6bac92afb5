#pragma once

#include <array>
#include <vector>

#include "peace/image.h"

namespace peace {

struct Normalization {
  std::array<float, 3> mean{0.48145466f, 0.4578275f, 0.40821073f};
  std::array<float, 3> std{0.26862954f, 0.26130258f, 0.27577711f};
};

/// Shortest-side resize to `size`, center crop to size x size, scale to
/// [0,1], per-channel normalize. Returns a 1x3xHxW tensor in NCHW order.
std::vector<float> image_to_tensor(const RgbImage& image, int size, const Normalization& norm = {});

/// Plain resize to width x height (no crop), same normalization.
std::vector<float> image_to_tensor(const RgbImage& image, int width, int height,
                                   const Normalization& norm);

}  // namespace peace
