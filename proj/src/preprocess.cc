#include "peace/preprocess.h"

#include <algorithm>
#include <cmath>

#include "peace/errors.h"

namespace peace {
namespace {

std::vector<float> to_nchw(const RgbImage& image, const Normalization& norm) {
  const std::size_t plane = static_cast<std::size_t>(image.width) * image.height;
  std::vector<float> out(3 * plane);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = image.pixels[3 * i + c] / 255.0f;
      out[c * plane + i] = (v - norm.mean[c]) / norm.std[c];
    }
  }
  return out;
}

}  // namespace

std::vector<float> image_to_tensor(const RgbImage& image, int size, const Normalization& norm) {
  if (image.empty()) throw InputError("cannot preprocess an empty image");
  const double scale = static_cast<double>(size) / std::min(image.width, image.height);
  const int rw = std::max(size, static_cast<int>(std::lround(image.width * scale)));
  const int rh = std::max(size, static_cast<int>(std::lround(image.height * scale)));
  const RgbImage resized = resize_bilinear(image, rw, rh);
  RgbImage crop(size, size);
  const int ox = (rw - size) / 2;
  const int oy = (rh - size) / 2;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) crop.set(x, y, resized.get(x + ox, y + oy));
  }
  return to_nchw(crop, norm);
}

std::vector<float> image_to_tensor(const RgbImage& image, int width, int height,
                                   const Normalization& norm) {
  if (image.empty()) throw InputError("cannot preprocess an empty image");
  return to_nchw(resize_bilinear(image, width, height), norm);
}

}  // namespace peace
