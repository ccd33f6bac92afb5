#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "peace/grid.h"

namespace peace {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct ClassInfo {
  std::uint16_t id = 0;
  std::string word;
  bool safe = false;
  Rgb color;
};

/// Id -> class word + safe flag. Ids need not be contiguous.
class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<ClassInfo> classes);

  const std::vector<ClassInfo>& classes() const { return classes_; }
  const ClassInfo* find(std::uint16_t id) const;
  const ClassInfo* find(std::string_view word) const;
  bool is_safe(std::uint16_t id) const;

  /// The table used by the synthetic world generator. Id 0 is "unknown".
  static ClassTable standard();

 private:
  std::vector<ClassInfo> classes_;
};

inline constexpr std::uint16_t kUnknownClass = 0;

/// Ground truth carried alongside synthetic images. Real backends ignore it;
/// the mock backend derives embeddings, captions and logits from it.
struct SyntheticAnnotation {
  std::map<std::string, std::string> tags;  // role -> planted word
  Grid<std::uint16_t> labels;               // may be empty
  std::shared_ptr<const ClassTable> classes;

  /// Most frequent labeled class word, if any labels exist.
  std::optional<std::string> majority_class() const;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major
  std::optional<SyntheticAnnotation> annotation;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {});

  bool empty() const { return width <= 0 || height <= 0; }
  Rgb get(int x, int y) const;
  void set(int x, int y, Rgb c);
};

/// Hash over pixels and tags; seeds the mock backend's per-image noise.
std::uint64_t content_hash(const RgbImage& image);

RgbImage resize_nearest(const RgbImage& image, int width, int height);
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

template <typename T>
Grid<T> resize_nearest(const Grid<T>& grid, int width, int height) {
  Grid<T> out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(y) * grid.height) / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(x) * grid.width) / width);
      out.at(x, y) = grid.at(sx, sy);
    }
  }
  return out;
}

/// Separable Gaussian blur with edge clamping. Annotation is preserved.
RgbImage gaussian_blur(const RgbImage& image, double sigma);

/// Loads a PNG or binary PPM. A sidecar "<path>.tags.json" (if present)
/// becomes the image's SyntheticAnnotation. Throws InputError.
RgbImage load_image(const std::filesystem::path& path);

/// Writes pixels as PNG and, when annotated, the tags sidecar.
void save_image(const RgbImage& image, const std::filesystem::path& path);

}  // namespace peace
