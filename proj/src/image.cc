#include "peace/image.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "peace/errors.h"
#include "peace/hash.h"
#include "peace/png_io.h"

namespace peace {

ClassTable::ClassTable(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    for (std::size_t j = i + 1; j < classes_.size(); ++j) {
      if (classes_[i].id == classes_[j].id) {
        throw ValidationError("duplicate class id " + std::to_string(classes_[i].id));
      }
      if (classes_[i].word == classes_[j].word) {
        throw ValidationError("duplicate class word '" + classes_[i].word + "'");
      }
    }
  }
}

const ClassInfo* ClassTable::find(std::uint16_t id) const {
  for (const auto& c : classes_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const ClassInfo* ClassTable::find(std::string_view word) const {
  for (const auto& c : classes_) {
    if (c.word == word) return &c;
  }
  return nullptr;
}

bool ClassTable::is_safe(std::uint16_t id) const {
  const auto* c = find(id);
  return c != nullptr && c->safe;
}

ClassTable ClassTable::standard() {
  return ClassTable({
      {0, "unknown", false, {0, 0, 0}},
      {1, "grass", true, {86, 160, 60}},
      {2, "open-field", true, {170, 190, 100}},
      {3, "sidewalk", true, {190, 190, 180}},
      {4, "dirt", true, {140, 110, 70}},
      {5, "garden", true, {60, 130, 70}},
      {6, "vegetation", true, {40, 110, 40}},
      {7, "building", false, {150, 80, 70}},
      {8, "house", false, {180, 100, 90}},
      {9, "road", false, {70, 70, 75}},
      {10, "car", false, {200, 30, 30}},
      {11, "water", false, {40, 80, 180}},
      {12, "tree", false, {20, 70, 20}},
      {13, "person", false, {230, 200, 40}},
  });
}

std::optional<std::string> SyntheticAnnotation::majority_class() const {
  if (labels.empty() || !classes) return std::nullopt;
  std::map<std::uint16_t, std::size_t> counts;
  for (auto id : labels.values) ++counts[id];
  std::uint16_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [id, n] : counts) {
    if (n > best_count) {
      best = id;
      best_count = n;
    }
  }
  const auto* info = classes->find(best);
  if (info == nullptr) return std::nullopt;
  return info->word;
}

RgbImage::RgbImage(int w, int h, Rgb fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb RgbImage::get(int x, int y) const {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

std::uint64_t content_hash(const RgbImage& image) {
  std::uint64_t h = fnv1a(std::to_string(image.width) + "x" + std::to_string(image.height));
  h = fnv1a(std::span<const std::uint8_t>(image.pixels), h);
  if (image.annotation) {
    for (const auto& [role, word] : image.annotation->tags) {
      h = fnv1a(role, h);
      h = fnv1a("=", h);
      h = fnv1a(word, h);
      h = fnv1a(";", h);
    }
  }
  return h;
}

RgbImage resize_nearest(const RgbImage& image, int width, int height) {
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(y) * image.height) / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(x) * image.width) / width);
      out.set(x, y, image.get(sx, sy));
    }
  }
  if (image.annotation) {
    out.annotation = image.annotation;
    if (!out.annotation->labels.empty()) {
      out.annotation->labels = resize_nearest(image.annotation->labels, width, height);
    }
  }
  return out;
}

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
  RgbImage out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        auto px = [&](int xx, int yy) {
          return static_cast<double>(image.pixels[3 * (static_cast<std::size_t>(yy) * image.width + xx) + c]);
        };
        const double v = (1 - wy) * ((1 - wx) * px(x0, y0) + wx * px(x1, y0)) +
                         wy * ((1 - wx) * px(x0, y1) + wx * px(x1, y1));
        out.pixels[3 * (static_cast<std::size_t>(y) * width + x) + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  if (image.annotation) {
    out.annotation = image.annotation;
    if (!out.annotation->labels.empty()) {
      out.annotation->labels = resize_nearest(image.annotation->labels, width, height);
    }
  }
  return out;
}

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  if (sigma <= 0.0 || image.empty()) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  const int w = image.width;
  const int h = image.height;
  std::vector<double> tmp(image.pixels.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xx = std::clamp(x + k, 0, w - 1);
          acc += kernel[k + radius] * image.pixels[3 * (static_cast<std::size_t>(y) * w + xx) + c];
        }
        tmp[3 * (static_cast<std::size_t>(y) * w + x) + c] = acc;
      }
    }
  }
  RgbImage out = image;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = std::clamp(y + k, 0, h - 1);
          acc += kernel[k + radius] * tmp[3 * (static_cast<std::size_t>(yy) * w + x) + c];
        }
        out.pixels[3 * (static_cast<std::size_t>(y) * w + x) + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
    }
  }
  return out;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".tags.json";
  return p;
}

SyntheticAnnotation read_sidecar(const std::filesystem::path& path, int width, int height) {
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  SyntheticAnnotation ann;
  if (j.contains("tags")) {
    for (const auto& [role, word] : j.at("tags").items()) {
      ann.tags[role] = word.get<std::string>();
    }
  }
  if (j.contains("labels")) {
    auto table = std::make_shared<ClassTable>(ClassTable::standard());
    if (j.contains("classes")) {
      std::vector<ClassInfo> classes;
      for (const auto& c : j.at("classes")) {
        ClassInfo info;
        info.id = c.at("id").get<std::uint16_t>();
        info.word = c.at("word").get<std::string>();
        info.safe = c.value("safe", false);
        classes.push_back(info);
      }
      table = std::make_shared<ClassTable>(std::move(classes));
    }
    ann.labels = read_png_indexed(path.parent_path() / j.at("labels").get<std::string>());
    if (ann.labels.width != width || ann.labels.height != height) {
      throw InputError("label grid dimensions differ from image: " + path.string());
    }
    ann.classes = std::move(table);
  }
  return ann;
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("image not found: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  RgbImage image = (magic[0] == 'P' && magic[1] == '6') ? read_ppm(path) : read_png_rgb(path);
  if (image.empty()) throw InputError("zero-sized image: " + path.string());
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    try {
      image.annotation = read_sidecar(side, image.width, image.height);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(side.string() + ": " + e.what());
    }
  }
  return image;
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
  write_png_rgb(image, path);
  if (!image.annotation) return;
  nlohmann::json j;
  j["tags"] = image.annotation->tags;
  if (!image.annotation->labels.empty()) {
    auto label_name = path.stem().string() + ".labels.png";
    std::vector<Rgb> palette;
    std::uint16_t max_id = 0;
    for (auto v : image.annotation->labels.values) max_id = std::max(max_id, v);
    palette.resize(max_id + 1u);
    nlohmann::json classes = nlohmann::json::array();
    if (image.annotation->classes) {
      for (const auto& c : image.annotation->classes->classes()) {
        if (c.id < palette.size()) palette[c.id] = c.color;
        classes.push_back({{"id", c.id}, {"word", c.word}, {"safe", c.safe}});
      }
    }
    write_png_indexed(image.annotation->labels, palette, path.parent_path() / label_name);
    j["labels"] = label_name;
    j["classes"] = classes;
  }
  std::ofstream out(sidecar_path(path));
  out << j.dump(2) << '\n';
}

}  // namespace peace
