#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peace/world.h"

namespace peace {

struct DiskSpec {
  double cx_m = 0.0;
  double cy_m = 0.0;
  double radius_m = 0.0;
  std::string word;
};

struct RectSpec {
  double x0_m = 0.0, y0_m = 0.0, x1_m = 0.0, y1_m = 0.0;
  std::string word;
};

/// Paints the ortho image from labels: class color, a tint for the
/// environment tag of each tile, and seeded per-pixel texture.
void render_ortho(World& world, std::uint64_t seed);

/// Single-class world with the standard class table.
World make_uniform_world(const std::string& word, int size_px, double meters_per_pixel, TagMap tags = {},
                         std::uint64_t seed = 0);

/// Background class with rectangles, then disks, painted in order.
World make_shape_world(int width_px, int height_px, double meters_per_pixel, const std::string& background,
                       const std::vector<RectSpec>& rects, const std::vector<DiskSpec>& disks, TagMap tags = {},
                       std::uint64_t seed = 0);

struct DomainShiftOptions {
  int size_px = 400;
  double meters_per_pixel = 1.0;
  int tiles = 2;  // per side
  int disks = 10;
  double disk_radius_min_m = 12.0;
  double disk_radius_max_m = 20.0;
  int obstacles = 6;
  std::string background = "road";
  std::string safe_word = "grass";
  /// Environment word baked into the static aerial prompt. At most
  /// floor((tiles^2 - 1) / 2) tiles receive it.
  std::string static_word = "shadows";
  std::vector<std::string> environment_words;
};

struct DomainShiftWorld {
  World world;
  int tiles_with_static_word = 0;
  int tile_count = 0;
};

/// Safe disks scattered over an unsafe background; each tile plants a
/// seeded environment word drawn from options.environment_words.
DomainShiftWorld make_domain_shift_world(std::uint64_t seed, const DomainShiftOptions& options);

/// Random rectangles and disks of standard classes on a random background,
/// annotated with `tags`. Used by the selection and mIoU suites.
RgbImage make_labeled_scene(std::uint64_t seed, int size_px, const TagMap& tags);

}  // namespace peace
