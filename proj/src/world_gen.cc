#include "peace/world_gen.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "peace/errors.h"
#include "peace/hash.h"

namespace peace {

namespace {

std::uint16_t class_id(const ClassTable& table, const std::string& word) {
  const auto* info = table.find(word);
  if (!info) throw ValidationError("unknown class word '" + word + "'");
  return info->id;
}

// Multiplicative tint and additive haze per environment word.
struct Tint {
  double r = 1.0, g = 1.0, b = 1.0, haze = 0.0;
};

Tint tint_for(const std::string& env) {
  if (env == "foggy" || env == "cloudy") return {0.8, 0.8, 0.85, 60.0};
  if (env == "snow") return {0.6, 0.6, 0.65, 110.0};
  if (env == "dark" || env == "shadows") return {0.45, 0.45, 0.5, 0.0};
  if (env == "bright" || env == "sunny") return {1.15, 1.1, 1.0, 20.0};
  if (env == "rainy") return {0.7, 0.75, 0.85, 10.0};
  if (env == "heat" || env == "heat-map") return {1.2, 0.6, 0.4, 15.0};
  if (env.empty()) return {};
  const auto h = fnv1a(env);
  return {0.7 + (h & 0xff) / 640.0, 0.7 + ((h >> 8) & 0xff) / 640.0, 0.7 + ((h >> 16) & 0xff) / 640.0, 0.0};
}

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void paint_rect(Grid<std::uint16_t>& labels, double mpp, const RectSpec& r, std::uint16_t id) {
  const int x0 = std::max(0, static_cast<int>(std::floor(r.x0_m / mpp)));
  const int y0 = std::max(0, static_cast<int>(std::floor(r.y0_m / mpp)));
  const int x1 = std::min(labels.width, static_cast<int>(std::ceil(r.x1_m / mpp)));
  const int y1 = std::min(labels.height, static_cast<int>(std::ceil(r.y1_m / mpp)));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) labels.at(x, y) = id;
  }
}

void paint_disk(Grid<std::uint16_t>& labels, double mpp, const DiskSpec& d, std::uint16_t id) {
  for (int y = 0; y < labels.height; ++y) {
    const double wy = (y + 0.5) * mpp - d.cy_m;
    if (std::abs(wy) > d.radius_m) continue;
    for (int x = 0; x < labels.width; ++x) {
      const double wx = (x + 0.5) * mpp - d.cx_m;
      if (wx * wx + wy * wy <= d.radius_m * d.radius_m) labels.at(x, y) = id;
    }
  }
}

}  // namespace

void render_ortho(World& world, std::uint64_t seed) {
  world.ortho = RgbImage(world.labels.width, world.labels.height);
  for (int y = 0; y < world.labels.height; ++y) {
    for (int x = 0; x < world.labels.width; ++x) {
      const double wx = (x + 0.5) * world.meters_per_pixel;
      const double wy = (y + 0.5) * world.meters_per_pixel;
      const auto tags = world.tags_at(wx, wy);
      const auto env = tags.find("environment");
      const Tint t = tint_for(env == tags.end() ? std::string() : env->second);
      const auto* info = world.classes->find(world.labels.at(x, y));
      const Rgb base = info ? info->color : kBorderColor;
      const std::uint64_t idx = static_cast<std::uint64_t>(y) * world.labels.width + x;
      const double grain = 8.0 * counter_normal(seed, idx);
      world.ortho.set(x, y,
                      Rgb{channel(base.r * t.r + t.haze + grain), channel(base.g * t.g + t.haze + grain),
                          channel(base.b * t.b + t.haze + grain)});
    }
  }
}

World make_uniform_world(const std::string& word, int size_px, double meters_per_pixel, TagMap tags,
                         std::uint64_t seed) {
  return make_shape_world(size_px, size_px, meters_per_pixel, word, {}, {}, std::move(tags), seed);
}

World make_shape_world(int width_px, int height_px, double meters_per_pixel, const std::string& background,
                       const std::vector<RectSpec>& rects, const std::vector<DiskSpec>& disks, TagMap tags,
                       std::uint64_t seed) {
  if (width_px < 1 || height_px < 1) throw ValidationError("world size must be positive");
  World w;
  w.meters_per_pixel = meters_per_pixel;
  w.classes = std::make_shared<ClassTable>(ClassTable::standard());
  w.default_tags = std::move(tags);
  w.labels = Grid<std::uint16_t>(width_px, height_px, class_id(*w.classes, background));
  for (const auto& r : rects) paint_rect(w.labels, meters_per_pixel, r, class_id(*w.classes, r.word));
  for (const auto& d : disks) paint_disk(w.labels, meters_per_pixel, d, class_id(*w.classes, d.word));
  render_ortho(w, seed);
  w.validate();
  return w;
}

DomainShiftWorld make_domain_shift_world(std::uint64_t seed, const DomainShiftOptions& o) {
  if (o.tiles < 1) throw ValidationError("domain-shift world needs at least one tile");
  std::vector<std::string> others;
  for (const auto& word : o.environment_words) {
    if (word != o.static_word) others.push_back(word);
  }
  if (others.empty()) throw ValidationError("domain-shift world needs environment words besides the static one");

  std::mt19937_64 rng(hash_combine(seed, 0xd0a1));
  const double side = o.size_px * o.meters_per_pixel;
  std::uniform_real_distribution<double> pos(0.0, side);
  std::uniform_real_distribution<double> radius(o.disk_radius_min_m, o.disk_radius_max_m);

  std::vector<RectSpec> rects;
  const std::vector<std::string> obstacle_words{"building", "house", "water", "tree", "car"};
  std::uniform_int_distribution<std::size_t> pick_obstacle(0, obstacle_words.size() - 1);
  std::uniform_real_distribution<double> extent(10.0, 40.0);
  for (int i = 0; i < o.obstacles; ++i) {
    const double x = pos(rng), y = pos(rng);
    rects.push_back({x, y, x + extent(rng), y + extent(rng), obstacle_words[pick_obstacle(rng)]});
  }
  std::vector<DiskSpec> disks;
  for (int i = 0; i < o.disks; ++i) {
    const double r = radius(rng);
    std::uniform_real_distribution<double> inner(r, side - r);
    disks.push_back({inner(rng), inner(rng), r, o.safe_word});
  }

  DomainShiftWorld out;
  out.tile_count = o.tiles * o.tiles;
  World& w = out.world;
  w.meters_per_pixel = o.meters_per_pixel;
  w.classes = std::make_shared<ClassTable>(ClassTable::standard());
  w.tile_columns = o.tiles;
  w.tile_rows = o.tiles;
  std::uniform_int_distribution<std::size_t> pick_env(0, others.size() - 1);
  for (int i = 0; i < out.tile_count; ++i) w.tile_tags.push_back({{"environment", others[pick_env(rng)]}});
  // The static word lands on fewer than half of the tiles.
  const int max_static = (out.tile_count - 1) / 2;
  std::uniform_int_distribution<int> static_count(0, max_static);
  const int n_static = static_count(rng);
  std::vector<int> order(out.tile_count);
  for (int i = 0; i < out.tile_count; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < n_static; ++i) w.tile_tags[order[i]]["environment"] = o.static_word;
  out.tiles_with_static_word = n_static;

  w.labels = Grid<std::uint16_t>(o.size_px, o.size_px, class_id(*w.classes, o.background));
  for (const auto& r : rects) paint_rect(w.labels, o.meters_per_pixel, r, class_id(*w.classes, r.word));
  for (const auto& d : disks) paint_disk(w.labels, o.meters_per_pixel, d, class_id(*w.classes, d.word));
  render_ortho(w, hash_combine(seed, 0x0a7));
  w.validate();
  return out;
}

RgbImage make_labeled_scene(std::uint64_t seed, int size_px, const TagMap& tags) {
  if (size_px < 2) throw ValidationError("scene size must be at least 2");
  const auto table = std::make_shared<ClassTable>(ClassTable::standard());
  std::mt19937_64 rng(hash_combine(seed, 0x5ce));
  std::uniform_int_distribution<int> any_class(1, 13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Grid<std::uint16_t> labels(size_px, size_px, static_cast<std::uint16_t>(any_class(rng)));
  std::uniform_int_distribution<int> shape_count(2, 6);
  const int shapes = shape_count(rng);
  for (int i = 0; i < shapes; ++i) {
    const auto id = static_cast<std::uint16_t>(any_class(rng));
    if (unit(rng) < 0.5) {
      const double x0 = unit(rng) * size_px, y0 = unit(rng) * size_px;
      paint_rect(labels, 1.0, {x0, y0, x0 + (0.15 + 0.4 * unit(rng)) * size_px, y0 + (0.15 + 0.4 * unit(rng)) * size_px, ""},
                 id);
    } else {
      paint_disk(labels, 1.0, {unit(rng) * size_px, unit(rng) * size_px, (0.08 + 0.25 * unit(rng)) * size_px, ""}, id);
    }
  }

  World w;
  w.labels = std::move(labels);
  w.classes = table;
  w.default_tags = tags;
  render_ortho(w, hash_combine(seed, 0x0a7));
  RgbImage image = std::move(w.ortho);
  SyntheticAnnotation ann;
  ann.tags = tags;
  ann.labels = std::move(w.labels);
  ann.classes = table;
  image.annotation = std::move(ann);
  return image;
}

}  // namespace peace
