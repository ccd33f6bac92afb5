#include "peace/world.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "peace/errors.h"
#include "peace/png_io.h"

namespace peace {

namespace {

constexpr const char* kWorldSchema = "peace-world/1";

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return path / "world.json";
  return path;
}

}  // namespace

bool World::contains(double x, double y) const {
  return x >= 0.0 && y >= 0.0 && x < width_m() && y < height_m();
}

std::uint16_t World::label_at(double x, double y) const {
  if (!contains(x, y)) return kUnknownClass;
  const int px = std::min(labels.width - 1, static_cast<int>(x / meters_per_pixel));
  const int py = std::min(labels.height - 1, static_cast<int>(y / meters_per_pixel));
  return labels.at(px, py);
}

bool World::is_safe_at(double x, double y) const { return classes && classes->is_safe(label_at(x, y)); }

TagMap World::tags_at(double x, double y) const {
  TagMap tags = default_tags;
  if (tile_tags.empty() || !contains(x, y)) return tags;
  const int col = std::min(tile_columns - 1, static_cast<int>(x / width_m() * tile_columns));
  const int row = std::min(tile_rows - 1, static_cast<int>(y / height_m() * tile_rows));
  for (const auto& [role, word] : tile_tags[static_cast<std::size_t>(row) * tile_columns + col]) {
    tags[role] = word;
  }
  return tags;
}

void World::validate() const {
  if (ortho.empty()) throw ValidationError("world: empty ortho image");
  if (labels.width != ortho.width || labels.height != ortho.height) {
    throw ValidationError("world: label grid " + std::to_string(labels.width) + "x" + std::to_string(labels.height) +
                          " does not match ortho image " + std::to_string(ortho.width) + "x" +
                          std::to_string(ortho.height));
  }
  if (!(meters_per_pixel > 0.0) || !std::isfinite(meters_per_pixel)) {
    throw ValidationError("world: meters_per_pixel must be > 0");
  }
  if (!classes || classes->classes().empty()) throw ValidationError("world: empty class table");
  for (auto id : labels.values) {
    if (!classes->find(id)) throw ValidationError("world: label id " + std::to_string(id) + " not in class table");
  }
  if (tile_columns < 1 || tile_rows < 1) throw ValidationError("world: tile grid must be at least 1x1");
  if (!tile_tags.empty() && tile_tags.size() != static_cast<std::size_t>(tile_columns) * tile_rows) {
    throw ValidationError("world: tile tag count does not match the tile grid");
  }
}

World load_world(const std::filesystem::path& path) {
  const auto manifest = manifest_path(path);
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open world manifest: " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(manifest.string() + ": " + e.what());
  }
  const auto dir = manifest.parent_path();
  World w;
  try {
    if (j.value("schema", std::string(kWorldSchema)) != kWorldSchema) {
      throw ValidationError("world: unsupported schema " + j.at("schema").get<std::string>());
    }
    w.meters_per_pixel = j.at("meters_per_pixel").get<double>();
    std::vector<ClassInfo> classes;
    for (const auto& c : j.at("class_table")) {
      ClassInfo info;
      info.id = c.at("id").get<std::uint16_t>();
      info.word = c.at("word").get<std::string>();
      info.safe = c.at("safe").get<bool>();
      if (c.contains("color")) {
        const auto rgb = c.at("color").get<std::vector<int>>();
        if (rgb.size() != 3) throw ValidationError("world: class color needs 3 components");
        info.color = Rgb{static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                         static_cast<std::uint8_t>(rgb[2])};
      }
      classes.push_back(std::move(info));
    }
    w.classes = std::make_shared<ClassTable>(std::move(classes));
    if (j.contains("tags")) w.default_tags = j.at("tags").get<TagMap>();
    if (j.contains("tiles")) {
      const auto& t = j.at("tiles");
      w.tile_columns = t.at("columns").get<int>();
      w.tile_rows = t.at("rows").get<int>();
      w.tile_tags = t.at("tags").get<std::vector<TagMap>>();
    }
    w.ortho = read_png_rgb(dir / j.at("ortho").get<std::string>());
    w.labels = read_png_indexed(dir / j.at("labels").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(manifest.string() + ": " + e.what());
  }
  w.validate();
  return w;
}

void save_world(const World& world, const std::filesystem::path& dir) {
  world.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json classes = nlohmann::json::array();
  std::uint16_t max_id = 0;
  for (const auto& c : world.classes->classes()) max_id = std::max(max_id, c.id);
  std::vector<Rgb> palette(max_id + 1u);
  for (const auto& c : world.classes->classes()) {
    classes.push_back({{"id", c.id}, {"word", c.word}, {"safe", c.safe}, {"color", {c.color.r, c.color.g, c.color.b}}});
    palette[c.id] = c.color;
  }
  nlohmann::json j{{"schema", kWorldSchema},
                   {"ortho", "ortho.png"},
                   {"labels", "labels.png"},
                   {"meters_per_pixel", world.meters_per_pixel},
                   {"class_table", classes},
                   {"tags", world.default_tags}};
  if (!world.tile_tags.empty()) {
    j["tiles"] = {{"columns", world.tile_columns}, {"rows", world.tile_rows}, {"tags", world.tile_tags}};
  }
  write_png_rgb(world.ortho, dir / "ortho.png");
  write_png_indexed(world.labels, palette, dir / "labels.png");
  std::ofstream out(dir / "world.json");
  out << j.dump(2) << '\n';
  if (!out) throw InputError("cannot write " + (dir / "world.json").string());
}

double footprint_side(double altitude_m, double fov_deg) {
  return 2.0 * altitude_m * std::tan(fov_deg * std::numbers::pi / 360.0);
}

CameraView camera_view(const World& world, const UavPose& pose, double fov_deg, int resolution) {
  if (!(pose.altitude > 0.0)) throw ContractError("camera_view needs altitude > 0");
  if (resolution < 1) throw ContractError("camera_view needs resolution >= 1");
  CameraView view;
  const double side = footprint_side(pose.altitude, fov_deg);
  view.geometry = CameraGeometry{side, resolution, resolution};
  view.image = RgbImage(resolution, resolution, kBorderColor);
  SyntheticAnnotation ann;
  ann.labels = Grid<std::uint16_t>(resolution, resolution, kUnknownClass);
  ann.classes = world.classes;
  ann.tags = world.tags_at(pose.x, pose.y);

  const double x0 = pose.x - side / 2.0;
  const double y0 = pose.y - side / 2.0;
  const double step = side / resolution;
  for (int v = 0; v < resolution; ++v) {
    const double wy = y0 + (v + 0.5) * step;
    const int py = static_cast<int>(std::floor(wy / world.meters_per_pixel));
    for (int u = 0; u < resolution; ++u) {
      const double wx = x0 + (u + 0.5) * step;
      const int px = static_cast<int>(std::floor(wx / world.meters_per_pixel));
      if (px < 0 || py < 0 || px >= world.ortho.width || py >= world.ortho.height) {
        view.partial = true;
        continue;
      }
      view.image.set(u, v, world.ortho.get(px, py));
      ann.labels.at(u, v) = world.labels.at(px, py);
    }
  }
  view.image.annotation = std::move(ann);
  return view;
}

UavPose kinematics_step(const UavPose& pose, const VelocityCommand& cmd, double dt_s, double drift_sigma_m,
                        std::mt19937_64* rng) {
  if (!(dt_s > 0.0)) throw ContractError("kinematics_step needs dt > 0");
  UavPose next = pose;
  next.x += cmd.vx * dt_s;
  next.y += cmd.vy * dt_s;
  next.altitude = std::max(0.0, pose.altitude - cmd.vz * dt_s);
  next.t += dt_s;
  if (drift_sigma_m > 0.0 && rng) {
    std::normal_distribution<double> drift(0.0, drift_sigma_m);
    next.x += drift(*rng);
    next.y += drift(*rng);
  }
  return next;
}

}  // namespace peace
