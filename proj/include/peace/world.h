#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "peace/grid.h"
#include "peace/image.h"
#include "peace/landing_policy.h"

namespace peace {

using TagMap = std::map<std::string, std::string>;

/// Flat ground map. World frame: x grows along image columns, y along image
/// rows, origin at the top-left corner of pixel (0, 0), units of meters.
struct World {
  RgbImage ortho;
  Grid<std::uint16_t> labels;
  double meters_per_pixel = 1.0;
  std::shared_ptr<const ClassTable> classes;
  /// Tags for views whose center falls in no tile or in a tile without tags.
  TagMap default_tags;
  /// Optional tile grid over the world, row-major; a view inherits the tags
  /// of the tile under its center.
  int tile_columns = 1;
  int tile_rows = 1;
  std::vector<TagMap> tile_tags;

  double width_m() const { return ortho.width * meters_per_pixel; }
  double height_m() const { return ortho.height * meters_per_pixel; }
  bool contains(double x, double y) const;
  /// Class id under a world point; kUnknownClass outside the map.
  std::uint16_t label_at(double x, double y) const;
  bool is_safe_at(double x, double y) const;
  TagMap tags_at(double x, double y) const;

  /// Throws ValidationError when dimensions, tiles or classes disagree.
  void validate() const;
};

/// Reads `<dir>/world.json` (or the given .json path) plus the images it names.
/// Throws InputError for unreadable files and ValidationError for bad content.
World load_world(const std::filesystem::path& path);

/// Writes world.json, ortho.png and labels.png into `dir` (created if needed).
void save_world(const World& world, const std::filesystem::path& dir);

struct UavPose {
  double x = 0.0;
  double y = 0.0;
  double altitude = 0.0;
  double t = 0.0;

  friend bool operator==(const UavPose&, const UavPose&) = default;
};

/// Side of the square ground footprint of a nadir camera.
double footprint_side(double altitude_m, double fov_deg);

struct CameraView {
  RgbImage image;  // annotated with the labels and tags under the footprint
  CameraGeometry geometry;
  bool partial = false;  // part of the footprint lies outside the world
};

inline constexpr Rgb kBorderColor{0, 0, 0};

/// Orthographic nadir view centered on the pose, nearest-pixel sampled.
CameraView camera_view(const World& world, const UavPose& pose, double fov_deg, int resolution);

/// Euler step. Positive vz descends. With drift_sigma_m > 0 and an rng, adds
/// zero-mean Gaussian horizontal drift of that standard deviation per step.
UavPose kinematics_step(const UavPose& pose, const VelocityCommand& cmd, double dt_s,
                        double drift_sigma_m = 0.0, std::mt19937_64* rng = nullptr);

}  // namespace peace
