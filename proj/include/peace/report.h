#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peace/prompt_engine.h"
#include "peace/simulator.h"

namespace peace {

inline constexpr int kReportSchemaVersion = 1;

struct ModeAggregate {
  PromptMode mode = PromptMode::peace;
  int episodes = 0;
  int successes = 0;
  double mean_distance_m = 0.0;  // over all episodes of the mode
  double mean_time_s = 0.0;
  std::map<std::string, int> outcomes;
  std::optional<double> miou;
};

struct AggregateReport {
  int schema_version = kReportSchemaVersion;
  std::uint64_t seed = 0;
  std::vector<ModeAggregate> modes;  // default, dovesei, peace order
  std::string miou_dataset;
};

/// Row labels of the aggregate table, top to bottom.
inline constexpr const char* kRowSuccesses = "Total Successful SLZ selections";
inline constexpr const char* kRowDistance = "Average Horizontal Distance (m)";
inline constexpr const char* kRowTime = "Average Time Spent (s)";
inline constexpr const char* kRowMiou = "mIoU";

/// Modes sorted into the canonical column order.
std::vector<PromptMode> canonical_order(std::vector<PromptMode> modes);

AggregateReport aggregate(const MatrixResult& matrix, const std::map<PromptMode, double>& miou = {},
                          const std::string& miou_dataset = "");

std::string report_json(const AggregateReport& report);
AggregateReport parse_report_json(const std::string& text);

/// Fixed-width table; mIoU row only when at least one mode has a value.
std::string render_table(const AggregateReport& report);

/// SVG of every path over the world image (referenced by file name), with a
/// star where each trajectory ended.
struct PlotPath {
  PromptMode mode = PromptMode::peace;
  std::vector<UavPose> path;
};
std::string render_path_svg(const std::vector<PlotPath>& paths, int width_px, int height_px,
                            double meters_per_pixel, const std::string& image_href);

std::string trace_csv(const std::vector<TraceRow>& rows);
std::vector<TraceRow> parse_trace_csv(const std::string& text);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

/// One JSON object per line; every line carries the seed.
std::string events_jsonl(const std::vector<EpisodeEvent>& events, std::uint64_t seed);

/// Per-episode summary object with the run metadata.
std::string episode_json(const EpisodeResult& result, PromptMode mode, std::uint64_t seed);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace peace
