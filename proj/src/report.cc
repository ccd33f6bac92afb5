#include "peace/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "peace/errors.h"

namespace peace {

namespace {

int column_rank(PromptMode m) {
  switch (m) {
    case PromptMode::plain: return 0;
    case PromptMode::dovesei: return 1;
    case PromptMode::peace: return 2;
  }
  return 3;
}

const char* mode_color(PromptMode m) {
  switch (m) {
    case PromptMode::plain: return "#1f77b4";
    case PromptMode::dovesei: return "#ff7f0e";
    case PromptMode::peace: return "#2ca02c";
  }
  return "#000000";
}

std::string star_points(double cx, double cy, double r) {
  std::string out;
  for (int i = 0; i < 10; ++i) {
    const double rr = i % 2 == 0 ? r : r * 0.4;
    const double a = -M_PI / 2 + i * M_PI / 5;
    out += fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", cx + rr * std::cos(a), cy + rr * std::sin(a));
  }
  return out;
}

}  // namespace

std::vector<PromptMode> canonical_order(std::vector<PromptMode> modes) {
  std::sort(modes.begin(), modes.end(), [](PromptMode a, PromptMode b) { return column_rank(a) < column_rank(b); });
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  return modes;
}

AggregateReport aggregate(const MatrixResult& matrix, const std::map<PromptMode, double>& miou,
                          const std::string& miou_dataset) {
  AggregateReport report;
  report.seed = matrix.seed;
  report.miou_dataset = miou_dataset;
  std::vector<PromptMode> modes = matrix.modes;
  for (const auto& [m, v] : miou) modes.push_back(m);
  for (auto mode : canonical_order(modes)) {
    ModeAggregate agg;
    agg.mode = mode;
    double dist = 0.0, time = 0.0;
    for (const auto& ep : matrix.episodes) {
      if (ep.mode != mode) continue;
      ++agg.episodes;
      agg.successes += ep.result.success ? 1 : 0;
      dist += ep.result.horizontal_distance_m;
      time += ep.result.elapsed_s;
      ++agg.outcomes[std::string(to_string(ep.result.reason))];
    }
    if (agg.episodes > 0) {
      agg.mean_distance_m = dist / agg.episodes;
      agg.mean_time_s = time / agg.episodes;
    }
    if (auto it = miou.find(mode); it != miou.end()) agg.miou = it->second;
    report.modes.push_back(std::move(agg));
  }
  return report;
}

std::string report_json(const AggregateReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = report.schema_version;
  j["seed"] = report.seed;
  j["modes"] = nlohmann::ordered_json::array();
  for (const auto& m : report.modes) {
    nlohmann::ordered_json e;
    e["mode"] = to_string(m.mode);
    e["episodes"] = m.episodes;
    e["successes"] = m.successes;
    e["mean_distance_m"] = m.mean_distance_m;
    e["mean_time_s"] = m.mean_time_s;
    e["outcomes"] = m.outcomes;
    if (m.miou) e["miou"] = *m.miou;
    j["modes"].push_back(std::move(e));
  }
  if (!report.miou_dataset.empty()) j["miou_dataset"] = report.miou_dataset;
  return j.dump(2) + "\n";
}

AggregateReport parse_report_json(const std::string& text) {
  AggregateReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw SchemaError("report: unsupported schema_version " + std::to_string(r.schema_version));
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    r.miou_dataset = j.value("miou_dataset", std::string());
    for (const auto& e : j.at("modes")) {
      ModeAggregate m;
      m.mode = parse_prompt_mode(e.at("mode").get<std::string>());
      m.episodes = e.at("episodes").get<int>();
      m.successes = e.at("successes").get<int>();
      m.mean_distance_m = e.at("mean_distance_m").get<double>();
      m.mean_time_s = e.at("mean_time_s").get<double>();
      m.outcomes = e.value("outcomes", std::map<std::string, int>{});
      if (e.contains("miou")) m.miou = e.at("miou").get<double>();
      r.modes.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
  return r;
}

std::string render_table(const AggregateReport& report) {
  constexpr int kLabelWidth = 34;
  constexpr int kColumnWidth = 10;
  std::string out = fmt::format("{:<{}}", "", kLabelWidth);
  for (const auto& m : report.modes) out += fmt::format("{:>{}}", to_string(m.mode), kColumnWidth);
  out += '\n';
  auto row = [&](const char* label, auto cell) {
    out += fmt::format("{:<{}}", label, kLabelWidth);
    for (const auto& m : report.modes) out += fmt::format("{:>{}}", cell(m), kColumnWidth);
    out += '\n';
  };
  row(kRowSuccesses, [](const ModeAggregate& m) { return std::to_string(m.successes); });
  row(kRowDistance, [](const ModeAggregate& m) { return fmt::format("{:.2f}", m.mean_distance_m); });
  row(kRowTime, [](const ModeAggregate& m) { return fmt::format("{:.2f}", m.mean_time_s); });
  const bool any_miou =
      std::any_of(report.modes.begin(), report.modes.end(), [](const ModeAggregate& m) { return m.miou.has_value(); });
  if (any_miou) {
    row(kRowMiou, [](const ModeAggregate& m) { return m.miou ? fmt::format("{:.2f}", *m.miou) : std::string("-"); });
  }
  return out;
}

std::string render_path_svg(const std::vector<PlotPath>& paths, int width_px, int height_px,
                            double meters_per_pixel, const std::string& image_href) {
  if (!(meters_per_pixel > 0.0)) throw ValidationError("svg: meters_per_pixel must be > 0");
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "  <image href=\"{2}\" x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\"/>\n",
      width_px, height_px, image_href);
  const double star_r = std::max(3.0, std::min(width_px, height_px) / 60.0);
  for (const auto& p : paths) {
    if (p.path.empty()) continue;
    std::string pts;
    for (const auto& pose : p.path) {
      pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", pose.x / meters_per_pixel,
                         pose.y / meters_per_pixel);
    }
    out += fmt::format("  <polyline class=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                       to_string(p.mode), pts, mode_color(p.mode));
    const auto& end = p.path.back();
    out += fmt::format("  <polygon class=\"end\" points=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.5\"/>\n",
                       star_points(end.x / meters_per_pixel, end.y / meters_per_pixel, star_r), mode_color(p.mode));
  }
  out += "</svg>\n";
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "t,x,y,altitude,state,heatmap_center\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.t, r.x, r.y, r.altitude, to_string(r.state), r.heatmap_center);
  }
  return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,altitude,state,heatmap_center") {
    throw SchemaError("trace csv: unexpected header");
  }
  std::vector<TraceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw SchemaError("trace csv line " + std::to_string(line_no) + ": expected 6 fields");
    try {
      rows.push_back({std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                      parse_machine_state(cells[4]), std::stod(cells[5])});
    } catch (const std::logic_error&) {
      throw SchemaError("trace csv line " + std::to_string(line_no) + ": bad number");
    } catch (const ValidationError& e) {
      throw SchemaError("trace csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace_csv(ss.str());
}

std::string events_jsonl(const std::vector<EpisodeEvent>& events, std::uint64_t seed) {
  std::string out;
  for (const auto& e : events) {
    nlohmann::ordered_json j{{"t", e.t}, {"event", e.kind}, {"detail", e.detail}, {"seed", seed}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string episode_json(const EpisodeResult& r, PromptMode mode, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["mode"] = to_string(mode);
  j["success"] = r.success;
  j["reason"] = to_string(r.reason);
  j["horizontal_distance_m"] = r.horizontal_distance_m;
  j["elapsed_s"] = r.elapsed_s;
  j["start"] = {r.path.front().x, r.path.front().y, r.path.front().altitude};
  j["end"] = {r.path.back().x, r.path.back().y, r.path.back().altitude};
  j["prompt_regenerations"] = r.prompt_regenerations;
  j["prompts_used"] = r.prompts_used;
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace peace
