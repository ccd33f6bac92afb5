#include "peace/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "peace/backend.h"
#include "peace/config.h"
#include "peace/errors.h"
#include "peace/eval_metrics.h"
#include "peace/fusion.h"
#include "peace/hash.h"
#include "peace/image.h"
#include "peace/png_io.h"
#include "peace/prompt_engine.h"
#include "peace/report.h"
#include "peace/simulator.h"
#include "peace/vocab.h"
#include "peace/world.h"
#include "peace/world_gen.h"

namespace fs = std::filesystem;

namespace peace {

namespace {

/// Flags shared by every subcommand; unset ones leave the config untouched.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string model_dir;
  std::string vocab;
  std::string targets;
  std::string mode;
  std::optional<int> seg_resolution;
  std::optional<std::string> positives;
  std::optional<std::string> negatives;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--seed", seed, "Run seed (also the mock backend seed)");
    app->add_option("--backend", backend, "mock | portable_graph");
    app->add_option("--model-dir", model_dir, "Portable-graph asset directory");
    app->add_option("--vocab", vocab, "Vocabulary JSON");
    app->add_option("--targets", targets, "Target lists JSON");
    app->add_option("--seg-resolution", seg_resolution, "Segmentation output side, pixels");
    app->add_option("--positives", positives, "Comma-separated positive class words");
    app->add_option("--negatives", negatives, "Comma-separated negative class words (may be empty)");
  }
  void attach_mode(CLI::App* app) { app->add_option("--mode", mode, "default | dovesei | peace"); }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  RunConfig cfg;
  std::shared_ptr<const InferenceBackend> backend;
  std::shared_ptr<const DescriptionVocabulary> vocab;
  TargetLists targets;
};

Context make_context(const CommonFlags& f) {
  Context ctx;
  if (!f.config.empty()) ctx.cfg = load_run_config(f.config);
  auto& cfg = ctx.cfg;
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.backend.seed = *f.seed;
  }
  if (!cfg.backend.seed) cfg.backend.seed = cfg.seed;
  if (!f.backend.empty()) cfg.backend.kind = parse_backend_kind(f.backend);
  if (!f.model_dir.empty()) cfg.backend.model_dir = f.model_dir;
  if (!f.vocab.empty()) cfg.vocabulary = f.vocab;
  if (!f.targets.empty()) cfg.targets = f.targets;
  if (!f.mode.empty()) cfg.prompt.mode = parse_prompt_mode(f.mode);
  if (f.seg_resolution) cfg.backend.seg_width = cfg.backend.seg_height = *f.seg_resolution;
  cfg.validate();

  ctx.backend = make_backend(cfg.backend);
  const std::string vocab_text = cfg.vocabulary ? slurp(*cfg.vocabulary) : std::string(default_vocabulary_json());
  ctx.vocab = std::make_shared<DescriptionVocabulary>(parse_vocabulary(vocab_text, ctx.backend.get()));
  ctx.targets = cfg.targets ? load_targets(*cfg.targets) : parse_targets(vocab_text);
  if (f.positives) ctx.targets.positives = split_list(*f.positives);
  if (f.negatives) ctx.targets.negatives = split_list(*f.negatives);
  if (ctx.targets.positives.empty()) throw ValidationError("at least one positive class word is required");
  return ctx;
}

EpisodeSetup episode_setup(const Context& ctx) {
  EpisodeSetup s;
  s.backend = ctx.backend;
  s.vocab = ctx.vocab;
  s.targets = ctx.targets;
  s.prompt = ctx.cfg.prompt;
  s.policy = ctx.cfg.policy;
  s.sim = ctx.cfg.simulator;
  s.collapse = ctx.cfg.collapse;
  return s;
}

std::vector<PromptMode> parse_modes(const std::string& s) {
  std::vector<PromptMode> modes;
  for (const auto& m : split_list(s)) modes.push_back(parse_prompt_mode(m));
  if (modes.empty()) throw ValidationError("--modes is empty");
  return canonical_order(modes);
}

int cmd_prompt(const CommonFlags& f, const std::string& image_path, std::ostream& out) {
  const auto ctx = make_context(f);
  const RgbImage image = load_image(image_path);
  const PromptSet set = generate_prompt_set(image, ctx.targets, *ctx.vocab, *ctx.backend, 0, ctx.cfg.prompt);
  out << "seed: " << ctx.cfg.seed << "\n";
  out << "mode: " << to_string(set.mode) << "\n";
  if (set.selection) {
    for (const auto& role : set.selection->roles) {
      out << role.role << ":";
      for (const auto& w : role.words) out << fmt::format(" {} ({:.4f})", w.word, w.score);
      out << "\n";
    }
  }
  out << fmt::format("prompts (X={}, Y={}):\n", set.x, set.y);
  for (const auto& p : set.prompts) out << (p.polarity == Polarity::positive ? "+ " : "- ") << p.text << "\n";
  return kExitOk;
}

int cmd_segment(const CommonFlags& f, const std::string& image_path, const std::string& out_dir, std::ostream& out) {
  const auto ctx = make_context(f);
  const RgbImage image = load_image(image_path);
  const PromptSet set = generate_prompt_set(image, ctx.targets, *ctx.vocab, *ctx.backend, 0, ctx.cfg.prompt);
  const SafetyHeatmap heat = fuse_pipeline(image, set, *ctx.backend, ctx.cfg.collapse);
  fs::create_directories(out_dir);
  const fs::path pgm = fs::path(out_dir) / "heatmap.pgm";
  write_pgm16(heat.values, pgm);
  double mean = 0.0;
  for (double v : heat.values.values) mean += v;
  mean /= static_cast<double>(heat.values.size());
  nlohmann::ordered_json j;
  j["seed"] = ctx.cfg.seed;
  j["image"] = fs::path(image_path).filename().string();
  j["mode"] = to_string(set.mode);
  j["collapse"] = to_string(ctx.cfg.collapse);
  j["width"] = heat.values.width;
  j["height"] = heat.values.height;
  j["x"] = heat.x;
  j["y"] = heat.y;
  j["prompts"] = heat.prompts;
  j["mean"] = mean;
  write_file_atomic(fs::path(out_dir) / "heatmap.json", j.dump(2) + "\n");
  out << "wrote " << pgm.string() << fmt::format(" (mean {:.4f})\n", mean);
  return kExitOk;
}

std::string episode_stem(std::size_t world, PromptMode mode, int start) {
  return fmt::format("w{:03d}_{}_s{:03d}", world, to_string(mode), start);
}

/// Writes per-episode artifacts, plots and the aggregate report for a matrix.
void write_matrix_outputs(const std::vector<World>& worlds, const MatrixResult& matrix, const fs::path& out_dir,
                          const std::map<PromptMode, double>& miou, std::ostream& out) {
  fs::create_directories(out_dir / "episodes");
  for (const auto& ep : matrix.episodes) {
    const auto stem = out_dir / "episodes" / episode_stem(ep.world_index, ep.mode, ep.start_index);
    write_file_atomic(fs::path(stem.string() + ".trace.csv"), trace_csv(ep.result.trace));
    write_file_atomic(fs::path(stem.string() + ".events.jsonl"), events_jsonl(ep.result.events, ep.seed));
    write_file_atomic(fs::path(stem.string() + ".json"), episode_json(ep.result, ep.mode, ep.seed));
  }
  for (std::size_t w = 0; w < worlds.size(); ++w) {
    const auto image_name = fmt::format("world_{:03d}.png", w);
    write_png_rgb(worlds[w].ortho, out_dir / image_name);
    std::vector<PlotPath> paths;
    for (const auto& ep : matrix.episodes) {
      if (ep.world_index == w) paths.push_back({ep.mode, ep.result.path});
    }
    write_file_atomic(out_dir / fmt::format("paths_{:03d}.svg", w),
                      render_path_svg(paths, worlds[w].ortho.width, worlds[w].ortho.height,
                                      worlds[w].meters_per_pixel, image_name));
  }
  const auto report = aggregate(matrix, miou, miou.empty() ? "" : "synthetic-labeled");
  write_file_atomic(out_dir / "report.json", report_json(report));
  const auto table = render_table(report);
  write_file_atomic(out_dir / "table.txt", table);
  out << table;
}

int cmd_fly(const CommonFlags& f, const std::string& world_path, int starts, const std::string& out_dir,
            std::ostream& out) {
  const auto ctx = make_context(f);
  std::vector<World> worlds{load_world(world_path)};
  const auto matrix = run_matrix(worlds, episode_setup(ctx), {ctx.cfg.prompt.mode}, starts, ctx.cfg.seed);
  out << fmt::format("seed: {}\n", ctx.cfg.seed);
  for (const auto& ep : matrix.episodes) {
    out << fmt::format("start {}: {} after {:.1f} s, {:.2f} m flown\n", ep.start_index, to_string(ep.result.reason),
                       ep.result.elapsed_s, ep.result.horizontal_distance_m);
  }
  write_matrix_outputs(worlds, matrix, out_dir, {}, out);
  return kExitOk;
}

std::vector<World> domain_shift_suite(const Context& ctx, int count) {
  DomainShiftOptions opt;
  if (const auto* env = ctx.vocab->find("environment")) opt.environment_words = env->words;
  std::vector<World> worlds;
  for (int i = 0; i < count; ++i) {
    worlds.push_back(make_domain_shift_world(hash_combine(ctx.cfg.seed, static_cast<std::uint64_t>(i)), opt).world);
  }
  return worlds;
}

std::map<PromptMode, double> miou_by_mode(const Context& ctx, const std::vector<PromptMode>& modes) {
  std::map<PromptMode, double> out;
  MiouSuiteOptions opt;
  opt.images = ctx.cfg.eval.images;
  opt.blur_sigma = ctx.cfg.eval.blur_sigma;
  opt.tau = ctx.cfg.eval.tau;
  opt.seed = ctx.cfg.seed;
  for (auto mode : modes) {
    PromptConfig p = ctx.cfg.prompt;
    p.mode = mode;
    out[mode] = run_miou_suite(*ctx.backend, *ctx.vocab, ctx.targets, p, opt, ctx.cfg.collapse).fused;
  }
  return out;
}

int cmd_matrix(const CommonFlags& f, const std::vector<std::string>& world_paths, const std::string& suite,
               int suite_worlds, const std::string& modes_text, int starts, bool with_miou, const std::string& out_dir,
               std::ostream& out) {
  const auto ctx = make_context(f);
  std::vector<World> worlds;
  for (const auto& p : world_paths) worlds.push_back(load_world(p));
  if (!suite.empty()) {
    if (suite != "domain-shift") throw ValidationError("unknown suite '" + suite + "'");
    auto generated = domain_shift_suite(ctx, suite_worlds);
    worlds.insert(worlds.end(), generated.begin(), generated.end());
  }
  if (worlds.empty()) throw ValidationError("matrix needs --world or --suite");
  const auto modes = parse_modes(modes_text);
  const auto matrix = run_matrix(worlds, episode_setup(ctx), modes, starts, ctx.cfg.seed);
  const auto miou = with_miou ? miou_by_mode(ctx, modes) : std::map<PromptMode, double>{};
  out << fmt::format("seed: {}\n", ctx.cfg.seed);
  write_matrix_outputs(worlds, matrix, out_dir, miou, out);
  return kExitOk;
}

int cmd_eval(const CommonFlags& f, const std::string& modes_text, const std::string& report_path,
             const std::vector<std::string>& traces, const std::string& out_dir, std::ostream& out) {
  const auto ctx = make_context(f);
  const auto modes = parse_modes(modes_text);
  nlohmann::ordered_json j;
  j["seed"] = ctx.cfg.seed;
  j["tau"] = ctx.cfg.eval.tau;
  j["blur_sigma"] = ctx.cfg.eval.blur_sigma;
  j["images"] = ctx.cfg.eval.images;
  MiouSuiteOptions opt;
  opt.images = ctx.cfg.eval.images;
  opt.blur_sigma = ctx.cfg.eval.blur_sigma;
  opt.tau = ctx.cfg.eval.tau;
  opt.seed = ctx.cfg.seed;
  std::map<PromptMode, double> miou;
  for (auto mode : modes) {
    PromptConfig p = ctx.cfg.prompt;
    p.mode = mode;
    const auto r = run_miou_suite(*ctx.backend, *ctx.vocab, ctx.targets, p, opt, ctx.cfg.collapse);
    miou[mode] = r.fused;
    j["miou"][std::string(to_string(mode))] = {{"fused", r.fused}, {"positive_only", r.positive_only}};
  }
  AggregateReport report;
  if (!report_path.empty()) report = parse_report_json(slurp(report_path));
  report.seed = ctx.cfg.seed;
  report.miou_dataset = "synthetic-labeled";
  for (auto mode : modes) {
    auto it = std::find_if(report.modes.begin(), report.modes.end(),
                           [&](const ModeAggregate& m) { return m.mode == mode; });
    if (it == report.modes.end()) {
      ModeAggregate m;
      m.mode = mode;
      report.modes.push_back(m);
      it = report.modes.end() - 1;
    }
    it->miou = miou[mode];
  }
  std::vector<PromptMode> present;
  for (const auto& m : report.modes) present.push_back(m.mode);
  std::vector<ModeAggregate> ordered;
  for (auto mode : canonical_order(present)) {
    ordered.push_back(*std::find_if(report.modes.begin(), report.modes.end(),
                                    [&](const ModeAggregate& m) { return m.mode == mode; }));
  }
  report.modes = std::move(ordered);
  for (const auto& t : traces) {
    const auto rows = read_trace_csv(t);
    nlohmann::ordered_json tj;
    tj["rows"] = rows.size();
    if (!rows.empty()) {
      tj["final_altitude"] = rows.back().altitude;
      tj["final_state"] = to_string(rows.back().state);
    }
    j["traces"][fs::path(t).filename().string()] = tj;
  }
  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "miou.json", j.dump(2) + "\n");
  write_file_atomic(fs::path(out_dir) / "report.json", report_json(report));
  const auto table = render_table(report);
  write_file_atomic(fs::path(out_dir) / "table.txt", table);
  out << fmt::format("seed: {}\n", ctx.cfg.seed) << table;
  return kExitOk;
}

int cmd_gen_world(const CommonFlags& f, const std::string& kind, const std::string& word, int size, double mpp,
                  const std::string& out_dir, std::ostream& out) {
  const std::uint64_t seed = f.seed.value_or(0);
  World world;
  if (kind == "uniform") {
    world = make_uniform_world(word, size, mpp, {}, seed);
  } else if (kind == "disks") {
    std::mt19937_64 rng(seed);
    const double side = size * mpp;
    std::uniform_real_distribution<double> pos(0.15 * side, 0.85 * side);
    std::vector<DiskSpec> disks;
    for (int i = 0; i < 6; ++i) disks.push_back({pos(rng), pos(rng), 0.05 * side, word});
    world = make_shape_world(size, size, mpp, "road", {}, disks, {}, seed);
  } else if (kind == "domain-shift") {
    DomainShiftOptions opt;
    opt.size_px = size;
    opt.meters_per_pixel = mpp;
    opt.safe_word = word;
    const auto vocab = parse_vocabulary(default_vocabulary_json(), nullptr);
    opt.environment_words = vocab.find("environment")->words;
    world = make_domain_shift_world(seed, opt).world;
  } else {
    throw ValidationError("unknown world kind '" + kind + "' (uniform | disks | domain-shift)");
  }
  save_world(world, out_dir);
  out << "wrote " << (fs::path(out_dir) / "world.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-engineered open-vocabulary safe landing toolkit", "peace"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string image, out_dir = "out", world_path, suite, modes = "default,dovesei,peace", report_path;
  std::string kind = "uniform", word = "grass";
  std::vector<std::string> worlds, traces;
  int starts = 1, suite_worlds = 10, size = 400;
  double mpp = 1.0;
  bool with_miou = false;

  auto* prompt = app.add_subcommand("prompt", "Print the engineered prompt set for an image");
  flags.attach(prompt);
  flags.attach_mode(prompt);
  prompt->add_option("image", image, "Image (PNG or PPM)")->required();

  auto* segment = app.add_subcommand("segment", "Write the fused safety heatmap of an image");
  flags.attach(segment);
  flags.attach_mode(segment);
  segment->add_option("image", image, "Image (PNG or PPM)")->required();
  segment->add_option("--out", out_dir, "Output directory");

  auto* fly = app.add_subcommand("fly", "Fly episodes over one world");
  flags.attach(fly);
  flags.attach_mode(fly);
  fly->add_option("--world", world_path, "World directory or world.json")->required();
  fly->add_option("--starts", starts, "Number of start poses");
  fly->add_option("--out-dir", out_dir, "Output directory");

  auto* matrix = app.add_subcommand("matrix", "Paired comparison of prompt modes");
  flags.attach(matrix);
  matrix->add_option("--world", worlds, "World directory or world.json (repeatable)");
  matrix->add_option("--suite", suite, "Generated suite: domain-shift");
  matrix->add_option("--suite-worlds", suite_worlds, "Worlds in the generated suite");
  matrix->add_option("--modes", modes, "Comma-separated modes");
  matrix->add_option("--starts", starts, "Start poses per world");
  matrix->add_flag("--miou", with_miou, "Add the mIoU suite to the report");
  matrix->add_option("--out-dir", out_dir, "Output directory");

  auto* eval = app.add_subcommand("eval", "mIoU suite, optionally merged into a matrix report");
  flags.attach(eval);
  eval->add_option("--modes", modes, "Comma-separated modes");
  eval->add_option("--report", report_path, "Existing report.json to extend");
  eval->add_option("--trace", traces, "Episode trace CSV to summarize (repeatable)");
  eval->add_option("--out-dir", out_dir, "Output directory");

  auto* gen = app.add_subcommand("gen-world", "Write a synthetic world");
  gen->add_option("--seed", flags.seed, "Generator seed");
  gen->add_option("--kind", kind, "uniform | disks | domain-shift");
  gen->add_option("--class", word, "Class word of the uniform world or of the safe disks");
  gen->add_option("--size", size, "Side in pixels");
  gen->add_option("--mpp", mpp, "Meters per pixel");
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (prompt->parsed()) return cmd_prompt(flags, image, out);
    if (segment->parsed()) return cmd_segment(flags, image, out_dir, out);
    if (fly->parsed()) return cmd_fly(flags, world_path, starts, out_dir, out);
    if (matrix->parsed()) {
      return cmd_matrix(flags, worlds, suite, suite_worlds, modes, starts, with_miou, out_dir, out);
    }
    if (eval->parsed()) return cmd_eval(flags, modes, report_path, traces, out_dir, out);
    if (gen->parsed()) return cmd_gen_world(flags, kind, word, size, mpp, out_dir, out);
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SchemaError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace peace
