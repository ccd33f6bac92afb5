// Acceptance gate: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any failure. Every expected value is computed here, independently of the
// library code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "peace/backend.h"
#include "peace/eval_metrics.h"
#include "peace/fusion.h"
#include "peace/image.h"
#include "peace/landing_policy.h"
#include "peace/mock_backend.h"
#include "peace/prompt_engine.h"
#include "peace/simulator.h"
#include "peace/vocab.h"
#include "peace/world.h"
#include "peace/world_gen.h"

namespace fs = std::filesystem;
using namespace peace;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += fmt::format("; over the {:.0f} s budget", budget_s);
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt::format("{:.2f}", secs) << " s] " << o.detail
            << std::endl;
}

void skip(const std::string& name, const std::string& why) { std::cout << "SKIP " << name << " " << why << std::endl; }

std::shared_ptr<const InferenceBackend> mock(std::uint64_t seed, int seg) {
  BackendDescriptor d;
  d.seed = seed;
  d.seg_width = d.seg_height = seg;
  return make_backend(d);
}

LogitStack random_stack(std::mt19937_64& rng, int w, int h, int k) {
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  LogitStack s;
  s.width = w;
  s.height = h;
  for (int c = 0; c < k; ++c) {
    LogitMap m(w, h);
    for (auto& v : m.values) v = static_cast<float>(std::round(u(rng) * 256.0) / 256.0);
    s.channels.push_back(m);
  }
  return s;
}

// ---------------------------------------------------------------- fusion
Outcome fusion_invariants() {
  std::mt19937_64 rng(101);
  double worst_unity = 0.0;
  bool slice_exact = true, shift_exact = true;
  for (int k : {1, 2, 5, 13}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto stack = random_stack(rng, 24, 16, k);
      const auto fused = softmax_fuse(stack);
      for (std::size_t i = 0; i < fused.channels[0].size(); ++i) {
        double sum = 0.0;
        for (const auto& c : fused.channels) sum += c.values[i];
        worst_unity = std::max(worst_unity, std::abs(sum - 1.0));
      }
      for (int x = 1; x <= k; ++x) {
        const auto kept = drop_negatives(fused, x, k - x);
        for (int c = 0; c < x; ++c) slice_exact &= kept.channels[c].values == fused.channels[c].values;
      }
      auto shifted = stack;
      for (std::size_t i = 0; i < shifted.channels[0].size(); ++i) {
        const float s = static_cast<float>((static_cast<int>(i) % 7) * 16 - 48);
        for (auto& c : shifted.channels) c.values[i] += s;
      }
      const auto fs2 = softmax_fuse(shifted);
      for (int c = 0; c < k; ++c) shift_exact &= fs2.channels[c].values == fused.channels[c].values;
    }
  }
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> kd(2, 6);
    const int k = kd(rng);
    std::uniform_int_distribution<int> xd(1, k);
    const int x = xd(rng);
    const auto stack = random_stack(rng, 2, 2, k);
    const auto heat = fuse_logits(stack, x, k - x);
    for (int p = 0; p < 4; ++p) {
      long double den = 0.0L, num = 0.0L;
      for (int c = 0; c < k; ++c) {
        const long double e = std::exp(static_cast<long double>(stack.channels[c].values[p]));
        den += e;
        if (c < x) num += e;
      }
      worst_oracle = std::max(worst_oracle, std::abs(static_cast<double>(num / den) - heat.values[p]));
    }
  }
  const bool ok = worst_unity <= 1e-6 && slice_exact && shift_exact && worst_oracle <= 1e-9;
  return {ok, fmt::format("unity err {:.2e}, slice bit-exact {}, shift bit-exact {}, 2x2 oracle err {:.2e}",
                          worst_unity, slice_exact, shift_exact, worst_oracle)};
}

// ---------------------------------------------------------------- selection
Outcome prompt_selection() {
  auto backend = mock(23, 16);
  const DescriptionVocabulary vocab = parse_vocabulary(default_vocabulary_json(), backend.get());
  std::map<std::string, int> hits;
  const int n = 200;
  bool scale_ok = true;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = 5000 + i;
    const auto tags = planted_tags(vocab, seed);
    const auto image = make_labeled_scene(seed, 16, tags);
    const auto emb = backend->embed_image(image);
    const auto sel = select_words(emb, vocab);
    for (const auto& [role, word] : tags) hits[role] += sel.find(role)->words.front().word == word;
    EmbeddingVector scaled = emb;
    for (auto& v : scaled.values) v *= 8.0f;  // power of two: exact scaling
    const auto sel2 = select_words(scaled, vocab);
    for (std::size_t r = 0; r < sel.roles.size(); ++r) {
      scale_ok &= sel.roles[r].words.front().word == sel2.roles[r].words.front().word;
    }
  }
  // Ties: two identical rows resolve to the lower index.
  DescriptionVocabulary tie;
  tie.template_text = "A photo of {} in {environment}.";
  DescriptionType t;
  t.role = Role::parse("environment");
  t.words = {"first", "second"};
  EmbeddingVector row;
  row.values = {0.6f, 0.8f};
  t.embeddings = {row, row};
  tie.types.push_back(t);
  EmbeddingVector probe;
  probe.values = {1.0f, 0.0f};
  const bool tie_ok = select_words(probe, tie).find("environment")->words.front().word == "first";

  bool rate_ok = true;
  std::string rates;
  for (const auto& [role, h] : hits) {
    const double rate = static_cast<double>(h) / n;
    rate_ok &= rate >= 0.95;
    rates += fmt::format("{}={:.3f} ", role, rate);
  }
  return {rate_ok && scale_ok && tie_ok, rates + fmt::format("scale-invariant {}, ties->lowest {}", scale_ok, tie_ok)};
}

// ---------------------------------------------------------------- templates
Outcome template_fidelity() {
  auto backend = mock(29, 16);
  const DescriptionVocabulary vocab = parse_vocabulary(default_vocabulary_json(), backend.get());
  const TargetLists targets = parse_targets(default_vocabulary_json());
  const std::regex grammar(R"(A [^ ,]+ [^ ,]+ of [^ ,]+ in [^ ,]+(, [^ ,]+)*\.)");
  int checked = 0, bad = 0;
  for (int i = 0; i < 20; ++i) {
    const auto image = make_labeled_scene(700 + i, 16, planted_tags(vocab, 700 + i));
    for (auto mode : {PromptMode::plain, PromptMode::dovesei, PromptMode::peace}) {
      PromptConfig cfg;
      cfg.mode = mode;
      cfg.env_top_k = 1 + i % 3;
      const auto set = generate_prompt_set(image, targets, vocab, *backend, 0, cfg);
      for (std::size_t p = 0; p < set.prompts.size(); ++p) {
        const auto& word = p < targets.x() ? targets.positives[p] : targets.negatives[p - targets.x()];
        std::string expect;
        if (mode == PromptMode::plain) expect = "A photo of " + word + ".";
        if (mode == PromptMode::dovesei) {
          expect = "Aerial view, drone footage photo of " + word + ", shade, shadows, low resolution.";
        }
        ++checked;
        if (mode == PromptMode::peace) {
          const bool has_class = set.prompts[p].text.find(" of " + word + " in ") != std::string::npos;
          bad += !(std::regex_match(set.prompts[p].text, grammar) && has_class);
        } else {
          bad += set.prompts[p].text != expect;
        }
      }
    }
  }
  return {bad == 0, fmt::format("{} prompts checked, {} mismatches", checked, bad)};
}

// ---------------------------------------------------------------- state machine
Outcome state_machine() {
  PolicyConfig cfg;
  // Scripted reachability.
  std::set<MachineState> seen;
  {
    LandingPolicy p(cfg, 1);
    auto obs = [](std::optional<LandingTarget> t, double alt, double center) {
      Observation o;
      o.target = t;
      o.altitude_m = alt;
      o.center_value = center;
      o.camera = {64.0, 64, 64};
      return o;
    };
    const LandingTarget mid{32, 32, 0.9, 20};
    seen.insert(p.state());
    std::vector<Observation> script;
    script.push_back(obs(std::nullopt, 100, 0));
    for (int i = 0; i < 6; ++i) script.push_back(obs(mid, 100, 0.9));
    script.push_back(obs(std::nullopt, 80, 0.1));
    for (int i = 0; i < 20; ++i) script.push_back(obs(std::nullopt, 80, 0.1));
    script.push_back(obs(std::nullopt, 100, 0.1));
    for (int i = 0; i < 40; ++i) script.push_back(obs(std::nullopt, 100, 0.1));
    for (const auto& o : script) seen.insert(p.step(o).state);
  }
  // Fuzz: transitions checked against an independent edge list.
  const std::set<std::pair<MachineState, MachineState>> edges{
      {MachineState::Searching, MachineState::Aiming}, {MachineState::Aiming, MachineState::Landing},
      {MachineState::Aiming, MachineState::Searching}, {MachineState::Landing, MachineState::Waiting},
      {MachineState::Waiting, MachineState::Landing},  {MachineState::Waiting, MachineState::Climbing},
      {MachineState::Climbing, MachineState::Restarting}, {MachineState::Restarting, MachineState::Searching}};
  int illegal = 0, bound_violations = 0;
  std::set<MachineState> fuzz_seen;
  {
    LandingPolicy p(cfg, 77);
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pix(0, 63);
    // Observations persist in runs so that holds, waits and climbs complete.
    Observation o;
    o.altitude_m = 100;
    for (int i = 0; i < 10000; ++i) {
      if (u(rng) < 0.1) {
        const double r = u(rng);
        if (r < 0.3) o.target.reset();
        else if (r < 0.7) o.target = LandingTarget{32, 32, u(rng), 8 * u(rng)};
        else o.target = LandingTarget{pix(rng), pix(rng), u(rng), 8 * u(rng)};
        o.center_value = u(rng);
      }
      o.altitude_m = std::clamp(o.altitude_m + (p.state() == MachineState::Climbing ? 2.0 : -2.0) * u(rng), 0.0, 120.0);
      if (u(rng) < 0.01) o.altitude_m = 120 * u(rng);
      o.camera = {1.1547 * std::max(o.altitude_m, 1.0), 64, 64};
      const auto before = p.state();
      const auto r = p.step(o);
      fuzz_seen.insert(r.state);
      if (before != r.state && !edges.count({before, r.state})) ++illegal;
      if (std::hypot(r.command.vx, r.command.vy) > cfg.v_max_h + 1e-9 || std::abs(r.command.vz) > cfg.v_max_z + 1e-9) {
        ++bound_violations;
      }
    }
  }
  // Liveness on pure grass from a 5x5 grid of starts.
  EpisodeSetup setup;
  setup.backend = mock(41, 32);
  setup.vocab = std::make_shared<DescriptionVocabulary>(parse_vocabulary(default_vocabulary_json(), setup.backend.get()));
  setup.targets = parse_targets(default_vocabulary_json());
  const World grass = make_uniform_world("grass", 600, 1.0);
  const double lower_bound = (setup.sim.start_altitude_m - cfg.success_altitude_m) / cfg.v_max_z;
  int landed = 0;
  double worst = 0.0;
  const auto matrix = run_matrix({grass}, setup, {PromptMode::peace}, 25, 2024);
  for (const auto& ep : matrix.episodes) {
    landed += ep.result.success;
    worst = std::max(worst, ep.result.elapsed_s);
  }
  const bool ok = seen.size() == 6 && fuzz_seen.size() == 6 && illegal == 0 && bound_violations == 0 && landed == 25 && worst < 1200.0 &&
                  worst < 3.0 * lower_bound;
  return {ok, fmt::format("scripted states {}/6, fuzz states {}/6, illegal {}, bound violations {}, liveness {}/25, "
                          "max elapsed {:.1f} s (bound {:.1f} s x3)",
                          seen.size(), fuzz_seen.size(), illegal, bound_violations, landed, worst, lower_bound)};
}

// ---------------------------------------------------------------- protocol
Outcome protocol_constants() {
  const SimulatorConfig sim;
  const PolicyConfig pol;
  EpisodeSetup setup;
  setup.backend = mock(43, 16);
  setup.vocab = std::make_shared<DescriptionVocabulary>(parse_vocabulary(default_vocabulary_json(), setup.backend.get()));
  setup.targets = parse_targets(default_vocabulary_json());
  setup.sim.camera_resolution = 32;

  const auto grass = run_episode(make_uniform_world("grass", 400, 1.0), setup, PromptMode::peace, 200, 200, 1);
  const auto road_world = make_uniform_world("road", 400, 1.0);
  auto unsafe_setup = setup;
  unsafe_setup.targets = {{"road"}, {}};
  const auto road = run_episode(road_world, unsafe_setup, PromptMode::plain, 200, 200, 1);
  auto water_setup = setup;
  water_setup.backend = mock(43, 8);
  water_setup.policy.sweep_half_extent_m = 40;
  const auto water = run_episode(make_uniform_world("water", 1000, 1.0), water_setup, PromptMode::plain, 500, 500, 1);

  bool ok = sim.start_altitude_m == 100.0 && pol.success_altitude_m == 20.0 && sim.timeout_s == 1200.0;
  ok &= grass.path.front().altitude == 100.0 && road.path.front().altitude == 100.0;
  ok &= grass.success && grass.path.back().altitude <= 20.0 &&
        make_uniform_world("grass", 4, 1.0).classes->is_safe(1);
  ok &= !road.success && road.reason == EpisodeOutcome::reached_20m_over_unsafe;
  ok &= !water.success && water.reason == EpisodeOutcome::timeout && water.elapsed_s == 1200.0;
  for (const auto* r : {&grass, &road, &water}) ok &= r->elapsed_s <= 1200.0;
  return {ok, fmt::format("start {:.0f} m; grass: {} at {:.1f} m; road: {}; water: {} after {:.0f} s",
                          grass.path.front().altitude, to_string(grass.reason), grass.path.back().altitude,
                          to_string(road.reason), to_string(water.reason), water.elapsed_s)};
}

// ---------------------------------------------------------------- domain shift
Outcome domain_shift() {
  EpisodeSetup setup;
  setup.backend = mock(47, 32);
  setup.vocab = std::make_shared<DescriptionVocabulary>(parse_vocabulary(default_vocabulary_json(), setup.backend.get()));
  setup.targets = parse_targets(default_vocabulary_json());
  DomainShiftOptions opt;
  opt.environment_words = setup.vocab->find("environment")->words;
  const std::string static_prompt = dovesei_prompt("grass");
  std::vector<World> worlds;
  int wrong_majority = 0;
  for (int s = 0; s < 50; ++s) {
    auto ds = make_domain_shift_world(9000 + s, opt);
    // Oracle: count tiles whose planted word the static prompt does not contain.
    int wrong = 0;
    for (const auto& tags : ds.world.tile_tags) {
      const auto& env = tags.at("environment");
      wrong += static_prompt.find(env) == std::string::npos;
    }
    wrong_majority += 2 * wrong >= ds.tile_count;
    worlds.push_back(std::move(ds.world));
  }
  const auto matrix = run_matrix(worlds, setup, {PromptMode::dovesei, PromptMode::peace}, 1, 77);
  int peace = 0, dove = 0;
  for (const auto& ep : matrix.episodes) (ep.mode == PromptMode::peace ? peace : dove) += ep.result.success;
  const bool all_wrong_majority = wrong_majority == 50;
  const bool ok = peace >= dove && (!all_wrong_majority || peace >= 1.3 * dove) && peace > 0;
  return {ok, fmt::format("peace {}/50 vs dovesei {}/50 ({:+.0f}% relative); static word wrong on >= half the "
                          "tiles in {}/50 worlds",
                          peace, dove, dove > 0 ? 100.0 * (peace - dove) / dove : INFINITY, wrong_majority)};
}

// ---------------------------------------------------------------- mIoU
Outcome miou_harness() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<HeatmapPair> pairs;
    double sum = 0.0;
    const int n = 1 + trial;
    for (int p = 0; p < n; ++p) {
      Grid<double> heat(16, 16);
      BinaryMask gt(16, 16);
      const double density = u(rng);
      for (auto& v : heat.values) v = u(rng);
      for (auto& v : gt.values) v = u(rng) < density;
      long inter = 0, uni = 0;
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          const bool a = heat.at(x, y) >= 0.5;
          const bool b = gt.at(x, y) != 0;
          if (a && b) ++inter;
          if (a || b) ++uni;
        }
      }
      sum += uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
      pairs.emplace_back(heat, gt);
    }
    worst = std::max(worst, std::abs(miou(pairs, 0.5) - sum / n));
  }
  auto backend = mock(59, 32);
  const DescriptionVocabulary vocab = parse_vocabulary(default_vocabulary_json(), backend.get());
  MiouSuiteOptions opt;
  opt.images = 40;
  opt.seed = 59;
  const auto suite = run_miou_suite(*backend, vocab, parse_targets(default_vocabulary_json()), PromptConfig{}, opt);
  const bool ok = worst <= 1e-12 && suite.fused >= suite.positive_only;
  return {ok, fmt::format("oracle err {:.1e}; labeled suite mIoU fused {:.3f} vs positive-only {:.3f} ({} images)",
                          worst, suite.fused, suite.positive_only, suite.images)};
}

// ---------------------------------------------------------------- determinism
std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int sh(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("peace_accept_{}", std::random_device{}());
  fs::create_directories(root);
  const std::string cli = PEACE_CLI_PATH;
  const auto cfg = root / "config.json";
  std::ofstream(cfg) << R"({"backend": {"seg_resolution": 16}, "simulator": {"camera_resolution": 32},
                            "eval": {"images": 6}})";
  save_image(make_labeled_scene(5, 32, {{"environment", "foggy"}}), root / "scene.png");
  int rc = sh(fmt::format("{} gen-world --kind disks --size 200 --seed 3 --out {} > /dev/null", cli,
                          (root / "world").string()));
  std::vector<std::string> mismatched;
  std::size_t files = 0;
  for (const char* run : {"a", "b"}) {
    const auto out = root / run;
    fs::create_directories(out);
    const std::string common = fmt::format("--config {} --seed 11", cfg.string());
    rc |= sh(fmt::format("{} prompt {} {} > {}", cli, (root / "scene.png").string(), common,
                         (out / "prompt.txt").string()));
    rc |= sh(fmt::format("{} segment {} {} --out {} > {}", cli, (root / "scene.png").string(), common,
                         (out / "segment").string(), (out / "segment.txt").string()));
    rc |= sh(fmt::format("{} fly --world {} {} --starts 2 --out-dir {} > {}", cli, (root / "world").string(), common,
                         (out / "fly").string(), (out / "fly.txt").string()));
    rc |= sh(fmt::format("{} matrix --world {} {} --starts 1 --out-dir {} > {}", cli, (root / "world").string(),
                         common, (out / "matrix").string(), (out / "matrix.txt").string()));
    rc |= sh(fmt::format("{} eval {} --report {} --out-dir {} > {}", cli, common,
                         (out / "matrix" / "report.json").string(), (out / "eval").string(),
                         (out / "eval.txt").string()));
    rc |= sh(fmt::format("{} gen-world --kind domain-shift --size 120 --seed 11 --out {} > /dev/null", cli,
                         (out / "gen").string()));
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    ++files;
    auto a = read_bytes(entry.path());
    auto b = read_bytes(root / "b" / rel);
    // Output-directory paths echoed to stdout differ by construction.
    if (rel.extension() == ".txt" && rel.parent_path().empty()) {
      a = std::regex_replace(a, std::regex(root.string() + "/a"), "");
      b = std::regex_replace(b, std::regex(root.string() + "/b"), "");
    }
    if (a != b) mismatched.push_back(rel.string());
  }
  fs::remove_all(root);
  std::string detail = fmt::format("{} artifacts compared across two runs, {} differ", files, mismatched.size());
  for (const auto& m : mismatched) detail += " " + m;
  if (rc != 0) detail += "; a CLI command failed";
  return {rc == 0 && mismatched.empty() && files > 20, detail};
}

}  // namespace

int main() {
  std::cout << "acceptance: mock backend, synthetic worlds" << std::endl;
  run("fusion invariants", 5, fusion_invariants);
  run("prompt selection correctness", 10, prompt_selection);
  run("template fidelity", 5, template_fidelity);
  run("state machine reachability, fuzzing and liveness", 60, state_machine);
  run("protocol constants", 60, protocol_constants);
  run("domain-shift direction of effect", 300, domain_shift);
  run("mIoU harness", 30, miou_harness);
  run("determinism of CLI artifacts", 120, determinism);
  if (const char* dir = std::getenv("PEACE_MODEL_DIR"); dir == nullptr || *dir == '\0') {
    skip("real-model smoke test", "(PEACE_MODEL_DIR unset)");
  } else {
    run("real-model smoke test", 300, [] {
      BackendDescriptor d;
      d.kind = BackendKind::portable_graph;
      const auto backend = make_backend(d);
      const auto image = load_image(fs::path(PEACE_SOURCE_DIR) / "tests" / "fixtures" / "smoke.png");
      if (!image.annotation || image.annotation->labels.empty()) return Outcome{false, "fixture lacks labels"};
      const auto logits = backend->segment(image, "A photo of grass");
      const auto labels = resize_nearest(image.annotation->labels, logits.width, logits.height);
      const auto& classes = *image.annotation->classes;
      double grass = 0, road = 0;
      int ng = 0, nr = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto* c = classes.find(labels.values[i]);
        if (c && c->word == "grass") grass += logits.values[i], ++ng;
        if (c && c->word == "road") road += logits.values[i], ++nr;
      }
      if (!ng || !nr) return Outcome{false, "fixture needs grass and road regions"};
      return Outcome{grass / ng > road / nr, fmt::format("grass mean {:.3f} vs road mean {:.3f}", grass / ng, road / nr)};
    });
  }
  std::cout << (failures == 0 ? "acceptance: all criteria passed" : fmt::format("acceptance: {} failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
