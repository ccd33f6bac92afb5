#include <doctest.h>

#include <random>

#include "peace/errors.h"
#include "peace/eval_metrics.h"
#include "peace/report.h"
#include "test_support.h"

using namespace peace;

namespace {

BinaryMask mask(int n, bool (*pred)(int, int, int)) {
  BinaryMask m(n, n, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) m.at(x, y) = pred(x, y, n) ? 1 : 0;
  }
  return m;
}

MatrixEpisode episode(PromptMode mode, bool success, double distance, double time) {
  MatrixEpisode e;
  e.mode = mode;
  e.result.success = success;
  e.result.reason = success ? EpisodeOutcome::reached_20m_over_safe : EpisodeOutcome::timeout;
  e.result.horizontal_distance_m = distance;
  e.result.elapsed_s = time;
  return e;
}

}  // namespace

TEST_CASE("binarize uses a >= threshold") {
  CHECK(binarize(Grid<double>(3, 3, 0.6), 0.5) == BinaryMask(3, 3, 1));
  CHECK(binarize(Grid<double>(3, 3, 0.5), 0.5) == BinaryMask(3, 3, 1));
  Grid<double> checker(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) checker.at(x, y) = (x + y) % 2;
  }
  const auto m = binarize(checker, 0.5);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(0, 0) == 0);
  CHECK_THROWS_AS(binarize(checker, 1.0), ValidationError);
}

TEST_CASE("iou of left half against top half is one third") {
  const auto left = mask(8, [](int x, int, int n) { return x < n / 2; });
  const auto top = mask(8, [](int, int y, int n) { return y < n / 2; });
  CHECK(iou(left, top) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(left, left) == 1.0);
  const auto right = mask(8, [](int x, int, int n) { return x >= n / 2; });
  CHECK(iou(left, right) == 0.0);
  CHECK(iou(BinaryMask(4, 4, 0), BinaryMask(4, 4, 0)) == 1.0);
  CHECK_THROWS_AS(iou(BinaryMask(4, 4, 0), BinaryMask(4, 5, 0)), ComputationError);
}

TEST_CASE("miou averages per-pair iou") {
  const auto full = BinaryMask(4, 4, 1);
  std::vector<HeatmapPair> pairs{{Grid<double>(4, 4, 1.0), full}, {Grid<double>(4, 4, 0.0), full}};
  CHECK(miou(pairs, 0.5) == 0.5);
  CHECK(miou({pairs[0]}, 0.5) == 1.0);
  CHECK_THROWS_AS(miou({}, 0.5), ValidationError);
}

TEST_CASE("miou equals a pixel-count oracle on random masks and ignores order") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<HeatmapPair> pairs;
  double oracle = 0.0;
  for (int p = 0; p < 12; ++p) {
    Grid<double> heat(16, 16);
    BinaryMask gt(16, 16);
    for (auto& v : heat.values) v = u(rng);
    for (auto& v : gt.values) v = u(rng) < 0.4;
    int inter = 0, uni = 0;
    for (int i = 0; i < 256; ++i) {
      const bool a = heat.values[i] >= 0.5, b = gt.values[i] != 0;
      inter += a && b;
      uni += a || b;
    }
    oracle += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    pairs.emplace_back(heat, gt);
  }
  oracle /= 12;
  CHECK(std::abs(miou(pairs, 0.5) - oracle) <= 1e-12);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  CHECK(std::abs(miou(pairs, 0.5) - oracle) <= 1e-12);
}

TEST_CASE("aggregate means match a hand recomputation") {
  MatrixResult m;
  m.modes = {PromptMode::peace, PromptMode::plain};
  m.seed = 3;
  m.episodes = {episode(PromptMode::peace, true, 10, 100), episode(PromptMode::plain, false, 40, 1200),
                episode(PromptMode::peace, false, 30, 500), episode(PromptMode::plain, true, 20, 60)};
  const auto r = aggregate(m);
  REQUIRE(r.modes.size() == 2);
  CHECK(r.modes[0].mode == PromptMode::plain);
  CHECK(r.modes[0].successes == 1);
  CHECK(r.modes[0].mean_distance_m == doctest::Approx(30.0));
  CHECK(r.modes[0].mean_time_s == doctest::Approx(630.0));
  CHECK(r.modes[1].mean_distance_m == doctest::Approx(20.0));
  CHECK(r.modes[1].mean_time_s == doctest::Approx(300.0));
  CHECK(r.modes[1].outcomes.at("timeout") == 1);

  const auto table = render_table(r);
  CHECK(table.find("Total Successful SLZ selections") != std::string::npos);
  CHECK(table.find("Average Horizontal Distance (m)") != std::string::npos);
  CHECK(table.find("Average Time Spent (s)") != std::string::npos);
  CHECK(table.find("mIoU") == std::string::npos);
  CHECK(table.find("630.00") != std::string::npos);

  const auto with_miou = aggregate(m, {{PromptMode::peace, 0.31}});
  CHECK(render_table(with_miou).find("mIoU") != std::string::npos);
  const auto back = parse_report_json(report_json(with_miou));
  CHECK(back.modes[1].miou == doctest::Approx(0.31));
  CHECK(report_json(back) == report_json(with_miou));
}

TEST_CASE("columns follow default, dovesei, peace") {
  const auto order = canonical_order({PromptMode::peace, PromptMode::dovesei, PromptMode::plain});
  CHECK(order == std::vector<PromptMode>{PromptMode::plain, PromptMode::dovesei, PromptMode::peace});
  MatrixResult m;
  m.modes = order;
  const auto table = render_table(aggregate(m));
  const auto header = table.substr(0, table.find('\n'));
  CHECK(header.find("default") < header.find("dovesei"));
  CHECK(header.find("dovesei") < header.find("peace"));
}

TEST_CASE("svg plot draws one polyline and one star per path") {
  const std::vector<PlotPath> paths{{PromptMode::peace, {{0, 0, 100, 0}, {10, 5, 90, 0.5}}},
                                    {PromptMode::plain, {{4, 4, 100, 0}}}};
  const auto svg = render_path_svg(paths, 100, 80, 0.5, "world.png");
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count("<polyline") == 2);
  CHECK(count("class=\"end\"") == 2);
  CHECK(svg.find("href=\"world.png\"") != std::string::npos);
  CHECK(svg.find("20.00,10.00") != std::string::npos);  // meters -> pixels
}

TEST_CASE("trace csv round-trips") {
  std::vector<TraceRow> rows{{0.0, 1.25, 2.5, 100.0, MachineState::Searching, 0.125},
                             {0.5, 1.5, 2.5, 98.0, MachineState::Landing, 0.75}};
  const auto text = trace_csv(rows);
  CHECK(text.rfind("t,x,y,altitude,state,heatmap_center\n", 0) == 0);
  CHECK(parse_trace_csv(text) == rows);
  CHECK_THROWS_AS(parse_trace_csv("a,b\n"), SchemaError);
  CHECK_THROWS_AS(parse_trace_csv("t,x,y,altitude,state,heatmap_center\n1,2,3,4,Flying,0\n"), SchemaError);
}

TEST_CASE("event lines carry the seed") {
  const auto text = events_jsonl({{0.5, "state_changed", "Searching->Aiming"}}, 77);
  CHECK(text.find("\"seed\":77") != std::string::npos);
}

TEST_CASE("fused mIoU beats positive-only on the labeled suite") {
  auto backend = testing::mock_backend(5, 32);
  const auto vocab = testing::default_vocab(*backend);
  MiouSuiteOptions opt;
  opt.images = 8;
  opt.image_size = 48;
  const auto r = run_miou_suite(*backend, *vocab, testing::default_targets(), PromptConfig{}, opt);
  CHECK(r.images == 8);
  CHECK(r.fused >= r.positive_only);
}
