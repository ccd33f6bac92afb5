#include "peace/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "peace/errors.h"

namespace peace {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError("config: '" + section + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) {
      throw SchemaError("config: unknown key '" + key + "'" + (section.empty() ? "" : " in '" + section + "'"));
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty()) return base_dir / path;
  return path;
}

void read_mock(const json& j, MockOptions& m) {
  check_keys(j, "backend.mock",
             {"embed_noise", "seg_noise", "match_logit", "related_logit", "other_logit", "domain_roles",
              "domain_shift_gain", "domain_shift_noise", "affinity"});
  read(j, "embed_noise", m.embed_noise);
  read(j, "seg_noise", m.seg_noise);
  read(j, "match_logit", m.match_logit);
  read(j, "related_logit", m.related_logit);
  read(j, "other_logit", m.other_logit);
  read(j, "domain_roles", m.domain_roles);
  read(j, "domain_shift_gain", m.domain_shift_gain);
  read(j, "domain_shift_noise", m.domain_shift_noise);
  if (j.contains("affinity")) {
    m.affinity.clear();
    for (const auto& pair : j.at("affinity")) {
      const auto words = pair.get<std::vector<std::string>>();
      if (words.size() != 2) throw SchemaError("config: backend.mock.affinity entries are [word, word] pairs");
      m.affinity.emplace_back(words[0], words[1]);
    }
  }
}

void read_focus(const json& j, FocusRadii& f) {
  check_keys(j, "policy.focus", {"searching", "aiming", "landing", "waiting", "climbing", "restarting"});
  read(j, "searching", f.searching);
  read(j, "aiming", f.aiming);
  read(j, "landing", f.landing);
  read(j, "waiting", f.waiting);
  read(j, "climbing", f.climbing);
  read(j, "restarting", f.restarting);
}

}  // namespace

void RunConfig::validate() const {
  if (backend.embed_dim < 1) throw ValidationError("backend.embed_dim must be >= 1");
  if (backend.seg_width < 1 || backend.seg_height < 1) throw ValidationError("backend.seg_resolution must be >= 1");
  if (prompt.cadence < 1) throw ValidationError("prompt.cadence must be >= 1");
  if (prompt.env_top_k < 1) throw ValidationError("prompt.env_top_k must be >= 1");
  policy.validate();
  simulator.validate();
  if (!(eval.tau > 0.0 && eval.tau < 1.0)) throw ValidationError("eval.tau must be in (0, 1)");
  if (eval.blur_sigma < 0.0) throw ValidationError("eval.blur_sigma must be >= 0");
  if (eval.images < 1) throw ValidationError("eval.images must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text, RunConfig c, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  try {
    check_keys(j, "", {"seed", "vocabulary", "targets", "backend", "prompt", "fusion", "policy", "simulator", "eval"});
    read(j, "seed", c.seed);
    if (j.contains("vocabulary")) c.vocabulary = resolve(base_dir, j.at("vocabulary").get<std::string>());
    if (j.contains("targets")) c.targets = resolve(base_dir, j.at("targets").get<std::string>());
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      check_keys(b, "backend", {"kind", "seed", "embed_dim", "seg_resolution", "model_dir", "mock"});
      if (b.contains("kind")) c.backend.kind = parse_backend_kind(b.at("kind").get<std::string>());
      if (b.contains("seed")) {
        if (b.at("seed").is_null()) {
          c.backend.seed.reset();
        } else {
          c.backend.seed = b.at("seed").get<std::uint64_t>();
        }
      }
      read(b, "embed_dim", c.backend.embed_dim);
      if (b.contains("seg_resolution")) {
        c.backend.seg_width = c.backend.seg_height = b.at("seg_resolution").get<int>();
      }
      if (b.contains("model_dir") && !b.at("model_dir").is_null()) {
        c.backend.model_dir = resolve(base_dir, b.at("model_dir").get<std::string>());
      }
      if (b.contains("mock")) read_mock(b.at("mock"), c.backend.mock);
    }
    if (j.contains("prompt")) {
      const auto& p = j.at("prompt");
      check_keys(p, "prompt", {"mode", "cadence", "env_top_k", "caption_fusion"});
      if (p.contains("mode")) c.prompt.mode = parse_prompt_mode(p.at("mode").get<std::string>());
      read(p, "cadence", c.prompt.cadence);
      read(p, "env_top_k", c.prompt.env_top_k);
      read(p, "caption_fusion", c.prompt.caption_fusion);
    }
    if (j.contains("fusion")) {
      const auto& f = j.at("fusion");
      check_keys(f, "fusion", {"collapse"});
      if (f.contains("collapse")) c.collapse = parse_collapse_mode(f.at("collapse").get<std::string>());
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      check_keys(p, "policy",
                 {"tau_safe", "safety_radius_m", "aim_epsilon_frac", "aim_hold_frames", "wait_timeout_s",
                  "safe_altitude_m", "success_altitude_m", "v_max_h", "v_max_z", "horizontal_gain",
                  "sweep_half_extent_m", "focus"});
      auto& q = c.policy;
      read(p, "tau_safe", q.tau_safe);
      read(p, "safety_radius_m", q.safety_radius_m);
      read(p, "aim_epsilon_frac", q.aim_epsilon_frac);
      read(p, "aim_hold_frames", q.aim_hold_frames);
      read(p, "wait_timeout_s", q.wait_timeout_s);
      read(p, "safe_altitude_m", q.safe_altitude_m);
      read(p, "success_altitude_m", q.success_altitude_m);
      read(p, "v_max_h", q.v_max_h);
      read(p, "v_max_z", q.v_max_z);
      read(p, "horizontal_gain", q.horizontal_gain);
      read(p, "sweep_half_extent_m", q.sweep_half_extent_m);
      if (p.contains("focus")) read_focus(p.at("focus"), q.focus);
    }
    if (j.contains("simulator")) {
      const auto& s = j.at("simulator");
      check_keys(s, "simulator",
                 {"fov_deg", "camera_resolution", "control_rate_hz", "timeout_s", "start_altitude_m", "drift_sigma_m"});
      read(s, "fov_deg", c.simulator.fov_deg);
      read(s, "camera_resolution", c.simulator.camera_resolution);
      read(s, "control_rate_hz", c.simulator.control_rate_hz);
      read(s, "timeout_s", c.simulator.timeout_s);
      read(s, "start_altitude_m", c.simulator.start_altitude_m);
      read(s, "drift_sigma_m", c.simulator.drift_sigma_m);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, "eval", {"tau", "blur_sigma", "images"});
      read(e, "tau", c.eval.tau);
      read(e, "blur_sigma", c.eval.blur_sigma);
      read(e, "images", c.eval.images);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base), path.parent_path());
}

std::string serialize_run_config(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  if (c.vocabulary) j["vocabulary"] = c.vocabulary->string();
  if (c.targets) j["targets"] = c.targets->string();
  auto& b = j["backend"];
  b["kind"] = to_string(c.backend.kind);
  if (c.backend.seed) {
    b["seed"] = *c.backend.seed;
  } else {
    b["seed"] = nullptr;
  }
  b["embed_dim"] = c.backend.embed_dim;
  b["seg_resolution"] = c.backend.seg_width;
  if (c.backend.model_dir) b["model_dir"] = c.backend.model_dir->string();
  const auto& m = c.backend.mock;
  auto& mj = b["mock"];
  mj["embed_noise"] = m.embed_noise;
  mj["seg_noise"] = m.seg_noise;
  mj["match_logit"] = m.match_logit;
  mj["related_logit"] = m.related_logit;
  mj["other_logit"] = m.other_logit;
  mj["domain_roles"] = m.domain_roles;
  mj["domain_shift_gain"] = m.domain_shift_gain;
  mj["domain_shift_noise"] = m.domain_shift_noise;
  mj["affinity"] = nlohmann::ordered_json::array();
  for (const auto& [a, w] : m.affinity) mj["affinity"].push_back({a, w});
  j["prompt"] = {{"mode", to_string(c.prompt.mode)},
                 {"cadence", c.prompt.cadence},
                 {"env_top_k", c.prompt.env_top_k},
                 {"caption_fusion", c.prompt.caption_fusion}};
  j["fusion"] = {{"collapse", to_string(c.collapse)}};
  const auto& p = c.policy;
  j["policy"] = {{"tau_safe", p.tau_safe},
                 {"safety_radius_m", p.safety_radius_m},
                 {"aim_epsilon_frac", p.aim_epsilon_frac},
                 {"aim_hold_frames", p.aim_hold_frames},
                 {"wait_timeout_s", p.wait_timeout_s},
                 {"safe_altitude_m", p.safe_altitude_m},
                 {"success_altitude_m", p.success_altitude_m},
                 {"v_max_h", p.v_max_h},
                 {"v_max_z", p.v_max_z},
                 {"horizontal_gain", p.horizontal_gain},
                 {"sweep_half_extent_m", p.sweep_half_extent_m},
                 {"focus",
                  {{"searching", p.focus.searching},
                   {"aiming", p.focus.aiming},
                   {"landing", p.focus.landing},
                   {"waiting", p.focus.waiting},
                   {"climbing", p.focus.climbing},
                   {"restarting", p.focus.restarting}}}};
  const auto& s = c.simulator;
  j["simulator"] = {{"fov_deg", s.fov_deg},
                    {"camera_resolution", s.camera_resolution},
                    {"control_rate_hz", s.control_rate_hz},
                    {"timeout_s", s.timeout_s},
                    {"start_altitude_m", s.start_altitude_m},
                    {"drift_sigma_m", s.drift_sigma_m}};
  j["eval"] = {{"tau", c.eval.tau}, {"blur_sigma", c.eval.blur_sigma}, {"images", c.eval.images}};
  return j.dump(2) + "\n";
}

}  // namespace peace
