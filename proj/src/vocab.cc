#include "peace/vocab.h"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "peace/errors.h"

namespace peace {

using nlohmann::json;

Role Role::of(RoleKind kind) {
  switch (kind) {
    case RoleKind::resolution: return {kind, "resolution"};
    case RoleKind::frame: return {kind, "frame"};
    case RoleKind::environment: return {kind, "environment"};
    case RoleKind::aerial: return {kind, "aerial"};
    case RoleKind::context_aware: return {kind, "context_aware"};
    case RoleKind::custom: break;
  }
  throw ContractError("Role::of(custom) needs a name");
}

Role Role::parse(std::string_view s) {
  if (s == "resolution") return of(RoleKind::resolution);
  if (s == "frame") return of(RoleKind::frame);
  if (s == "environment") return of(RoleKind::environment);
  if (s == "aerial") return of(RoleKind::aerial);
  if (s == "context_aware" || s == "context-aware") return of(RoleKind::context_aware);
  if (s.empty()) throw ValidationError("role name must be non-empty");
  return {RoleKind::custom, std::string(s)};
}

const DescriptionType* DescriptionVocabulary::find(std::string_view role) const {
  for (const auto& t : types) {
    if (t.role.name == role) return &t;
  }
  return nullptr;
}

std::vector<const DescriptionType*> DescriptionVocabulary::active_types() const {
  std::vector<const DescriptionType*> out;
  for (const auto& t : types) {
    if (t.enabled) out.push_back(&t);
  }
  return out;
}

std::vector<std::string> DescriptionVocabulary::template_roles() const {
  std::vector<std::string> roles;
  std::string_view t = template_text;
  std::size_t pos = 0;
  while ((pos = t.find('{', pos)) != std::string_view::npos) {
    const auto close = t.find('}', pos);
    if (close == std::string_view::npos) break;
    const auto name = t.substr(pos + 1, close - pos - 1);
    if (!name.empty()) roles.emplace_back(name);
    pos = close + 1;
  }
  return roles;
}

bool operator==(const DescriptionVocabulary& a, const DescriptionVocabulary& b) {
  if (a.class_slot_marker != b.class_slot_marker || a.template_text != b.template_text ||
      a.types.size() != b.types.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.types.size(); ++i) {
    if (!(a.types[i].role == b.types[i].role) || a.types[i].words != b.types[i].words ||
        a.types[i].enabled != b.types[i].enabled) {
      return false;
    }
  }
  return true;
}

namespace {

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "vocabulary parse error at line " << line_of(text, e.byte) << ": " << e.what();
    throw SchemaError(msg.str());
  }
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw SchemaError(where + " must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError("unknown key '" + key + "' in " + where);
    }
  }
}

TargetLists targets_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("targets must be an object");
  check_keys(j, {"positives", "negatives"}, "targets");
  if (!j.contains("positives")) throw SchemaError("targets.positives is required");
  TargetLists t;
  t.positives = string_list(j.at("positives"), "targets.positives");
  if (j.contains("negatives")) t.negatives = string_list(j.at("negatives"), "targets.negatives");
  if (t.positives.empty()) throw ValidationError("targets.positives must be non-empty");
  std::set<std::string> seen;
  for (const auto& w : t.positives) {
    if (w.empty()) throw ValidationError("empty positive target word");
    if (!seen.insert(w).second) throw ValidationError("duplicate positive target '" + w + "'");
  }
  std::set<std::string> neg_seen;
  for (const auto& w : t.negatives) {
    if (w.empty()) throw ValidationError("empty negative target word");
    if (seen.count(w)) throw ValidationError("target '" + w + "' is both positive and negative");
    if (!neg_seen.insert(w).second) throw ValidationError("duplicate negative target '" + w + "'");
  }
  return t;
}

void validate_template(const DescriptionVocabulary& v) {
  const auto& t = v.template_text;
  const auto& marker = v.class_slot_marker;
  if (marker.empty()) throw ValidationError("class_slot_marker must be non-empty");
  std::size_t count = 0;
  for (auto pos = t.find(marker); pos != std::string::npos; pos = t.find(marker, pos + marker.size())) {
    ++count;
  }
  if (count != 1) throw ValidationError("template must contain the class slot exactly once");
  for (const auto& role : v.template_roles()) {
    const auto* type = v.find(Role::parse(role).name);
    if (type == nullptr) throw ValidationError("missing required role '" + role + "'");
    if (!type->enabled) throw ValidationError("template role '" + role + "' is disabled");
  }
}

}  // namespace

DescriptionVocabulary parse_vocabulary(std::string_view json_text, const TextEmbedder* embedder) {
  const json doc = parse_document(json_text);
  if (!doc.is_object()) throw SchemaError("vocabulary document must be an object");
  check_keys(doc, {"notes", "class_slot_marker", "template", "types", "targets"}, "vocabulary");
  if (!doc.contains("types")) throw SchemaError("vocabulary.types is required");
  const auto& types = doc.at("types");
  if (!types.is_array()) throw SchemaError("vocabulary.types must be an array");
  if (types.empty()) throw ValidationError("vocabulary needs at least one description type");

  DescriptionVocabulary vocab;
  if (doc.contains("class_slot_marker")) {
    if (!doc.at("class_slot_marker").is_string()) throw SchemaError("class_slot_marker must be a string");
    vocab.class_slot_marker = doc.at("class_slot_marker").get<std::string>();
  }
  if (doc.contains("template")) {
    if (!doc.at("template").is_string()) throw SchemaError("template must be a string");
    vocab.template_text = doc.at("template").get<std::string>();
  }

  std::set<std::string> roles;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const auto& tj = types[i];
    const std::string where = "types[" + std::to_string(i) + "]";
    if (!tj.is_object()) throw SchemaError(where + " must be an object");
    check_keys(tj, {"role", "words", "enabled"}, where);
    if (!tj.contains("role") || !tj.at("role").is_string()) {
      throw SchemaError(where + ".role must be a string");
    }
    if (!tj.contains("words")) throw SchemaError(where + ".words is required");
    DescriptionType type;
    type.role = Role::parse(tj.at("role").get<std::string>());
    type.words = string_list(tj.at("words"), where + ".words");
    if (tj.contains("enabled")) {
      if (!tj.at("enabled").is_boolean()) throw SchemaError(where + ".enabled must be a boolean");
      type.enabled = tj.at("enabled").get<bool>();
    }
    if (type.words.empty()) throw ValidationError(where + " has no words");
    if (!roles.insert(type.role.name).second) {
      throw ValidationError("duplicate role '" + type.role.name + "'");
    }
    std::set<std::string> seen;
    for (const auto& w : type.words) {
      if (w.empty()) throw ValidationError(where + " contains an empty word");
      if (!seen.insert(w).second) {
        throw ValidationError("duplicate word '" + w + "' in role '" + type.role.name + "'");
      }
    }
    vocab.types.push_back(std::move(type));
  }
  validate_template(vocab);
  if (doc.contains("targets")) targets_from_json(doc.at("targets"));
  if (embedder != nullptr) embed_vocabulary(vocab, *embedder);
  return vocab;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DescriptionVocabulary load_vocabulary(const std::filesystem::path& path, const TextEmbedder& embedder) {
  return parse_vocabulary(read_file(path), &embedder);
}

DescriptionVocabulary load_vocabulary(const std::filesystem::path& path) {
  return parse_vocabulary(read_file(path), nullptr);
}

TargetLists parse_targets(std::string_view json_text) {
  const json doc = parse_document(json_text);
  if (!doc.is_object()) throw SchemaError("target document must be an object");
  // Accept either a whole vocabulary document or a bare targets object.
  if (doc.contains("targets")) return targets_from_json(doc.at("targets"));
  return targets_from_json(doc);
}

TargetLists load_targets(const std::filesystem::path& path) { return parse_targets(read_file(path)); }

void embed_vocabulary(DescriptionVocabulary& vocab, const TextEmbedder& embedder) {
  for (auto& type : vocab.types) {
    type.embeddings.clear();
    if (!type.enabled) continue;
    type.embeddings.reserve(type.words.size());
    for (const auto& w : type.words) type.embeddings.push_back(normalize(embedder.embed_text(w)));
  }
}

std::string serialize_vocabulary(const DescriptionVocabulary& vocab, const TargetLists* targets) {
  json doc;
  doc["class_slot_marker"] = vocab.class_slot_marker;
  doc["template"] = vocab.template_text;
  json types = json::array();
  for (const auto& t : vocab.types) {
    json tj;
    tj["role"] = t.role.name;
    if (!t.enabled) tj["enabled"] = false;
    tj["words"] = t.words;
    types.push_back(std::move(tj));
  }
  doc["types"] = std::move(types);
  if (targets != nullptr) {
    doc["targets"] = {{"positives", targets->positives}, {"negatives", targets->negatives}};
  }
  return doc.dump(2) + "\n";
}

}  // namespace peace
