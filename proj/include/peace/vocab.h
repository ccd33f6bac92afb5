#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "peace/backend.h"

namespace peace {

enum class RoleKind { resolution, frame, environment, aerial, context_aware, custom };

/// Description-type role. Custom roles carry their own name.
struct Role {
  RoleKind kind = RoleKind::custom;
  std::string name;  // canonical spelling, e.g. "environment", "context_aware"

  static Role parse(std::string_view s);
  static Role of(RoleKind kind);
  /// aerial and context_aware are accepted but considered optional.
  bool optional() const { return kind == RoleKind::aerial || kind == RoleKind::context_aware; }

  friend bool operator==(const Role& a, const Role& b) { return a.name == b.name; }
};

struct DescriptionType {
  Role role;
  std::vector<std::string> words;
  /// One unit vector per word once embedded; empty before.
  std::vector<EmbeddingVector> embeddings;
  bool enabled = true;

  bool embedded() const { return embeddings.size() == words.size(); }
};

inline constexpr std::string_view kDefaultTemplate = "A {resolution} {frame} of {} in {environment}.";

struct DescriptionVocabulary {
  std::vector<DescriptionType> types;
  std::string class_slot_marker = "{}";
  /// Prompt template: "{role}" placeholders plus one class slot marker.
  std::string template_text = std::string(kDefaultTemplate);

  const DescriptionType* find(std::string_view role) const;
  /// Enabled types, in file order.
  std::vector<const DescriptionType*> active_types() const;
  /// Role names the template references, in order of appearance.
  std::vector<std::string> template_roles() const;

  friend bool operator==(const DescriptionVocabulary& a, const DescriptionVocabulary& b);
};

struct TargetLists {
  std::vector<std::string> positives;
  std::vector<std::string> negatives;

  std::size_t x() const { return positives.size(); }
  std::size_t y() const { return negatives.size(); }
  friend bool operator==(const TargetLists&, const TargetLists&) = default;
};

/// Parses and validates the vocabulary document. Embeds when `embedder` is set.
DescriptionVocabulary parse_vocabulary(std::string_view json_text, const TextEmbedder* embedder);
DescriptionVocabulary load_vocabulary(const std::filesystem::path& path, const TextEmbedder& embedder);
/// Loads without embedding (for inspection or serialization).
DescriptionVocabulary load_vocabulary(const std::filesystem::path& path);

TargetLists parse_targets(std::string_view json_text);
TargetLists load_targets(const std::filesystem::path& path);

/// Populates every enabled type's embeddings, preserving word order.
void embed_vocabulary(DescriptionVocabulary& vocab, const TextEmbedder& embedder);

/// Serializes into the same document shape `parse_vocabulary` reads.
std::string serialize_vocabulary(const DescriptionVocabulary& vocab, const TargetLists* targets);

/// The shipped vocabulary document (config/vocabulary.json).
std::string_view default_vocabulary_json();

}  // namespace peace
