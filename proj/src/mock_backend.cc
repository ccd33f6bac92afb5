#include "peace/mock_backend.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "peace/errors.h"
#include "peace/hash.h"

namespace peace {

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '\'' || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

MockBackend::MockBackend(BackendDescriptor descriptor)
    : descriptor_(std::move(descriptor)), seed_(descriptor_.seed.value_or(0)) {
  if (!descriptor_.seed) throw BackendError("mock backend requires a seed");
}

std::vector<float> MockBackend::unit_gaussian(std::uint64_t stream) const {
  std::vector<float> v(descriptor_.embed_dim);
  double n2 = 0.0;
  for (int i = 0; i < descriptor_.embed_dim; ++i) {
    const double g = counter_normal(stream, static_cast<std::uint64_t>(i));
    v[i] = static_cast<float>(g);
    n2 += g * g;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x = static_cast<float>(x * inv);
  return v;
}

std::vector<float> MockBackend::token_vector(std::string_view token) const {
  return unit_gaussian(hash_combine(seed_, fnv1a(token, fnv1a("token:"))));
}

EmbeddingVector MockBackend::embed_text(std::string_view text) const {
  const auto tokens = word_tokens(text);
  if (tokens.empty()) throw ValidationError("embed_text requires non-empty text");
  std::vector<double> acc(descriptor_.embed_dim, 0.0);
  for (const auto& t : tokens) {
    const auto v = token_vector(t);
    for (int i = 0; i < descriptor_.embed_dim; ++i) acc[i] += v[i];
  }
  EmbeddingVector out;
  out.values.assign(acc.begin(), acc.end());
  return normalize(std::move(out));
}

EmbeddingVector MockBackend::embed_image(const RgbImage& image) const {
  if (image.empty()) throw InputError("embed_image: zero-sized image");
  const std::uint64_t stream = hash_combine(seed_, hash_combine(fnv1a("image"), content_hash(image)));
  const auto noise = unit_gaussian(stream);
  std::vector<double> acc(descriptor_.embed_dim, 0.0);
  std::size_t planted = 0;
  if (image.annotation) {
    for (const auto& [role, word] : image.annotation->tags) {
      if (word_tokens(word).empty()) continue;
      const auto t = embed_text(word);
      for (int i = 0; i < descriptor_.embed_dim; ++i) acc[i] += t.values[i];
      ++planted;
    }
  }
  const double noise_scale =
      planted == 0 ? 1.0 : descriptor_.mock.embed_noise * std::sqrt(static_cast<double>(planted));
  for (int i = 0; i < descriptor_.embed_dim; ++i) acc[i] += noise_scale * noise[i];
  EmbeddingVector out;
  out.values.assign(acc.begin(), acc.end());
  return normalize(std::move(out));
}

std::optional<std::string> MockBackend::caption(const RgbImage& image) const {
  if (!image.annotation) return std::nullopt;
  const auto& ann = *image.annotation;
  std::optional<std::string> majority;
  if (auto it = ann.tags.find("class_majority"); it != ann.tags.end()) {
    majority = it->second;
  } else {
    majority = ann.majority_class();
  }
  std::optional<std::string> env;
  if (auto it = ann.tags.find("environment"); it != ann.tags.end()) env = it->second;
  if (majority) {
    std::string s = "an aerial scene of mostly " + *majority;
    if (env) s += ", " + *env;
    return s;
  }
  if (env) return "an aerial scene, " + *env;
  return std::nullopt;
}

std::optional<std::string> MockBackend::prompt_class(std::string_view prompt,
                                                     const ClassTable* classes) const {
  const auto tokens = word_tokens(prompt);
  for (const auto& t : tokens) {
    if (classes != nullptr) {
      if (const auto* c = classes->find(t); c != nullptr && c->id != kUnknownClass) return t;
    }
    for (const auto& [a, b] : descriptor_.mock.affinity) {
      if (t == a || t == b) return t;
    }
  }
  return std::nullopt;
}

bool MockBackend::in_domain(const RgbImage& image, std::string_view prompt) const {
  if (!image.annotation) return true;
  const auto tokens = word_tokens(prompt);
  for (const auto& role : descriptor_.mock.domain_roles) {
    auto it = image.annotation->tags.find(role);
    if (it == image.annotation->tags.end()) continue;
    for (const auto& w : word_tokens(it->second)) {
      if (std::find(tokens.begin(), tokens.end(), w) == tokens.end()) return false;
    }
  }
  return true;
}

double MockBackend::base_logit(std::string_view pixel_class, std::string_view prompt_class) const {
  const auto& m = descriptor_.mock;
  if (pixel_class == prompt_class) return m.match_logit;
  for (const auto& [a, b] : m.affinity) {
    if ((a == pixel_class && b == prompt_class) || (b == pixel_class && a == prompt_class)) {
      return m.related_logit;
    }
  }
  return m.other_logit;
}

LogitMap MockBackend::segment(const RgbImage& image, std::string_view prompt) const {
  if (word_tokens(prompt).empty()) throw ValidationError("segment requires a non-empty prompt");
  if (image.empty()) throw InputError("segment: zero-sized image");
  const int w = descriptor_.seg_width;
  const int h = descriptor_.seg_height;
  const auto& m = descriptor_.mock;

  const ClassTable* classes =
      image.annotation && image.annotation->classes ? image.annotation->classes.get() : nullptr;
  const auto pclass = prompt_class(prompt, classes);
  const bool aligned = in_domain(image, prompt);
  const double gain = aligned ? 1.0 : m.domain_shift_gain;
  const double sigma = aligned ? m.seg_noise : m.domain_shift_noise;

  // Per-class base logits, looked up by label id.
  Grid<std::uint16_t> labels;
  std::vector<double> by_id;
  if (image.annotation && !image.annotation->labels.empty() && classes != nullptr) {
    labels = resize_nearest(image.annotation->labels, w, h);
    std::uint16_t max_id = 0;
    for (const auto& c : classes->classes()) max_id = std::max(max_id, c.id);
    by_id.assign(max_id + 1u, m.other_logit);
    for (const auto& c : classes->classes()) {
      by_id[c.id] = pclass && c.id != kUnknownClass ? base_logit(c.word, *pclass) : m.other_logit;
    }
  }

  const std::uint64_t stream = hash_combine(
      seed_, hash_combine(content_hash(image), fnv1a(prompt, fnv1a("segment:"))));
  LogitMap out(w, h);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double base = m.other_logit;
    if (!labels.empty()) {
      const auto id = labels.values[i];
      base = id < by_id.size() ? by_id[id] : m.other_logit;
    }
    out.values[i] = static_cast<float>(gain * base + sigma * counter_normal(stream, i));
  }
  return out;
}

}  // namespace peace
