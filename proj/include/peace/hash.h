#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace peace {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

/// FNV-1a, 64-bit. Stable across platforms; used for seeding only.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t h = kFnvOffset) {
  for (std::uint8_t c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

/// Standard normal sample addressed by (stream, index). Order independent,
/// so parallel or reordered evaluation yields identical values. Draws from a
/// 2^16-point quantile table of the normal distribution.
double counter_normal(std::uint64_t stream, std::uint64_t index);

}  // namespace peace
