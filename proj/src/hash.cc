#include "peace/hash.h"

#include <array>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace peace {
namespace {

constexpr std::size_t kTableBits = 16;
constexpr std::size_t kTableSize = std::size_t{1} << kTableBits;

const std::array<double, kTableSize>& normal_quantiles() {
  static const auto table = [] {
    std::array<double, kTableSize> t{};
    for (std::size_t k = 0; k < kTableSize; ++k) {
      const double p = (static_cast<double>(k) + 0.5) / kTableSize;
      t[k] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
    }
    return t;
  }();
  return table;
}

}  // namespace

double counter_normal(std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t r = splitmix64(hash_combine(stream, index));
  return normal_quantiles()[r >> (64 - kTableBits)];
}

}  // namespace peace
