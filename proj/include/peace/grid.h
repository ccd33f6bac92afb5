#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace peace {

/// Row-major 2D array. Index (x, y) with x along columns.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  T& at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return values[static_cast<std::size_t>(y) * width + x];
  }
  const T& at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return values[static_cast<std::size_t>(y) * width + x];
  }

  bool same_shape(const Grid& other) const {
    return width == other.width && height == other.height;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width == other.width && height == other.height;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace peace
