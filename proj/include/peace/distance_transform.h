#pragma once

#include <cstdint>

#include "peace/grid.h"

namespace peace {

/// Exact Euclidean distance (pixels) from every pixel to the nearest zero
/// pixel; zero pixels get 0. When `border_is_background` is set, the ring
/// just outside the grid counts as zero.
Grid<double> euclidean_distance_transform(const Grid<std::uint8_t>& foreground, bool border_is_background = true);

}  // namespace peace
