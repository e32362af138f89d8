#pragma once

#include <cstdint>
#include <vector>

#include "sdot/grid.hpp"

namespace sdot {

// Exact squared Euclidean distance from every pixel center to the nearest
// feature pixel center (Felzenszwalb-Huttenlocher, one lower-envelope pass per
// axis, anisotropic pixel widths). Pixels far from any feature get kBigDistance.
constexpr double kBigDistance = 1e30;

std::vector<double> squared_edt(const Grid& grid, const std::vector<std::uint8_t>& feature, int n_threads = 1);

}  // namespace sdot
