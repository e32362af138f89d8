#pragma once

#include <cstdint>
#include <vector>

#include "sdot/common.hpp"

namespace sdot {

// Regular pixel grid over a box. Flat indices are row-major with the last
// axis fastest, so one "line" along the last axis is contiguous.
struct Grid {
  Box box;
  std::vector<int> res;  // pixels per axis

  Grid() = default;
  Grid(Box b, std::vector<int> r) : box(std::move(b)), res(std::move(r)) {
    if (static_cast<int>(res.size()) != box.dim()) throw std::invalid_argument("grid: resolution/box dimension mismatch");
    for (int v : res)
      if (v < 1) throw std::invalid_argument("grid: resolution must be >= 1 on every axis");
  }

  int dim() const { return box.dim(); }

  std::int64_t num_pixels() const {
    std::int64_t n = 1;
    for (int v : res) n *= v;
    return n;
  }

  double width(int axis) const { return box.extent(axis) / res[axis]; }

  double pixel_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim(); ++d) v *= width(d);
    return v;
  }

  // Diameter of one pixel.
  double pixel_diameter() const {
    double s = 0.0;
    for (int d = 0; d < dim(); ++d) s += width(d) * width(d);
    return std::sqrt(s);
  }

  double center_coord(int axis, std::int64_t k) const {
    return box.lower[axis] + (static_cast<double>(k) + 0.5) * width(axis);
  }

  void decode(std::int64_t flat, std::span<std::int64_t> idx) const {
    for (int d = dim() - 1; d >= 0; --d) {
      idx[d] = flat % res[d];
      flat /= res[d];
    }
  }

  std::int64_t encode(std::span<const std::int64_t> idx) const {
    std::int64_t flat = 0;
    for (int d = 0; d < dim(); ++d) flat = flat * res[d] + idx[d];
    return flat;
  }

  void center(std::int64_t flat, std::span<double> out) const {
    for (int d = dim() - 1; d >= 0; --d) {
      out[d] = center_coord(d, flat % res[d]);
      flat /= res[d];
    }
  }

  // Stride in flat index of a unit step along `axis`.
  std::int64_t stride(int axis) const {
    std::int64_t s = 1;
    for (int d = dim() - 1; d > axis; --d) s *= res[d];
    return s;
  }

  bool operator==(const Grid& o) const { return box == o.box && res == o.res; }
};

}  // namespace sdot
