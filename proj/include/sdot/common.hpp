#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdot {

using Point = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(std::span<const double> a) { return dot(a, a); }
inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(dist_sq(a, b));
}

inline double norm_l1(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

inline double norm_linf(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

// Neumaier compensated summation; used wherever a tolerance of 1e-12 on a
// quarter-million-term sum actually matters.
inline double neumaier_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Volume of the unit ball in R^j.
inline double unit_ball_volume(int j) {
  return std::pow(std::numbers::pi, j / 2.0) / std::tgamma(j / 2.0 + 1.0);
}

// Axis-aligned box domain.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
      throw std::invalid_argument("box: lower/upper dimension mismatch");
    for (std::size_t d = 0; d < lower.size(); ++d)
      if (!(lower[d] < upper[d])) throw std::invalid_argument("box: degenerate extent on axis " + std::to_string(d));
  }

  int dim() const { return static_cast<int>(lower.size()); }
  double extent(int d) const { return upper[d] - lower[d]; }

  double volume() const {
    double v = 1.0;
    for (int d = 0; d < dim(); ++d) v *= extent(d);
    return v;
  }

  double diameter() const {
    double s = 0.0;
    for (int d = 0; d < dim(); ++d) s += extent(d) * extent(d);
    return std::sqrt(s);
  }

  // H^{n-1} measure of the boundary: 2 for an interval, perimeter for a
  // rectangle, surface area for a cuboid.
  double boundary_area() const {
    const int n = dim();
    if (n == 1) return 2.0;
    double total = 0.0;
    for (int d = 0; d < n; ++d) {
      double face = 1.0;
      for (int e = 0; e < n; ++e)
        if (e != d) face *= extent(e);
      total += 2.0 * face;
    }
    return total;
  }

  bool contains(std::span<const double> x) const {
    for (int d = 0; d < dim(); ++d)
      if (x[d] < lower[d] || x[d] > upper[d]) return false;
    return true;
  }

  bool operator==(const Box& o) const { return lower == o.lower && upper == o.upper; }
};

}  // namespace sdot
