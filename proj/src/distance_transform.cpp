#include "sdot/distance_transform.hpp"

#include <algorithm>

#include "sdot/parallel.hpp"

namespace sdot {

namespace {

// 1D squared distance transform along positions x_q = q*w, in place via scratch.
void dt_line(double* f, std::int64_t n, std::int64_t stride, double w, std::vector<std::int64_t>& v, std::vector<double>& z,
             std::vector<double>& scratch) {
  auto fat = [&](std::int64_t q) -> double& { return f[q * stride]; };
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::int64_t k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  const double w2 = w * w;
  for (std::int64_t q = 1; q < n; ++q) {
    double s;
    while (true) {
      const std::int64_t p = v[static_cast<std::size_t>(k)];
      // parabola intersection in position units, x_q = w q
      s = ((fat(q) + w2 * q * q) - (fat(p) + w2 * p * p)) / (2.0 * w * (q - p));
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < w * q) ++k;
    const std::int64_t p = v[static_cast<std::size_t>(k)];
    const double d = w * (q - p);
    scratch[static_cast<std::size_t>(q)] = std::min(kBigDistance, d * d + fat(p));
  }
  for (std::int64_t q = 0; q < n; ++q) fat(q) = scratch[static_cast<std::size_t>(q)];
}

}  // namespace

std::vector<double> squared_edt(const Grid& grid, const std::vector<std::uint8_t>& feature, int n_threads) {
  const std::int64_t npix = grid.num_pixels();
  if (static_cast<std::int64_t>(feature.size()) != npix) throw std::invalid_argument("squared_edt: mask size mismatch");
  std::vector<double> f(static_cast<std::size_t>(npix));
  for (std::int64_t p = 0; p < npix; ++p) f[static_cast<std::size_t>(p)] = feature[static_cast<std::size_t>(p)] ? 0.0 : kBigDistance;

  const int n = grid.dim();
  for (int axis = 0; axis < n; ++axis) {
    const std::int64_t len = grid.res[static_cast<std::size_t>(axis)];
    if (len == 1) continue;
    const std::int64_t stride = grid.stride(axis);
    const std::int64_t n_lines = npix / len;
    const double w = grid.width(axis);
    run_chunks(n_lines, n_threads, [&, axis](std::int64_t line) {
      // base index of this line: expand `line` over the axes other than `axis`
      std::int64_t rem = line, base = 0;
      for (int d = n - 1; d >= 0; --d) {
        if (d == axis) continue;
        const std::int64_t r = grid.res[static_cast<std::size_t>(d)];
        base += (rem % r) * grid.stride(d);
        rem /= r;
      }
      std::vector<std::int64_t> v(static_cast<std::size_t>(len));
      std::vector<double> z(static_cast<std::size_t>(len) + 1), scratch(static_cast<std::size_t>(len));
      dt_line(f.data() + base, len, stride, w, v, z, scratch);
    });
  }
  return f;
}

}  // namespace sdot
