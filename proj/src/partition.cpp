#include "sdot/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sdot/distance_transform.hpp"
#include "sdot/parallel.hpp"

namespace sdot {

namespace {

// Both families reduce to maximizing <x, y_i> + b_i over i: the quadratic
// family's common -|x|^2/2 term cancels in comparisons.
std::vector<double> affine_offsets(const CostModel& model, const SiteSet& sites, const DualVector& psi) {
  std::vector<double> b(static_cast<std::size_t>(sites.size()));
  for (int i = 0; i < sites.size(); ++i) {
    b[static_cast<std::size_t>(i)] = -psi[i];
    if (model.family == CostFamily::QuadraticDistance) b[static_cast<std::size_t>(i)] -= 0.5 * norm2_sq(sites.site(i));
  }
  return b;
}

void check_inputs(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites) {
  if (psi.size() != sites.size()) throw std::invalid_argument("rasterize_cells: dual vector size mismatch");
  if (sites.dim() != model.dimension || mu.grid().dim() != model.dimension)
    throw std::invalid_argument("rasterize_cells: dimension mismatch");
  if (sites.size() > 65535) throw std::invalid_argument("rasterize_cells: too many sites for 16-bit labels");
}

// Lines run along the last axis; a chunk is one line.
struct LineLayout {
  std::int64_t n_lines;
  std::int64_t line_len;
};

LineLayout line_layout(const Grid& grid) {
  const std::int64_t len = grid.res[static_cast<std::size_t>(grid.dim() - 1)];
  return {grid.num_pixels() / len, len};
}

// Fills per-site scores at the first pixel of a line and the per-pixel step.
void line_scores(const Grid& grid, const SiteSet& sites, const std::vector<double>& offsets, std::int64_t line,
                 std::vector<double>& score, std::vector<double>& step) {
  const int n = grid.dim();
  const int last = n - 1;
  std::vector<double> x(static_cast<std::size_t>(n));
  grid.center(line * grid.res[static_cast<std::size_t>(last)], x);
  const double h = grid.width(last);
  for (int i = 0; i < sites.size(); ++i) {
    const auto y = sites.site(i);
    score[static_cast<std::size_t>(i)] = dot(x, y) + offsets[static_cast<std::size_t>(i)];
    step[static_cast<std::size_t>(i)] = h * y[static_cast<std::size_t>(last)];
  }
}

}  // namespace

CellPartition rasterize_cells(const DualVector& psi_in, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                              int n_threads) {
  check_inputs(psi_in, mu, model, sites);
  const DualVector psi = psi_in.canonical();
  const Grid& grid = mu.grid();
  const int N = sites.size();
  const auto offsets = affine_offsets(model, sites, psi);
  const auto [n_lines, line_len] = line_layout(grid);

  CellPartition part;
  part.grid = grid;
  part.n_sites = N;
  part.labels.assign(static_cast<std::size_t>(grid.num_pixels()), 0);
  part.max_pixel_mass = mu.max_pixel_mass();

  // Per-line partial reductions, combined in line order afterwards.
  std::vector<double> mass_partial(static_cast<std::size_t>(n_lines) * N, 0.0);
  std::vector<std::int64_t> count_partial(static_cast<std::size_t>(n_lines) * N, 0);

  const double pixvol = grid.pixel_volume();
  run_chunks(n_lines, n_threads, [&](std::int64_t line) {
    std::vector<double> score(static_cast<std::size_t>(N)), step(static_cast<std::size_t>(N));
    line_scores(grid, sites, offsets, line, score, step);
    const std::int64_t base = line * line_len;
    double* pmass = mass_partial.data() + static_cast<std::size_t>(line) * N;
    std::int64_t* pcount = count_partial.data() + static_cast<std::size_t>(line) * N;
    for (std::int64_t k = 0; k < line_len; ++k) {
      int arg = 0;
      double best = score[0];
      for (int i = 1; i < N; ++i) {
        if (score[static_cast<std::size_t>(i)] > best) {
          best = score[static_cast<std::size_t>(i)];
          arg = i;
        }
      }
      part.labels[static_cast<std::size_t>(base + k)] = static_cast<std::uint16_t>(arg);
      pmass[arg] += mu.density_at(base + k) * pixvol;
      pcount[arg] += 1;
      for (int i = 0; i < N; ++i) score[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
    }
  });

  part.masses.assign(static_cast<std::size_t>(N), 0.0);
  part.lebesgue.assign(static_cast<std::size_t>(N), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(N), 0);
  for (std::int64_t line = 0; line < n_lines; ++line) {
    const double* pmass = mass_partial.data() + static_cast<std::size_t>(line) * N;
    const std::int64_t* pcount = count_partial.data() + static_cast<std::size_t>(line) * N;
    for (int i = 0; i < N; ++i) {
      part.masses[static_cast<std::size_t>(i)] += pmass[i];
      counts[static_cast<std::size_t>(i)] += pcount[i];
    }
  }
  for (int i = 0; i < N; ++i) part.lebesgue[static_cast<std::size_t>(i)] = static_cast<double>(counts[static_cast<std::size_t>(i)]) * pixvol;
  return part;
}

double mass_of(const CellPartition& partition, int i) {
  if (i < 0 || i >= partition.n_sites) throw std::out_of_range("mass_of: site index out of range");
  return partition.masses[static_cast<std::size_t>(i)];
}

std::vector<double> g_map(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                          int n_threads) {
  return rasterize_cells(psi, mu, model, sites, n_threads).masses;
}

double intersection_mass(const CellPartition& p1, const CellPartition& p2, int i, int j, const GriddedMeasure& mu) {
  if (!(p1.grid == p2.grid) || !(p1.grid == mu.grid())) throw std::invalid_argument("intersection_mass: grid mismatch");
  const std::int64_t npix = p1.grid.num_pixels();
  const double pixvol = mu.pixel_volume();
  double m = 0.0;
  for (std::int64_t p = 0; p < npix; ++p)
    if (p1.labels[static_cast<std::size_t>(p)] == i && p2.labels[static_cast<std::size_t>(p)] == j)
      m += mu.density_at(p) * pixvol;
  return m;
}

std::vector<double> intersection_mass_matrix(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu,
                                             int n_threads) {
  if (!(p1.grid == p2.grid) || !(p1.grid == mu.grid())) throw std::invalid_argument("intersection_mass_matrix: grid mismatch");
  if (p1.n_sites != p2.n_sites) throw std::invalid_argument("intersection_mass_matrix: site count mismatch");
  const int N = p1.n_sites;
  const std::int64_t npix = p1.grid.num_pixels();
  const double pixvol = mu.pixel_volume();
  const std::int64_t n_chunks = chunk_count(npix, kDefaultChunk);
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(n_chunks));
  run_chunks(n_chunks, n_threads, [&](std::int64_t c) {
    auto& m = partial[static_cast<std::size_t>(c)];
    m.assign(static_cast<std::size_t>(N) * N, 0.0);
    const auto [b, e] = chunk_range(npix, kDefaultChunk, c);
    for (std::int64_t p = b; p < e; ++p) {
      const int i = p1.labels[static_cast<std::size_t>(p)];
      const int j = p2.labels[static_cast<std::size_t>(p)];
      m[static_cast<std::size_t>(i) * N + j] += mu.density_at(p) * pixvol;
    }
  });
  std::vector<double> out(static_cast<std::size_t>(N) * N, 0.0);
  for (const auto& m : partial)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += m[k];
  return out;
}

double inradius(const CellPartition& partition, int i, int n_threads) {
  const auto& grid = partition.grid;
  const std::int64_t npix = grid.num_pixels();
  std::vector<std::uint8_t> other(static_cast<std::size_t>(npix));
  bool any_cell = false, any_other = false;
  for (std::int64_t p = 0; p < npix; ++p) {
    const bool in_cell = partition.labels[static_cast<std::size_t>(p)] == i;
    other[static_cast<std::size_t>(p)] = in_cell ? 0 : 1;
    any_cell |= in_cell;
    any_other |= !in_cell;
  }
  if (!any_cell) throw std::invalid_argument("inradius: empty cell");
  std::vector<double> edt;
  if (any_other) edt = squared_edt(grid, other, n_threads);

  const int n = grid.dim();
  std::vector<double> x(static_cast<std::size_t>(n));
  double best = 0.0;
  for (std::int64_t p = 0; p < npix; ++p) {
    if (partition.labels[static_cast<std::size_t>(p)] != i) continue;
    grid.center(p, x);
    double wall = std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d)
      wall = std::min({wall, x[static_cast<std::size_t>(d)] - grid.box.lower[static_cast<std::size_t>(d)],
                       grid.box.upper[static_cast<std::size_t>(d)] - x[static_cast<std::size_t>(d)]});
    double r = wall;
    if (any_other) r = std::min(r, std::sqrt(edt[static_cast<std::size_t>(p)]));
    best = std::max(best, r);
  }
  return best;
}

namespace {

// Andrew monotone chain over 2D points.
std::vector<std::array<double, 2>> convex_hull_2d(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[idx]) <= 0) --k;
    hull[k++] = pts[idx];
  }
  const std::size_t lower = k + 1;
  for (std::size_t idx = n - 1; idx-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[idx]) <= 0) --k;
    hull[k++] = pts[idx];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

double diameter(const CellPartition& partition, int i) {
  const auto& grid = partition.grid;
  const std::int64_t npix = grid.num_pixels();
  const int n = grid.dim();

  if (n == 1) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::int64_t p = 0; p < npix; ++p) {
      if (partition.labels[static_cast<std::size_t>(p)] != i) continue;
      const double x = grid.center_coord(0, p);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (!(lo <= hi)) throw std::invalid_argument("diameter: empty cell");
    return hi - lo;
  }

  if (n == 2) {
    std::vector<std::array<double, 2>> pts;
    const std::int64_t ry = grid.res[1];
    for (std::int64_t p = 0; p < npix; ++p) {
      if (partition.labels[static_cast<std::size_t>(p)] != i) continue;
      // boundary pixels suffice: interior pixels are never hull vertices
      const std::int64_t ix = p / ry, iy = p % ry;
      bool boundary = ix == 0 || ix == grid.res[0] - 1 || iy == 0 || iy == ry - 1;
      if (!boundary) {
        boundary = partition.labels[static_cast<std::size_t>(p - ry)] != i || partition.labels[static_cast<std::size_t>(p + ry)] != i ||
                   partition.labels[static_cast<std::size_t>(p - 1)] != i || partition.labels[static_cast<std::size_t>(p + 1)] != i;
      }
      if (boundary) pts.push_back({grid.center_coord(0, ix), grid.center_coord(1, iy)});
    }
    if (pts.empty()) throw std::invalid_argument("diameter: empty cell");
    const auto hull = convex_hull_2d(std::move(pts));
    double best = 0.0;
    for (std::size_t a = 0; a < hull.size(); ++a)
      for (std::size_t b = a + 1; b < hull.size(); ++b) {
        const double dx = hull[a][0] - hull[b][0], dy = hull[a][1] - hull[b][1];
        best = std::max(best, dx * dx + dy * dy);
      }
    return std::sqrt(best);
  }

  // n >= 3: pairwise over boundary pixels, deterministically subsampled.
  std::vector<std::vector<double>> pts;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t p = 0; p < npix; ++p) {
    if (partition.labels[static_cast<std::size_t>(p)] != i) continue;
    bool boundary = false;
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    grid.decode(p, idx);
    for (int d = 0; d < n && !boundary; ++d) {
      const std::int64_t s = grid.stride(d);
      if (idx[static_cast<std::size_t>(d)] == 0 || idx[static_cast<std::size_t>(d)] == grid.res[static_cast<std::size_t>(d)] - 1 ||
          partition.labels[static_cast<std::size_t>(p - s)] != i || partition.labels[static_cast<std::size_t>(p + s)] != i)
        boundary = true;
    }
    if (boundary) {
      grid.center(p, x);
      pts.push_back(x);
    }
  }
  if (pts.empty()) throw std::invalid_argument("diameter: empty cell");
  constexpr std::size_t cap = 2048;
  if (pts.size() > cap) {
    std::vector<std::vector<double>> sub;
    sub.reserve(cap);
    const std::size_t stride = pts.size() / cap + 1;
    for (std::size_t k = 0; k < pts.size(); k += stride) sub.push_back(pts[k]);
    pts.swap(sub);
  }
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, dist_sq(pts[a], pts[b]));
  return std::sqrt(best);
}

std::vector<double> c_star_field(const CostModel& model, const SiteSet& sites, const Grid& grid, const DualVector& psi_in,
                                 int n_threads) {
  const DualVector psi = psi_in.canonical();
  const int N = sites.size();
  const auto offsets = affine_offsets(model, sites, psi);
  const auto [n_lines, line_len] = line_layout(grid);
  std::vector<double> out(static_cast<std::size_t>(grid.num_pixels()));
  const bool quadratic = model.family == CostFamily::QuadraticDistance;
  run_chunks(n_lines, n_threads, [&](std::int64_t line) {
    std::vector<double> score(static_cast<std::size_t>(N)), step(static_cast<std::size_t>(N));
    line_scores(grid, sites, offsets, line, score, step);
    const std::int64_t base = line * line_len;
    std::vector<double> x(static_cast<std::size_t>(grid.dim()));
    for (std::int64_t k = 0; k < line_len; ++k) {
      double best = score[0];
      for (int i = 1; i < N; ++i) best = std::max(best, score[static_cast<std::size_t>(i)]);
      if (quadratic) {
        grid.center(base + k, x);
        best -= 0.5 * norm2_sq(x);
      }
      out[static_cast<std::size_t>(base + k)] = best;
      for (int i = 0; i < N; ++i) score[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
    }
  });
  return out;
}

DualVector pseudo_c_transform(const CostModel& model, const SiteSet& sites, const GriddedMeasure& mu,
                              std::span<const double> phi_values) {
  const Grid& grid = mu.grid();
  if (phi_values.size() != static_cast<std::size_t>(grid.num_pixels()))
    throw std::invalid_argument("pseudo_c_transform: field size does not match the grid");
  std::vector<double> pts;
  std::vector<double> vals;
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  for (std::int64_t p = 0; p < grid.num_pixels(); ++p) {
    if (mu.density_at(p) <= 0.0) continue;
    grid.center(p, x);
    pts.insert(pts.end(), x.begin(), x.end());
    vals.push_back(phi_values[static_cast<std::size_t>(p)]);
  }
  return pseudo_c_transform(model, sites, pts, vals);
}

void export_labels(const CellPartition& partition, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("label export: cannot write " + path);
  const char magic[8] = {'S', 'D', 'O', 'T', 'L', 'A', 'B', 'L'};
  f.write(magic, 8);
  const std::uint32_t version = 1, dim = static_cast<std::uint32_t>(partition.grid.dim());
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&dim), 4);
  for (int r : partition.grid.res) {
    const std::uint32_t v = static_cast<std::uint32_t>(r);
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  f.write(reinterpret_cast<const char*>(partition.labels.data()),
          static_cast<std::streamsize>(partition.labels.size() * sizeof(std::uint16_t)));
}

}  // namespace sdot
