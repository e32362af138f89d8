#include "sdot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace sdot {

GriddedMeasure::GriddedMeasure(Grid grid, std::vector<double> density) : grid_(std::move(grid)), density_(std::move(density)) {
  if (static_cast<std::int64_t>(density_.size()) != grid_.num_pixels())
    throw std::invalid_argument("gridded measure: density size does not match the grid");
  for (double v : density_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("gridded measure: density must be finite and nonnegative");
  normalize();
}

void GriddedMeasure::normalize() {
  const double total = neumaier_sum(density_) * grid_.pixel_volume();
  if (!(total > 0.0)) throw std::invalid_argument("gridded measure: density has zero total mass");
  double sup = 0.0;
  for (double& v : density_) {
    v /= total;
    sup = std::max(sup, v);
  }
  rho_sup_ = sup;
}

double GriddedMeasure::total_mass() const { return neumaier_sum(density_) * grid_.pixel_volume(); }

GriddedMeasure GriddedMeasure::uniform(Grid grid) {
  std::vector<double> d(static_cast<std::size_t>(grid.num_pixels()), 1.0);
  return GriddedMeasure(std::move(grid), std::move(d));
}

GriddedMeasure GriddedMeasure::gaussian(Grid grid, const std::vector<double>& mean, const std::vector<double>& sigma) {
  const int n = grid.dim();
  if (static_cast<int>(mean.size()) != n || static_cast<int>(sigma.size()) != n)
    throw std::invalid_argument("gaussian density: mean/sigma dimension mismatch");
  for (double s : sigma)
    if (!(s > 0.0)) throw std::invalid_argument("gaussian density: sigma must be positive");
  const std::int64_t npix = grid.num_pixels();
  std::vector<double> d(static_cast<std::size_t>(npix));
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t p = 0; p < npix; ++p) {
    grid.center(p, x);
    double e = 0.0;
    for (int k = 0; k < n; ++k) {
      const double z = (x[static_cast<std::size_t>(k)] - mean[static_cast<std::size_t>(k)]) / sigma[static_cast<std::size_t>(k)];
      e += 0.5 * z * z;
    }
    d[static_cast<std::size_t>(p)] = std::exp(-e);
  }
  return GriddedMeasure(std::move(grid), std::move(d));
}

namespace {
constexpr char kMagic[8] = {'S', 'D', 'O', 'T', 'D', 'E', 'N', 'S'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error("density file: truncated");
  return v;
}
}  // namespace

GriddedMeasure GriddedMeasure::load_density_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("density file: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("density file: bad magic");
  const auto version = read_pod<std::uint32_t>(f);
  if (version != 1) throw std::runtime_error("density file: unsupported version " + std::to_string(version));
  const auto dim = read_pod<std::uint32_t>(f);
  if (dim < 1 || dim > 8) throw std::runtime_error("density file: implausible dimension");
  std::vector<int> res(dim);
  for (auto& r : res) r = static_cast<int>(read_pod<std::uint32_t>(f));
  std::vector<double> lo(dim), hi(dim);
  for (std::uint32_t d = 0; d < dim; ++d) {
    lo[d] = read_pod<double>(f);
    hi[d] = read_pod<double>(f);
  }
  Grid grid(Box(lo, hi), res);
  std::vector<double> density(static_cast<std::size_t>(grid.num_pixels()));
  f.read(reinterpret_cast<char*>(density.data()), static_cast<std::streamsize>(density.size() * sizeof(double)));
  if (!f) throw std::runtime_error("density file: truncated payload");
  return GriddedMeasure(std::move(grid), std::move(density));
}

void GriddedMeasure::save_density_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("density file: cannot write " + path);
  f.write(kMagic, 8);
  write_pod<std::uint32_t>(f, 1u);
  write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(grid_.dim()));
  for (int r : grid_.res) write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(r));
  for (int d = 0; d < grid_.dim(); ++d) {
    write_pod<double>(f, grid_.box.lower[static_cast<std::size_t>(d)]);
    write_pod<double>(f, grid_.box.upper[static_cast<std::size_t>(d)]);
  }
  f.write(reinterpret_cast<const char*>(density_.data()), static_cast<std::streamsize>(density_.size() * sizeof(double)));
}

}  // namespace sdot
