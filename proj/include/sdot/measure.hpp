#pragma once

#include <string>

#include "sdot/grid.hpp"

namespace sdot {

// The source measure mu = rho dx sampled at pixel centers and normalized so
// the midpoint quadrature of the total mass is exactly one.
class GriddedMeasure {
 public:
  GriddedMeasure() = default;
  GriddedMeasure(Grid grid, std::vector<double> density);

  static GriddedMeasure uniform(Grid grid);
  // Product Gaussian truncated to the box, then renormalized.
  static GriddedMeasure gaussian(Grid grid, const std::vector<double>& mean, const std::vector<double>& sigma);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  double density_at(std::int64_t flat) const { return density_[static_cast<std::size_t>(flat)]; }
  double pixel_volume() const { return grid_.pixel_volume(); }
  double pixel_mass(std::int64_t flat) const { return density_at(flat) * pixel_volume(); }
  double max_pixel_mass() const { return rho_sup_ * pixel_volume(); }
  double rho_sup() const { return rho_sup_; }
  double total_mass() const;  // Neumaier-summed; 1 within 1e-12 by construction

  // Binary density file: magic "SDOTDENS", u32 version=1, u32 dim, dim x u32
  // resolution, dim x (f64 lower, f64 upper), then res^dim f64 row-major.
  static GriddedMeasure load_density_file(const std::string& path);
  void save_density_file(const std::string& path) const;

 private:
  void normalize();

  Grid grid_;
  std::vector<double> density_;
  double rho_sup_ = 0.0;
};

}  // namespace sdot
