#pragma once

#include <cstdint>
#include <string>

#include "sdot/cost.hpp"
#include "sdot/measure.hpp"

namespace sdot {

// Per-pixel Laguerre-cell labels plus the induced mass vector G(psi) and
// per-cell Lebesgue volumes, all from midpoint quadrature.
struct CellPartition {
  Grid grid;
  int n_sites = 0;
  std::vector<std::uint16_t> labels;  // row-major, one site index per pixel
  std::vector<double> masses;         // G^i(psi)
  std::vector<double> lebesgue;       // L(Lag_i)
  double max_pixel_mass = 0.0;

  // Rasterization cannot certify masses below a few pixels.
  double mass_threshold() const { return 3.0 * max_pixel_mass; }
  bool effectively_empty(int i) const { return masses[static_cast<std::size_t>(i)] <= mass_threshold(); }
};

// Labels each pixel center with the argmax of -c(x, y_i) - psi^i (ties to the
// smallest index) and accumulates masses. The reduction runs over fixed pixel
// chunks combined in chunk order, so results are identical for any thread count.
CellPartition rasterize_cells(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                              int n_threads = 1);

double mass_of(const CellPartition& partition, int i);

// G(psi) as a bare vector.
std::vector<double> g_map(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                          int n_threads = 1);

// mu(Lag_i(psi_1) cap Lag_j(psi_2)).
double intersection_mass(const CellPartition& p1, const CellPartition& p2, int i, int j, const GriddedMeasure& mu);

// All pairs at once, row-major N x N.
std::vector<double> intersection_mass_matrix(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu,
                                             int n_threads = 1);

// Radius of the largest ball around a cell pixel center avoiding both other
// cells and the domain boundary.
double inradius(const CellPartition& partition, int i, int n_threads = 1);

// Exact diameter of the cell's pixel-center set (convex hull based in 2D).
double diameter(const CellPartition& partition, int i);

// psi^{c*} sampled at every pixel center.
std::vector<double> c_star_field(const CostModel& model, const SiteSet& sites, const Grid& grid, const DualVector& psi,
                                 int n_threads = 1);

// Pseudo c-transform over the pixels where the density is positive.
DualVector pseudo_c_transform(const CostModel& model, const SiteSet& sites, const GriddedMeasure& mu,
                              std::span<const double> phi_values);

// Binary label export: magic "SDOTLABL", u32 version=1, u32 dim, dim x u32
// resolution, then u16 row-major labels.
void export_labels(const CellPartition& partition, const std::string& path);

}  // namespace sdot
