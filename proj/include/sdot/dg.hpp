#pragma once

#include "sdot/partition.hpp"

namespace sdot {

// Symmetric N x N matrix of D_i G^j. Off-diagonals are nonnegative interface
// weights; each diagonal is the negated sum of its row's off-diagonals, so
// -DG is a weighted graph Laplacian.
struct DGMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }

  // w_ij = -DG_ij = D_i G^j for i != j.
  double weight(int i, int j) const { return at(i, j); }

  double max_row_sum_abs() const;
  double max_asymmetry() const;
};

// Interface-integral representation: D_i G^j = integral over Lag_i cap Lag_j
// of rho / |grad c(x,y_i) - grad c(x,y_j)| dH^{n-1}. Each pixel face between
// labels i and j contributes its area projected onto the interface plane
// (unit normal (y_i - y_j)/|y_i - y_j|, exact for both families) times the
// face-averaged density over |y_i - y_j|.
DGMatrix dg_interface(const CellPartition& partition, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                      int n_threads = 1);

DGMatrix dg_interface(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                      int n_threads = 1);

// Central-difference oracle for DG; columns are projected to zero sum. Warns
// on stderr when the step is below the rasterization noise floor.
DGMatrix dg_finite_difference(const DualVector& psi, const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                              double step, int n_threads = 1);

// Default probe size: 4 x pixel diameter x minimum site separation.
double default_fd_step(const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites);

}  // namespace sdot
