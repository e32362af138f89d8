#pragma once

#include <string>

#include "sdot/cost.hpp"
#include "sdot/partition.hpp"

namespace sdot {

struct SymmetricDifference {
  std::vector<double> per_cell;  // Delta_mu(Lag_i(psi_1), Lag_i(psi_2))
  double total = 0.0;
};

// Per-cell mu-symmetric distances from label disagreement.
SymmetricDifference symmetric_difference(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu);

// Two-sided max-min distance between the cells' pixel-center sets via two
// exact distance transforms. Throws if either cell is below the mass threshold.
double hausdorff_distance(const CellPartition& p1, const CellPartition& p2, int i, int n_threads = 1);

// Unit directions for support-function sampling: the M-th roots of unity for
// n = 2, a Fibonacci sphere for n = 3, the two signs for n = 1. Row-major.
std::vector<double> sphere_directions(int dim, int M);

// Vertices (row-major) of the exact inner-product-cost Laguerre cell
// {x in box : <x, y_i - y_j> >= psi^i - psi^j for all j}, by enumerating
// active constraint subsets (n <= 3).
std::vector<double> laguerre_cell_vertices(const CostModel& model, const SiteSet& sites, const Box& box, const DualVector& psi,
                                           int i);

double support_function(std::span<const double> vertices, int dim, std::span<const double> direction);

// max over sampled directions of |h_1 - h_2| for the exact polytope cells;
// inner-product cost only.
double hausdorff_support_function(const CostModel& model, const SiteSet& sites, const Box& box, const DualVector& psi1,
                                  const DualVector& psi2, int i, int directions = 720);

// |psi_1^{c*} - psi_2^{c*}|_{C0} over pixel centers.
double uniform_potential_distance(const CostModel& model, const SiteSet& sites, const Grid& grid, const DualVector& psi1,
                                  const DualVector& psi2, int n_threads = 1);

// One verified inequality: ratio <= 1 means the bound held. For lower-bound
// style inequalities `measured` is the theoretical side, so the convention is
// uniform. Inapplicable clauses carry the hypothesis residual instead.
struct BoundClause {
  std::string name;
  bool applicable = false;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  double hypothesis_residual = 0.0;
};

struct StabilityReport {
  int n_sites = 0;
  int dim = 0;
  double q = 0.0;
  double c_pw = 0.0;

  std::vector<double> per_cell_delta_mu;
  double total_delta_mu = 0.0;
  std::vector<double> per_cell_hausdorff;  // NaN where skipped
  double hausdorff_max = 0.0;
  double hausdorff_l2 = 0.0;  // sqrt(sum of squares) over defined cells
  double psi_l2 = 0.0;
  double psi_linf = 0.0;
  double potential_c0 = 0.0;
  double lambda_l1 = 0.0;
  double lambda_l2 = 0.0;
  bool constraint_satisfied = false;  // Cor 1.8 hypothesis held for some cell

  std::vector<BoundClause> clauses;

  const BoundClause* find(const std::string& name) const;
};

struct BoundsOptions {
  bool cell_geometry = true;      // inscribed-ball / set-difference / symmetric-difference lemmas
  bool grid_hausdorff = true;     // distance-transform Hausdorff per cell
  bool support_hausdorff = false; // exact polytope route (inner-product cost)
  int support_directions = 720;
  int n_threads = 1;
};

// Measures every stability quantity for the pair and evaluates each bound's
// right-hand side against it; clauses whose hypotheses fail are reported as
// inapplicable rather than violated.
StabilityReport evaluate_bounds(const CostModel& model, const SiteSet& sites, const GriddedMeasure& mu, const DualVector& psi1,
                                const DualVector& psi2, const CellPartition& p1, const CellPartition& p2,
                                const UniversalConstants& uc, double q, double c_pw, const BoundsOptions& opts = {});

}  // namespace sdot
