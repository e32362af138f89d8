#pragma once

#include "sdot/newton.hpp"

namespace sdot {

// Coordinate-interval storage fee: F(lambda) = 0 on [a, b] component-wise,
// +infinity outside.
struct HyperrectangleFee {
  std::vector<double> lower;  // a
  std::vector<double> upper;  // b

  HyperrectangleFee() = default;
  HyperrectangleFee(std::vector<double> a, std::vector<double> b);

  int size() const { return static_cast<int>(lower.size()); }
  bool contains(std::span<const double> lambda, double tol = 0.0) const;
};

struct StorageSolution {
  DualVector psi;              // canonical dual at the solution weights
  std::vector<double> lambda;  // solution mass vector in Lambda cap [a, b]
  double kkt_residual = 0.0;
  double transport_cost = 0.0;
  int outer_iterations = 0;
  bool inner_converged = true;
};

struct StorageOptions {
  double tol = 1e-7;        // outer stationarity tolerance on the iterate change
  int max_outer = 400;
  double clamp = 1e-5;      // floor below which a weight counts as zero for inner solves
  double step0 = 0.0;       // initial normalized step; 0 picks 0.5/N
  NewtonOptions newton = {};
};

// Dual vector for a weight vector that may have zero coordinates: the
// positive-support problem is solved directly and the dual is extended to
// empty sites by the pseudo c-transform of the solved potential.
struct WeightDual {
  DualVector psi;
  bool converged = true;
};

WeightDual dual_for_weights(std::span<const double> lambda, const GriddedMeasure& mu, const CostModel& model,
                            const SiteSet& sites, double zero_tol, const NewtonOptions& opts);

// Euclidean projection onto the simplex with a per-coordinate floor.
std::vector<double> project_simplex(std::span<const double> v, double floor_value = 0.0);

// Alternating projections between the simplex and the box, stopped at 1e-12.
std::vector<double> project_box_simplex(std::span<const double> v, const HyperrectangleFee& fee);

// Minimizes transport cost over Lambda cap [a, b] by projected subgradient:
// the subgradient of the transport term at lambda is -psi(lambda), so each
// step moves along +psi and re-projects; steps decay as t0/sqrt(k+1).
StorageSolution solve_storage_fee(const HyperrectangleFee& fee, const GriddedMeasure& mu, const CostModel& model,
                                  const SiteSet& sites, const StorageOptions& opts = {});

// Subdifferential residual of psi in dF(lambda) restricted to the simplex:
// min over the scalar t of the summed cone violations (interior coordinates
// need psi^i = t, upper-bound ones allow psi^i >= t, lower-bound psi^i <= t).
double verify_storage_optimality(const StorageSolution& sol, const HyperrectangleFee& fee, double active_tol);

// Transport cost of the labeled partition: sum of c(x, y_label) dmu.
double primal_transport_cost(const CellPartition& partition, const GriddedMeasure& mu, const CostModel& model,
                             const SiteSet& sites);

}  // namespace sdot
