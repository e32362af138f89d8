#pragma once

#include <optional>
#include <string>

#include "sdot/dg.hpp"

namespace sdot {

struct SolveIteration {
  DualVector psi;
  double residual_l1 = 0.0;
  double step = 0.0;  // accepted damping factor (0 for the initial point)
  double min_mass = 0.0;
};

struct SolveTrace {
  std::vector<SolveIteration> iterations;
  bool converged = false;

  int newton_steps() const { return static_cast<int>(iterations.size()) - 1; }
  double final_residual() const { return iterations.empty() ? 0.0 : iterations.back().residual_l1; }
  // One row per iteration: residual, step size, min cell mass.
  std::string to_table() const;
};

struct NewtonResult {
  DualVector psi;
  SolveTrace trace;
};

struct NewtonOptions {
  double tol = 1e-5;  // l1 mass residual
  int max_iter = 50;
  int max_halvings = 50;
  int n_threads = 1;
  std::optional<DualVector> initial;  // warm start; defaults to a Voronoi-inducing dual
};

// Dual vector whose cells form the Voronoi diagram of the sites (zero for the
// quadratic family, -|y_i|^2/2 for the inner-product family), canonicalized.
DualVector voronoi_dual(const CostModel& model, const SiteSet& sites);

// Damped Newton for G(psi) = lambda on the zero-sum hyperplane. The Newton
// step solves the reduced (N-1)-system with the last coordinate pinned, then
// re-projects; step halving requires a residual decrease while cell masses
// stay above half of min(min lambda, min G(psi0)).
NewtonResult damped_newton(const std::vector<double>& lambda_target, const GriddedMeasure& mu, const CostModel& model,
                           const SiteSet& sites, const NewtonOptions& opts = {});

// Damped Newton with equality constraints on a subset: solves
// G_i(psi) = lambda_active[k] for the active coordinates while psi stays at a
// common level (zero) on the rest, whose masses land where that level puts
// them. The grounded Jacobian block is positive definite, so no projection.
struct PinnedNewtonResult {
  DualVector psi;
  std::vector<double> masses;
  bool converged = false;
};

PinnedNewtonResult pinned_newton(const std::vector<int>& active, const std::vector<double>& lambda_active,
                                 const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                                 const NewtonOptions& opts = {});

}  // namespace sdot
