#include "sdot/newton.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdot {

std::string SolveTrace::to_table() const {
  std::ostringstream os;
  os << "iter\tresidual\tstep\tmin_mass\n";
  os.precision(17);
  for (std::size_t k = 0; k < iterations.size(); ++k) {
    const auto& it = iterations[k];
    os << k << "\t" << it.residual_l1 << "\t" << it.step << "\t" << it.min_mass << "\n";
  }
  return os.str();
}

DualVector voronoi_dual(const CostModel& model, const SiteSet& sites) {
  DualVector psi(sites.size());
  if (model.family == CostFamily::InnerProduct) {
    // <x,y_i> - psi_i ranks like -|x-y_i|^2/2 exactly when psi_i = |y_i|^2/2
    for (int i = 0; i < sites.size(); ++i) psi[i] = 0.5 * norm2_sq(sites.site(i));
  }
  psi.canonicalize();
  return psi;
}

namespace {

double residual_l1(std::span<const double> g, std::span<const double> lambda) {
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) r += std::abs(g[i] - lambda[i]);
  return r;
}

double min_of(std::span<const double> v) {
  double m = v[0];
  for (double x : v) m = std::min(m, x);
  return m;
}

// Newton direction from L delta = r with L = -DG, solved on the reduced
// system (last coordinate pinned to zero) and re-projected to zero sum.
DualVector newton_direction(const DGMatrix& dg, std::span<const double> g, std::span<const double> lambda) {
  const int N = dg.n;
  Eigen::MatrixXd L(N - 1, N - 1);
  for (int i = 0; i < N - 1; ++i)
    for (int j = 0; j < N - 1; ++j) L(i, j) = -dg.at(i, j);
  Eigen::VectorXd r(N - 1);
  for (int i = 0; i < N - 1; ++i) r(i) = g[static_cast<std::size_t>(i)] - lambda[static_cast<std::size_t>(i)];

  Eigen::VectorXd d;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd Lj = L;
    if (jitter > 0.0)
      for (int i = 0; i < N - 1; ++i) Lj(i, i) += jitter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Lj);
    d = ldlt.solve(r);
    if (ldlt.info() == Eigen::Success && d.allFinite()) break;
    jitter = (jitter == 0.0) ? 1e-12 * std::max(1.0, L.trace()) : jitter * 1e3;
  }

  DualVector delta(N);
  for (int i = 0; i < N - 1; ++i) delta[i] = d(i);
  delta[N - 1] = 0.0;
  delta.canonicalize();
  return delta;
}

}  // namespace

PinnedNewtonResult pinned_newton(const std::vector<int>& active, const std::vector<double>& lambda_active,
                                 const GriddedMeasure& mu, const CostModel& model, const SiteSet& sites,
                                 const NewtonOptions& opts) {
  const int N = sites.size();
  const int A = static_cast<int>(active.size());
  if (A == 0 || A >= N) throw std::invalid_argument("pinned_newton: active set must be a proper nonempty subset");
  if (static_cast<int>(lambda_active.size()) != A) throw std::invalid_argument("pinned_newton: target size mismatch");
  for (int k : active)
    if (k < 0 || k >= N) throw std::invalid_argument("pinned_newton: active index out of range");

  DualVector psi(N);
  if (opts.initial) {
    psi = *opts.initial;
    // level the pinned coordinates and move their common value to zero
    double level = 0.0;
    int pinned_count = 0;
    std::vector<bool> is_active(static_cast<std::size_t>(N), false);
    for (int k : active) is_active[static_cast<std::size_t>(k)] = true;
    for (int i = 0; i < N; ++i)
      if (!is_active[static_cast<std::size_t>(i)]) {
        level += psi[i];
        ++pinned_count;
      }
    level /= pinned_count;
    for (int i = 0; i < N; ++i) {
      psi[i] -= level;
      if (!is_active[static_cast<std::size_t>(i)]) psi[i] = 0.0;
    }
  }

  auto residual_a = [&](const std::vector<double>& g) {
    double r = 0.0;
    for (int k = 0; k < A; ++k) r += std::abs(g[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])] - lambda_active[static_cast<std::size_t>(k)]);
    return r;
  };

  CellPartition part = rasterize_cells(psi, mu, model, sites, opts.n_threads);
  double res = residual_a(part.masses);

  PinnedNewtonResult out;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (res <= opts.tol) {
      out.converged = true;
      break;
    }
    const DGMatrix dg = dg_interface(part, mu, model, sites, opts.n_threads);
    Eigen::MatrixXd L(A, A);
    Eigen::VectorXd r(A);
    for (int a = 0; a < A; ++a) {
      r(a) = part.masses[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] - lambda_active[static_cast<std::size_t>(a)];
      for (int b = 0; b < A; ++b) L(a, b) = -dg.at(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
    }
    Eigen::VectorXd d;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::MatrixXd Lj = L;
      if (jitter > 0.0)
        for (int a = 0; a < A; ++a) Lj(a, a) += jitter;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Lj);
      d = ldlt.solve(r);
      if (ldlt.info() == Eigen::Success && d.allFinite()) break;
      jitter = (jitter == 0.0) ? 1e-12 * std::max(1.0, L.trace()) : jitter * 1e3;
    }

    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < opts.max_halvings; ++half, t *= 0.5) {
      DualVector trial = psi;
      for (int a = 0; a < A; ++a) trial[active[static_cast<std::size_t>(a)]] += t * d(a);
      CellPartition trial_part = rasterize_cells(trial, mu, model, sites, opts.n_threads);
      // rasterize_cells canonicalizes internally; keep the pinned-level frame
      const double trial_res = residual_a(trial_part.masses);
      if (trial_res < res) {
        psi = std::move(trial);
        part = std::move(trial_part);
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (res <= opts.tol) out.converged = true;
  out.psi = psi;
  out.masses = part.masses;
  return out;
}

NewtonResult damped_newton(const std::vector<double>& lambda, const GriddedMeasure& mu, const CostModel& model,
                           const SiteSet& sites, const NewtonOptions& opts) {
  const int N = sites.size();
  if (static_cast<int>(lambda.size()) != N) throw std::invalid_argument("damped_newton: target size mismatch");
  const double total = neumaier_sum(lambda);
  if (std::abs(total - 1.0) > 1e-8) throw std::invalid_argument("damped_newton: target mass vector does not sum to 1");
  const double min_lambda = min_of(lambda);
  if (!(min_lambda > 0.0)) throw std::invalid_argument("damped_newton: target outside the open simplex");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("damped_newton: tolerance must be positive");

  if (N == 1) {
    NewtonResult single;
    single.psi = DualVector(1);
    single.trace.converged = true;
    single.trace.iterations.push_back({single.psi, 0.0, 0.0, 1.0});
    return single;
  }

  DualVector psi = opts.initial ? opts.initial->canonical() : voronoi_dual(model, sites);
  CellPartition part = rasterize_cells(psi, mu, model, sites, opts.n_threads);

  // Grow starved cells before Newton; each pass lowers the dual of any cell
  // below a few pixels of mass, with a doubling step.
  {
    double bump = 4.0 * mu.grid().pixel_diameter() * universal_constants(model, sites, mu.grid().box, mu.rho_sup()).c_grad;
    const double floor = std::min(min_lambda, 4.0 * part.max_pixel_mass);
    for (int pass = 0; pass < 48 && min_of(part.masses) < floor; ++pass) {
      for (int i = 0; i < N; ++i)
        if (part.masses[static_cast<std::size_t>(i)] < floor) psi[i] -= bump;
      psi.canonicalize();
      part = rasterize_cells(psi, mu, model, sites, opts.n_threads);
      bump *= 1.5;
    }
  }

  const double guard = 0.5 * std::min(min_lambda, min_of(part.masses));
  double res = residual_l1(part.masses, lambda);

  NewtonResult out;
  out.trace.iterations.push_back({psi, res, 0.0, min_of(part.masses)});

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (res <= opts.tol) {
      out.trace.converged = true;
      break;
    }
    const DGMatrix dg = dg_interface(part, mu, model, sites, opts.n_threads);
    const DualVector delta = newton_direction(dg, part.masses, lambda);

    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < opts.max_halvings; ++half, t *= 0.5) {
      DualVector trial = psi;
      for (int i = 0; i < N; ++i) trial[i] += t * delta[i];
      trial.canonicalize();
      CellPartition trial_part = rasterize_cells(trial, mu, model, sites, opts.n_threads);
      const double trial_res = residual_l1(trial_part.masses, lambda);
      if (trial_res < res && min_of(trial_part.masses) >= guard) {
        psi = std::move(trial);
        part = std::move(trial_part);
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stalled on the quadrature staircase
    out.trace.iterations.push_back({psi, res, t, min_of(part.masses)});
  }
  if (res <= opts.tol) out.trace.converged = true;
  out.psi = std::move(psi);
  return out;
}

}  // namespace sdot
