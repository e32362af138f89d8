#include "sdot/storage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sdot {

HyperrectangleFee::HyperrectangleFee(std::vector<double> a, std::vector<double> b) : lower(std::move(a)), upper(std::move(b)) {
  if (lower.size() != upper.size() || lower.empty()) throw std::invalid_argument("fee: bound size mismatch");
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw std::invalid_argument("fee: lower bound exceeds upper bound");
    sa += lower[i];
    sb += upper[i];
  }
  if (sa > 1.0 + 1e-12 || sb < 1.0 - 1e-12) throw std::invalid_argument("fee: box does not meet the simplex");
}

bool HyperrectangleFee::contains(std::span<const double> lambda, double tol) const {
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lambda[i] < lower[i] - tol || lambda[i] > upper[i] + tol) return false;
  return true;
}

std::vector<double> project_simplex(std::span<const double> v, double floor_value) {
  const int n = static_cast<int>(v.size());
  const double mass = 1.0 - floor_value * n;
  if (mass < 0.0) throw std::invalid_argument("project_simplex: floor too large");
  // sort-based projection of (v - floor) onto the scaled simplex
  std::vector<double> u(v.begin(), v.end());
  for (double& x : u) x -= floor_value;
  std::vector<double> s = u;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    cum += s[static_cast<std::size_t>(i)];
    const double t = (cum - mass) / (i + 1);
    if (s[static_cast<std::size_t>(i)] - t > 0.0) {
      theta = t;
      k = i + 1;
    }
  }
  (void)k;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, u[static_cast<std::size_t>(i)] - theta) + floor_value;
  return out;
}

std::vector<double> project_box_simplex(std::span<const double> v, const HyperrectangleFee& fee) {
  std::vector<double> x(v.begin(), v.end());
  const int n = static_cast<int>(x.size());
  // the simplex constraint makes 0 an effective lower bound
  auto lo_of = [&](int i) { return std::max(fee.lower[static_cast<std::size_t>(i)], 0.0); };
  for (int iter = 0; iter < 500; ++iter) {
    for (int i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] = std::clamp(x[static_cast<std::size_t>(i)], lo_of(i), fee.upper[static_cast<std::size_t>(i)]);
    // hyperplane shift restricted to coordinates free to move toward the deficit
    const double deficit = 1.0 - neumaier_sum(x);
    if (std::abs(deficit) <= 1e-13) return x;
    double shifted = deficit;
    for (int pass = 0; pass < 200 && std::abs(shifted) > 1e-15; ++pass) {
      // direction fixed per pass so rounding cannot flip it mid-distribution
      const bool up = shifted > 0.0;
      int free_count = 0;
      for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        if ((up && xi < fee.upper[static_cast<std::size_t>(i)] - 1e-18) || (!up && xi > lo_of(i) + 1e-18)) ++free_count;
      }
      if (free_count == 0) break;
      const double per = shifted / free_count;
      for (int i = 0; i < n; ++i) {
        double& xi = x[static_cast<std::size_t>(i)];
        const double lo = lo_of(i), hi = fee.upper[static_cast<std::size_t>(i)];
        if (up && xi < hi - 1e-18) {
          const double add = std::min(per, hi - xi);
          xi += add;
          shifted -= add;
        } else if (!up && xi > lo + 1e-18) {
          const double sub = std::min(-per, xi - lo);
          xi -= sub;
          shifted += sub;
        }
      }
      if (up != (shifted > 0.0)) break;  // crossed zero within rounding
    }
    if (std::abs(1.0 - neumaier_sum(x)) <= 1e-12) return x;
  }
  if (std::abs(1.0 - neumaier_sum(x)) > 1e-9)
    throw std::runtime_error("project_box_simplex: alternating projections did not close the mass constraint");
  return x;
}

double primal_transport_cost(const CellPartition& partition, const GriddedMeasure& mu, const CostModel& model,
                             const SiteSet& sites) {
  const Grid& grid = partition.grid;
  const double pixvol = grid.pixel_volume();
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  double total = 0.0;
  for (std::int64_t p = 0; p < grid.num_pixels(); ++p) {
    const double m = mu.density_at(p) * pixvol;
    if (m == 0.0) continue;
    grid.center(p, x);
    total += m * cost_value(model, sites, x, partition.labels[static_cast<std::size_t>(p)]);
  }
  return total;
}

WeightDual dual_for_weights(std::span<const double> lambda, const GriddedMeasure& mu, const CostModel& model,
                            const SiteSet& sites, double zero_tol, const NewtonOptions& opts) {
  const int N = sites.size();
  if (static_cast<int>(lambda.size()) != N) throw std::invalid_argument("dual_for_weights: size mismatch");
  std::vector<int> support;
  double carried = 0.0;
  for (int i = 0; i < N; ++i) {
    if (lambda[static_cast<std::size_t>(i)] > zero_tol)
      support.push_back(i);
    else
      carried += lambda[static_cast<std::size_t>(i)];
  }
  if (support.empty()) throw std::invalid_argument("dual_for_weights: no positive weights");

  if (static_cast<int>(support.size()) == N) {
    std::vector<double> lam(lambda.begin(), lambda.end());
    const double total = neumaier_sum(lam);
    for (double& v : lam) v /= total;
    NewtonResult res = damped_newton(lam, mu, model, sites, opts);
    return {res.psi, res.trace.converged};
  }

  // solve on the positive support, spreading any sub-threshold dust
  std::vector<double> coords;
  std::vector<double> lam_r;
  for (int k : support) {
    const auto y = sites.site(k);
    coords.insert(coords.end(), y.begin(), y.end());
    lam_r.push_back(lambda[static_cast<std::size_t>(k)] + carried / support.size());
  }
  {
    const double total = neumaier_sum(lam_r);
    for (double& v : lam_r) v /= total;
  }
  SiteSet reduced(sites.dim(), std::move(coords));
  NewtonOptions ropts = opts;
  ropts.initial.reset();  // support changed, warm starts do not transfer
  NewtonResult res = damped_newton(lam_r, mu, model, reduced, ropts);

  // empty sites get the tight consistent dual value
  const auto phi = c_star_field(model, reduced, mu.grid(), res.psi, opts.n_threads);
  const DualVector extension = pseudo_c_transform(model, sites, mu, phi);
  DualVector psi(N);
  for (int k = 0; k < static_cast<int>(support.size()); ++k) psi[support[static_cast<std::size_t>(k)]] = res.psi[k];
  for (int i = 0; i < N; ++i)
    if (lambda[static_cast<std::size_t>(i)] <= zero_tol) psi[i] = extension[i];
  psi.canonicalize();
  return {psi, res.trace.converged};
}

// Feasible point maximizing <psi, lambda>: start every coordinate at its
// lower bound and fill toward upper bounds in decreasing dual order.
static std::vector<double> greedy_vertex(const DualVector& psi, const HyperrectangleFee& fee) {
  const int n = fee.size();
  std::vector<double> lam(static_cast<std::size_t>(n));
  double remaining = 1.0;
  for (int i = 0; i < n; ++i) {
    lam[static_cast<std::size_t>(i)] = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0);
    remaining -= lam[static_cast<std::size_t>(i)];
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (psi[a] != psi[b]) return psi[a] > psi[b];
    return a < b;
  });
  for (int i : order) {
    if (remaining <= 0.0) break;
    const double add = std::min(fee.upper[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(i)], remaining);
    lam[static_cast<std::size_t>(i)] += add;
    remaining -= add;
  }
  return lam;
}

StorageSolution solve_storage_fee(const HyperrectangleFee& fee, const GriddedMeasure& mu, const CostModel& model,
                                  const SiteSet& sites, const StorageOptions& opts) {
  const int N = sites.size();
  if (fee.size() != N) throw std::invalid_argument("solve_storage_fee: fee size mismatch");

  // inner solves cannot certify masses below a few pixels
  const double clamp = std::max(opts.clamp, 4.0 * mu.max_pixel_mass());
  const double active_tol = std::max(clamp * 2.0, 3.0 * mu.max_pixel_mass());
  NewtonOptions newton = opts.newton;
  newton.tol = std::max(newton.tol, static_cast<double>(N) * mu.max_pixel_mass());

  std::vector<double> lambda = project_box_simplex(std::vector<double>(static_cast<std::size_t>(N), 1.0 / N), fee);

  struct Candidate {
    std::vector<double> lambda;
    DualVector psi;
    double cost = std::numeric_limits<double>::infinity();
    double kkt = std::numeric_limits<double>::infinity();
    bool converged = false;
  };

  DualVector warm = voronoi_dual(model, sites);
  auto evaluate = [&](const std::vector<double>& lam) {
    newton.initial = warm;
    const WeightDual inner = dual_for_weights(lam, mu, model, sites, clamp, newton);
    warm = inner.psi;
    const CellPartition part = rasterize_cells(inner.psi, mu, model, sites, newton.n_threads);
    Candidate c;
    c.lambda = lam;
    c.psi = inner.psi;
    c.cost = primal_transport_cost(part, mu, model, sites);
    StorageSolution probe;
    probe.psi = inner.psi;
    probe.lambda = lam;
    c.kkt = verify_storage_optimality(probe, fee, active_tol);
    c.converged = inner.converged;
    return c;
  };

  Candidate best;
  // smaller subdifferential residual wins; cost breaks near-ties
  auto consider = [&](Candidate c) {
    if (!std::isfinite(best.kkt)) {
      best = std::move(c);
      return;
    }
    const double band = 1.3 * std::min(c.kkt, best.kkt) + 1e-9;
    if (c.kkt <= band && best.kkt <= band) {
      if (c.cost < best.cost) best = std::move(c);
    } else if (c.kkt < best.kkt) {
      best = std::move(c);
    }
  };

  const double step0 = opts.step0 > 0.0 ? opts.step0 : 0.5 / N;
  std::vector<std::vector<double>> seen_vertices;
  int stable = 0;
  int outer = 0;
  for (; outer < opts.max_outer; ++outer) {
    Candidate here = evaluate(lambda);
    const DualVector psi_here = here.psi;
    consider(std::move(here));

    // the subdifferential condition makes the optimum a maximizer of
    // <psi, lambda> over the feasible polytope: test that vertex directly
    const auto vertex = greedy_vertex(psi_here, fee);
    const bool fresh = std::find(seen_vertices.begin(), seen_vertices.end(), vertex) == seen_vertices.end();
    if (fresh) {
      seen_vertices.push_back(vertex);
      consider(evaluate(vertex));
      stable = 0;
    } else if (vertex == seen_vertices.back()) {
      ++stable;
    } else {
      std::swap(*std::find(seen_vertices.begin(), seen_vertices.end(), vertex), seen_vertices.back());
      stable = 0;
    }
    if (stable >= 8 && outer >= 12) {
      ++outer;
      break;
    }

    // normalized projected subgradient step along psi
    const double span = std::max(norm_linf(psi_here.values), 1e-12);
    const double t = step0 / std::sqrt(static_cast<double>(outer) + 1.0);
    std::vector<double> moved(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
      moved[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)] + t * psi_here[i] / span;
    std::vector<double> next = project_box_simplex(moved, fee);

    double change = 0.0;
    for (int i = 0; i < N; ++i) change += std::abs(next[static_cast<std::size_t>(i)] - lambda[static_cast<std::size_t>(i)]);
    lambda = std::move(next);
    if ((change == 0.0 && outer >= 3) || (change <= opts.tol && outer >= 16)) {
      ++outer;
      break;
    }
  }
  double best_cost = best.cost;

  // snap near-active coordinates exactly onto their bounds; kept only when
  // the objective does not degrade beyond the clamp-induced noise
  {
    const double snap_tol = 0.05 / N + 4.0 * clamp;
    std::vector<double> snapped = best.lambda;
    double moved = 0.0;
    int pinned = 0;
    for (int i = 0; i < N; ++i) {
      double& x = snapped[static_cast<std::size_t>(i)];
      const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
      if (std::abs(x - lo) <= snap_tol) {
        moved += std::abs(x - lo);
        x = lo;
        ++pinned;
      } else if (std::abs(x - hi) <= snap_tol) {
        moved += std::abs(x - hi);
        x = hi;
        ++pinned;
      }
    }
    if (pinned > 0 && moved > 0.0) {
      // close the mass constraint over the free coordinates
      double deficit = 1.0 - neumaier_sum(snapped);
      if (N - pinned > 0) {
        const double per = deficit / (N - pinned);
        for (int i = 0; i < N; ++i) {
          double& x = snapped[static_cast<std::size_t>(i)];
          const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
          if (x != lo && x != hi) x = std::clamp(x + per, lo, hi);
        }
        deficit = 1.0 - neumaier_sum(snapped);
      }
      if (std::abs(deficit) <= 1e-12 && fee.contains(snapped, 0.0)) {
        newton.initial = warm;
        const WeightDual inner = dual_for_weights(snapped, mu, model, sites, clamp, newton);
        const CellPartition part = rasterize_cells(inner.psi, mu, model, sites, newton.n_threads);
        const double cost = primal_transport_cost(part, mu, model, sites);
        const double slack = moved * norm_l1(inner.psi.values) + 10.0 * clamp * (1.0 + norm_linf(inner.psi.values));
        if (cost <= best_cost + slack) {
          best_cost = cost;
          best.lambda = std::move(snapped);
          warm = inner.psi;
        }
      }
    }
  }

  // active-set refinement: pin bound-active coordinates exactly and level the
  // dual across the rest, re-classifying until the signs agree
  StorageSolution out;
  out.lambda = best.lambda;
  bool refined = false;
  {
    const double window = std::max(active_tol, 0.02 / N);
    std::vector<int> at_upper(static_cast<std::size_t>(N), 0), at_lower(static_cast<std::size_t>(N), 0);
    for (int i = 0; i < N; ++i) {
      const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
      const double x = out.lambda[static_cast<std::size_t>(i)];
      if (x >= hi - window) at_upper[static_cast<std::size_t>(i)] = 1;
      else if (x <= lo + window) at_lower[static_cast<std::size_t>(i)] = 1;
    }
    for (int pass = 0; pass < 2 * N + 4 && !refined; ++pass) {
      std::vector<int> active;
      std::vector<double> lam_active;
      std::vector<int> free_set;
      for (int i = 0; i < N; ++i) {
        const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
        if (at_upper[static_cast<std::size_t>(i)]) {
          active.push_back(i);
          lam_active.push_back(hi);
        } else if (at_lower[static_cast<std::size_t>(i)]) {
          active.push_back(i);
          lam_active.push_back(lo);
        } else {
          free_set.push_back(i);
        }
      }
      if (free_set.empty()) break;  // vertex solutions are already exact
      if (neumaier_sum(lam_active) > 1.0 + 1e-12) break;

      // zero-mass active coordinates leave the solve entirely; their dual
      // comes back from the pseudo c-transform of the solved potential
      std::vector<int> kept;  // original indices participating in the solve
      std::vector<int> zero_active;
      for (int i = 0; i < N; ++i) {
        const bool zero = at_lower[static_cast<std::size_t>(i)] && std::max(fee.lower[static_cast<std::size_t>(i)], 0.0) == 0.0;
        if (zero)
          zero_active.push_back(i);
        else
          kept.push_back(i);
      }
      if (kept.empty()) break;

      DualVector psi_ref(N);
      if (static_cast<int>(zero_active.size()) == 0) {
        if (active.empty()) {
          // box inactive: the transport optimum equalizes every dual
        } else {
          NewtonOptions popts = newton;
          popts.initial = warm;
          const auto pinned = pinned_newton(active, lam_active, mu, model, sites, popts);
          psi_ref = pinned.psi;
        }
      } else {
        std::vector<double> coords;
        std::vector<int> kept_active;
        std::vector<double> kept_lam;
        std::vector<int> pos(static_cast<std::size_t>(N), -1);
        for (int k = 0; k < static_cast<int>(kept.size()); ++k) {
          const int i = kept[static_cast<std::size_t>(k)];
          pos[static_cast<std::size_t>(i)] = k;
          const auto y = sites.site(i);
          coords.insert(coords.end(), y.begin(), y.end());
        }
        for (int k = 0; k < static_cast<int>(active.size()); ++k) {
          const int i = active[static_cast<std::size_t>(k)];
          if (pos[static_cast<std::size_t>(i)] >= 0) {
            kept_active.push_back(pos[static_cast<std::size_t>(i)]);
            kept_lam.push_back(lam_active[static_cast<std::size_t>(k)]);
          }
        }
        SiteSet reduced(sites.dim(), std::move(coords));
        DualVector psi_red(static_cast<int>(kept.size()));
        if (!kept_active.empty()) {
          NewtonOptions popts = newton;
          DualVector warm_red(static_cast<int>(kept.size()));
          for (int k = 0; k < static_cast<int>(kept.size()); ++k) warm_red[k] = warm[kept[static_cast<std::size_t>(k)]];
          popts.initial = warm_red;
          if (static_cast<int>(kept_active.size()) == static_cast<int>(kept.size())) break;
          const auto pinned = pinned_newton(kept_active, kept_lam, mu, model, reduced, popts);
          psi_red = pinned.psi;
        }
        // the potential evaluation canonicalizes, so move psi_red into the
        // canonical frame first to keep the extension consistent
        psi_red.canonicalize();
        const auto phi = c_star_field(model, reduced, mu.grid(), psi_red, newton.n_threads);
        const DualVector extension = pseudo_c_transform(model, sites, mu, phi);
        for (int k = 0; k < static_cast<int>(kept.size()); ++k) psi_ref[kept[static_cast<std::size_t>(k)]] = psi_red[k];
        for (int i : zero_active) psi_ref[i] = extension[i];
        // restore the frame: the reduced solve's free level sits at the
        // reduced canonicalization, realign so free coordinates average zero
        double level = 0.0;
        for (int i : free_set) level += psi_ref[i];
        level /= static_cast<double>(free_set.size());
        for (int i = 0; i < N; ++i) psi_ref[i] -= level;
      }
      const auto full_part = rasterize_cells(psi_ref, mu, model, sites, newton.n_threads);
      const std::vector<double>& masses = full_part.masses;

      // free coordinates must stay inside their intervals
      bool reclassified = false;
      for (int i : free_set) {
        const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
        if (masses[static_cast<std::size_t>(i)] > hi) {
          at_upper[static_cast<std::size_t>(i)] = 1;
          reclassified = true;
        } else if (masses[static_cast<std::size_t>(i)] < lo) {
          at_lower[static_cast<std::size_t>(i)] = 1;
          reclassified = true;
        }
      }
      if (reclassified) continue;

      // bound multipliers must have the right sign: the free level is zero
      const double sign_slack = 1e-4 * (1.0 + norm_linf(psi_ref.values));
      for (int i = 0; i < N; ++i) {
        if (at_upper[static_cast<std::size_t>(i)] && psi_ref[i] < -sign_slack) {
          at_upper[static_cast<std::size_t>(i)] = 0;
          reclassified = true;
        } else if (at_lower[static_cast<std::size_t>(i)] && psi_ref[i] > sign_slack) {
          at_lower[static_cast<std::size_t>(i)] = 0;
          reclassified = true;
        }
      }
      if (reclassified) continue;

      // assemble: bounds exact, free coordinates at their achieved masses
      std::vector<double> lam(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) {
        const double lo = std::max(fee.lower[static_cast<std::size_t>(i)], 0.0), hi = fee.upper[static_cast<std::size_t>(i)];
        lam[static_cast<std::size_t>(i)] = at_upper[static_cast<std::size_t>(i)] ? hi
                                           : at_lower[static_cast<std::size_t>(i)] ? lo
                                                                                   : masses[static_cast<std::size_t>(i)];
      }
      const double gap = 1.0 - neumaier_sum(lam);
      for (int i : free_set) lam[static_cast<std::size_t>(i)] += gap / free_set.size();
      if (!fee.contains(lam, 1e-12)) break;

      out.lambda = std::move(lam);
      out.psi = psi_ref.canonical();
      warm = out.psi;
      refined = true;
    }
  }

  if (refined) {
    const CellPartition part = rasterize_cells(out.psi, mu, model, sites, newton.n_threads);
    out.transport_cost = primal_transport_cost(part, mu, model, sites);
    out.inner_converged = true;
  } else {
    newton.initial = warm;
    const WeightDual inner = dual_for_weights(out.lambda, mu, model, sites, clamp, newton);
    out.psi = inner.psi;
    out.inner_converged = inner.converged;
    const CellPartition part = rasterize_cells(inner.psi, mu, model, sites, newton.n_threads);
    out.transport_cost = primal_transport_cost(part, mu, model, sites);
  }
  out.outer_iterations = outer;
  out.kkt_residual = verify_storage_optimality(out, fee, active_tol);
  return out;
}

double verify_storage_optimality(const StorageSolution& sol, const HyperrectangleFee& fee, double active_tol) {
  const int N = fee.size();
  if (sol.psi.size() != N || static_cast<int>(sol.lambda.size()) != N)
    throw std::invalid_argument("verify_storage_optimality: size mismatch");
  if (!fee.contains(sol.lambda, active_tol)) throw std::invalid_argument("verify_storage_optimality: weights outside the fee box");

  // classify each coordinate against its interval
  enum class Side { Free, AtLower, AtUpper, Pinned };
  std::vector<Side> side(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double lo = fee.lower[static_cast<std::size_t>(i)], hi = fee.upper[static_cast<std::size_t>(i)];
    const double x = sol.lambda[static_cast<std::size_t>(i)];
    const bool at_lo = x <= lo + active_tol, at_hi = x >= hi - active_tol;
    side[static_cast<std::size_t>(i)] = at_lo && at_hi ? Side::Pinned : at_lo ? Side::AtLower : at_hi ? Side::AtUpper : Side::Free;
  }

  auto violation = [&](double t) {
    double v = 0.0;
    for (int i = 0; i < N; ++i) {
      const double p = sol.psi[i];
      switch (side[static_cast<std::size_t>(i)]) {
        case Side::Free: v += std::abs(p - t); break;
        case Side::AtUpper: v += std::max(0.0, t - p); break;
        case Side::AtLower: v += std::max(0.0, p - t); break;
        case Side::Pinned: break;
      }
    }
    return v;
  };

  // piecewise-linear in t; the minimum sits at one of the psi values
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) best = std::min(best, violation(sol.psi[i]));
  best = std::min(best, violation(0.0));
  return best;
}

}  // namespace sdot
