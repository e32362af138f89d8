#include <cmath>

#include "doctest.h"
#include "sdot/experiments.hpp"
#include "sdot/storage.hpp"
#include "test_helpers.hpp"

using namespace sdot;

TEST_CASE("fee validation") {
  CHECK_THROWS(HyperrectangleFee({0.5, 0.2}, {0.4, 0.6}));              // lower > upper
  CHECK_THROWS(HyperrectangleFee({0.7, 0.7}, {0.9, 0.9}));              // sum of lower bounds > 1
  CHECK_THROWS(HyperrectangleFee({0.0, 0.0}, {0.3, 0.3}));              // sum of upper bounds < 1
  CHECK_THROWS(HyperrectangleFee({0.0}, {0.5, 0.5}));                   // size mismatch
  CHECK_NOTHROW(HyperrectangleFee({0.1, 0.1}, {0.8, 0.8}));
}

TEST_CASE("projections onto the simplex and the feasible polytope") {
  const std::vector<double> v{0.9, 0.4, -0.2};
  const auto p = project_simplex(v);
  CHECK(neumaier_sum(p) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : p) CHECK(x >= 0.0);

  const auto pf = project_simplex(v, 0.05);
  CHECK(neumaier_sum(pf) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : pf) CHECK(x >= 0.05 - 1e-15);

  // projection is the identity on feasible points
  HyperrectangleFee fee({0.0, 0.0, 0.0}, {0.5, 0.5, 0.5});
  const std::vector<double> feasible{0.3, 0.3, 0.4};
  const auto q = project_box_simplex(feasible, fee);
  for (int i = 0; i < 3; ++i) CHECK(q[static_cast<std::size_t>(i)] == doctest::Approx(feasible[static_cast<std::size_t>(i)]).epsilon(1e-12));

  const auto r = project_box_simplex(std::vector<double>{1.2, -0.3, 0.05}, fee);
  CHECK(std::abs(neumaier_sum(r) - 1.0) <= 1e-12);
  CHECK(fee.contains(r, 1e-12));
}

TEST_CASE("degenerate box pins the weights") {
  Problem prob = sharp_example_problem(4, 512);
  const std::vector<double> target{0.1, 0.2, 0.3, 0.4};
  HyperrectangleFee fee(target, target);
  StorageOptions opts;
  opts.max_outer = 40;
  const auto sol = solve_storage_fee(fee, prob.mu, prob.model, prob.sites, opts);
  for (int i = 0; i < 4; ++i) CHECK(sol.lambda[static_cast<std::size_t>(i)] == doctest::Approx(target[static_cast<std::size_t>(i)]).epsilon(1e-12));
  // every coordinate pinned: the subdifferential cone is all of R^N
  CHECK(sol.kkt_residual == doctest::Approx(0.0));
  // the dual must reproduce the pinned weights
  const auto g = g_map(sol.psi, prob.mu, prob.model, prob.sites);
  for (int i = 0; i < 4; ++i) CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx(target[static_cast<std::size_t>(i)]).epsilon(0.02));
}

TEST_CASE("sharp-example enlarged fee recovers the displayed optimum") {
  const int N = 4;
  Problem prob = sharp_example_problem(N, 1024);
  std::vector<double> zeros(N, 0.0), caps(N, 0.25);
  auto caps2 = caps;
  caps2[N - 1] = 0.5;
  const auto sol = solve_storage_fee(HyperrectangleFee(zeros, caps2), prob.mu, prob.model, prob.sites);

  CHECK(sol.lambda[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.lambda[1] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(sol.lambda[2] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(sol.lambda[3] == doctest::Approx(0.5).epsilon(1e-9));

  const double err = linf_mod_constants(sol.psi.values, sharp_example_enlarged_dual(N).values);
  CHECK(err <= 5e-3);
  CHECK(sol.kkt_residual <= 1e-6);
}

TEST_CASE("subdifferential residual arithmetic") {
  // interior coordinates demand equal duals
  HyperrectangleFee fee({0.0, 0.0}, {0.6, 0.6});
  StorageSolution sol;
  sol.lambda = {0.5, 0.5};
  sol.psi = DualVector(std::vector<double>{0.3, 0.3});
  CHECK(verify_storage_optimality(sol, fee, 1e-9) == doctest::Approx(0.0));
  const double delta = 0.05;
  sol.psi = DualVector(std::vector<double>{0.3, 0.3 + delta});
  CHECK(verify_storage_optimality(sol, fee, 1e-9) == doctest::Approx(delta));

  // upper-bound coordinates allow any dual above the level
  StorageSolution at_caps;
  at_caps.lambda = {0.25, 0.75};
  at_caps.psi = DualVector(std::vector<double>{-1.0, 3.0});
  HyperrectangleFee caps({0.0, 0.0}, {0.25, 0.75});
  CHECK(verify_storage_optimality(at_caps, caps, 1e-9) == doctest::Approx(0.0));

  CHECK_THROWS(verify_storage_optimality(sol, caps, 1e-9));  // weights off the box
}

TEST_CASE("returned weights beat random feasible competitors") {
  const int N = 4;
  Problem prob = sharp_example_problem(N, 512);
  CounterRng rng(109);
  std::vector<double> zeros(N, 0.0), caps(N);
  do {
    for (int i = 0; i < N; ++i) caps[static_cast<std::size_t>(i)] = rng.uniform(0.7, 1.5) / N;
  } while (neumaier_sum(caps) < 1.05);
  HyperrectangleFee fee(zeros, caps);
  StorageOptions opts;
  const auto sol = solve_storage_fee(fee, prob.mu, prob.model, prob.sites, opts);

  NewtonOptions nopts;
  const double clamp = std::max(opts.clamp, 4.0 * prob.mu.max_pixel_mass());
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> cand(N);
    for (double& v : cand) v = rng.uniform(0.0, 1.0);
    const double tot = neumaier_sum(cand);
    for (double& v : cand) v /= tot;
    cand = project_box_simplex(cand, fee);
    const auto dual = dual_for_weights(cand, prob.mu, prob.model, prob.sites, clamp, nopts);
    const auto part = rasterize_cells(dual.psi, prob.mu, prob.model, prob.sites);
    const double cost = primal_transport_cost(part, prob.mu, prob.model, prob.sites);
    CHECK(sol.transport_cost <= cost + 1e-4);
  }
}

TEST_CASE("two-box stability bound") {
  // |lambda_1 - lambda_2|_1 <= 2 (|a_1 - a_2|_1 + |b_1 - b_2|_1)
  const int N = 4;
  Problem prob = sharp_example_problem(N, 512);
  CounterRng rng(113);
  StorageOptions opts;
  opts.max_outer = 200;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<double> a1(N, 0.0), a2(N, 0.0), b1(N), b2(N);
    do {
      for (int i = 0; i < N; ++i) b1[static_cast<std::size_t>(i)] = rng.uniform(0.8 / N, 1.8 / N);
    } while (neumaier_sum(b1) < 1.05);
    do {
      for (int i = 0; i < N; ++i) b2[static_cast<std::size_t>(i)] = rng.uniform(0.8 / N, 1.8 / N);
    } while (neumaier_sum(b2) < 1.05);
    const auto s1 = solve_storage_fee(HyperrectangleFee(a1, b1), prob.mu, prob.model, prob.sites, opts);
    const auto s2 = solve_storage_fee(HyperrectangleFee(a2, b2), prob.mu, prob.model, prob.sites, opts);
    double move = 0.0, fee_gap = 0.0;
    for (int i = 0; i < N; ++i) {
      move += std::abs(s1.lambda[static_cast<std::size_t>(i)] - s2.lambda[static_cast<std::size_t>(i)]);
      fee_gap += std::abs(b1[static_cast<std::size_t>(i)] - b2[static_cast<std::size_t>(i)]);
    }
    CHECK(move <= 2.0 * fee_gap + 1e-3);
  }
}

TEST_CASE("unconstrained box minimizes against a simplex lattice") {
  // fee [0,1]^3 imposes nothing: compare the solver's objective with a brute
  // lattice scan of the transport cost
  const int N = 3;
  Problem prob = sharp_example_problem(N, 512);
  std::vector<double> zeros(N, 0.0), ones(N, 1.0);
  StorageOptions opts;
  opts.max_outer = 300;
  const auto sol = solve_storage_fee(HyperrectangleFee(zeros, ones), prob.mu, prob.model, prob.sites, opts);

  NewtonOptions nopts;
  const int steps = 64;
  const double clamp = std::max(opts.clamp, 4.0 * prob.mu.max_pixel_mass());
  double lattice_best = 1e300;
  DualVector warm = voronoi_dual(prob.model, prob.sites);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps - i; ++j) {
      const int k = steps - i - j;
      std::vector<double> lam{static_cast<double>(i) / steps, static_cast<double>(j) / steps, static_cast<double>(k) / steps};
      for (double& v : lam) v = std::max(v, clamp);
      const double tot = neumaier_sum(lam);
      for (double& v : lam) v /= tot;
      nopts.initial = warm;
      const auto inner = damped_newton(lam, prob.mu, prob.model, prob.sites, nopts);
      warm = inner.psi;
      const auto part = rasterize_cells(inner.psi, prob.mu, prob.model, prob.sites);
      lattice_best = std::min(lattice_best, primal_transport_cost(part, prob.mu, prob.model, prob.sites));
    }
  CHECK(sol.transport_cost <= lattice_best + 5e-3);
}
