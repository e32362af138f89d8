#include <cmath>

#include "doctest.h"
#include "sdot/experiments.hpp"
#include "sdot/spectral.hpp"
#include "test_helpers.hpp"

using namespace sdot;
using sdot::testing::random_sites;
using sdot::testing::unit_square_grid;

namespace {

// DG matrix of a weighted undirected graph: off-diagonals are the weights,
// diagonals the negated row sums
DGMatrix graph_dg(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  DGMatrix dg;
  dg.n = n;
  dg.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& [i, j, w] : edges) {
    dg.at(i, j) += w;
    dg.at(j, i) += w;
  }
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row += dg.at(i, j);
    dg.at(i, i) = -row;
  }
  return dg;
}

UniversalConstants unit_constants() {
  UniversalConstants uc;
  uc.eps_tw = 1.0;
  uc.c_grad = 1.0;
  uc.bd_area = 4.0;
  uc.rho_sup = 1.0;
  return uc;
}

}  // namespace

TEST_CASE("two-vertex Laplacian spectrum") {
  const double w = 0.37;
  const auto dg = graph_dg(2, {{0, 1, w}});
  const auto spec = laplacian_spectrum(dg);
  CHECK(spec[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spec[1] == doctest::Approx(2.0 * w).epsilon(1e-12));
}

TEST_CASE("path-graph spectrum and the Mohar floor") {
  const auto dg = graph_dg(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto spec = laplacian_spectrum(dg);
  REQUIRE(spec.size() == 3);
  CHECK(spec[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spec[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec[2] == doctest::Approx(3.0).epsilon(1e-12));

  // unit-weight path on 3 vertices: lambda_2 = 1 >= 4 / (3 * 2)
  const auto rep = better_bound_check(dg, 0.1, 1.0, 1.0, unit_constants());
  CHECK(rep.threshold_connected);
  CHECK(rep.threshold_diameter == 2);
  CHECK(rep.thresholded_fiedler == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.mohar_bound == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rep.mohar_holds);
}

TEST_CASE("two-vertex Mohar clause concerns the unit-weight graph") {
  // raw weight 0.2 gives lambda_2(-DG) = 0.4, but the thresholded unit graph
  // still satisfies lambda_2 = 2 >= 4 / (2 * 1)
  const auto dg = graph_dg(2, {{0, 1, 0.2}});
  const auto rep = better_bound_check(dg, 1e-4, 1.0, 1.0, unit_constants());
  CHECK(rep.fiedler_value == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(rep.thresholded_fiedler == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(rep.mohar_bound == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.mohar_holds);
}

TEST_CASE("disconnected threshold graph has a degenerate second eigenvalue") {
  const auto dg = graph_dg(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  const auto spec = laplacian_spectrum(dg);
  CHECK(spec[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spec[1] == doctest::Approx(0.0).epsilon(1e-12));  // kernel multiplicity 2

  const auto tg = threshold_connectivity(dg, 0.1, 1.0, 1.0, unit_constants());
  CHECK(!tg.connected);
  CHECK(tg.diameter == -1);
}

TEST_CASE("edge addition does not decrease the Fiedler value") {
  CounterRng rng(157);
  auto edges = std::vector<std::tuple<int, int, double>>{{0, 1, 0.5}, {1, 2, 0.8}, {2, 3, 0.3}, {3, 4, 0.9}, {4, 0, 0.2}};
  const auto base = laplacian_spectrum(graph_dg(5, edges));
  for (int rep = 0; rep < 10; ++rep) {
    auto more = edges;
    const int i = static_cast<int>(rng.next_below(5));
    int j = static_cast<int>(rng.next_below(5));
    if (i == j) j = (j + 1) % 5;
    more.push_back({i, j, rng.uniform(0.0, 1.0)});
    const auto spec = laplacian_spectrum(graph_dg(5, more));
    CHECK(spec[1] >= base[1] - 1e-12);
  }
}

TEST_CASE("eigenvalues scale linearly with the weights") {
  auto edges = std::vector<std::tuple<int, int, double>>{{0, 1, 0.5}, {1, 2, 0.8}, {2, 3, 0.3}, {0, 3, 0.4}};
  const auto base = laplacian_spectrum(graph_dg(4, edges));
  const double s = 3.7;
  auto scaled = edges;
  for (auto& [i, j, w] : scaled) w *= s;
  const auto spec = laplacian_spectrum(graph_dg(4, scaled));
  for (int k = 0; k < 4; ++k)
    CHECK(spec[static_cast<std::size_t>(k)] == doctest::Approx(s * base[static_cast<std::size_t>(k)]).epsilon(1e-10));
}

TEST_CASE("asymmetric input is rejected") {
  DGMatrix bad;
  bad.n = 2;
  bad.entries = {-1.0, 1.0, 0.5, -0.5};
  CHECK_THROWS(laplacian_spectrum(bad));
}

TEST_CASE("threshold connectivity on the symmetric four-site square") {
  CostModel quad(CostFamily::QuadraticDistance, 2);
  SiteSet square = SiteSet::from_points({{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}});
  GriddedMeasure mu = GriddedMeasure::uniform(unit_square_grid(256));
  const auto uc = universal_constants(quad, square, mu.grid().box, mu.rho_sup());
  const auto dg = dg_interface(DualVector(4), mu, quad, square);

  const auto part = rasterize_cells(DualVector(4), mu, quad, square);
  const double eps = *std::min_element(part.masses.begin(), part.masses.end()) - part.mass_threshold();
  const auto tg = threshold_connectivity(dg, eps, 2.0, 1.0, uc);
  CHECK(tg.connected);
  CHECK(tg.diameter <= 2);

  // the threshold vanishes with eps and keeps every positive edge
  const auto loose = threshold_connectivity(dg, 0.0, 2.0, 1.0, uc);
  CHECK(loose.tau == 0.0);
  std::size_t positive = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (dg.at(i, j) > 0.0) ++positive;
  CHECK(loose.edges.size() == positive);

  const auto rep = better_bound_check(dg, eps, 2.0, 1.0, uc);
  CHECK(rep.fiedler_value > 1e-10);
  CHECK(rep.mohar_holds);
  CHECK(rep.bound_value > 0.0);
}
