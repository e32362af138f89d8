#include "sdot/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>

namespace sdot {

std::vector<double> laplacian_spectrum(const DGMatrix& dg) {
  const int N = dg.n;
  double scale = 0.0;
  for (double v : dg.entries) scale = std::max(scale, std::abs(v));
  if (dg.max_asymmetry() > 1e-8 * std::max(1.0, scale))
    throw std::invalid_argument("laplacian_spectrum: matrix asymmetric beyond tolerance");
  Eigen::MatrixXd L(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) L(i, j) = -0.5 * (dg.at(i, j) + dg.at(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("laplacian_spectrum: eigensolver failed");
  std::vector<double> out(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Bfs {
  bool connected;
  int diameter;  // -1 when disconnected
};

Bfs bfs_diameter(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 0) return {false, -1};
  int diameter = 0;
  for (int s = 0; s < n; ++s) {
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::deque<int> q{s};
    dist[static_cast<std::size_t>(s)] = 0;
    int reached = 1, far = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      far = std::max(far, dist[static_cast<std::size_t>(v)]);
      for (int w : adj[static_cast<std::size_t>(v)])
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          q.push_back(w);
          ++reached;
        }
    }
    if (reached < n) return {false, -1};
    diameter = std::max(diameter, far);
  }
  return {true, diameter};
}

}  // namespace

ThresholdGraph threshold_connectivity(const DGMatrix& dg, double eps, double q, double c_pw, const UniversalConstants& uc) {
  if (!(q >= 1.0)) throw std::invalid_argument("threshold_connectivity: q must be >= 1");
  if (!(c_pw > 0.0)) throw std::invalid_argument("threshold_connectivity: C_PW must be positive");
  const int N = dg.n;
  ThresholdGraph g;
  g.tau = std::pow(2.0, 1.0 - 1.0 / q) * std::pow(std::max(eps, 0.0), 1.0 / q) / (uc.c_grad * N * N * c_pw);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (dg.weight(i, j) >= g.tau && dg.weight(i, j) > 0.0) {
        g.edges.emplace_back(i, j);
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
      }
  const auto bfs = bfs_diameter(N, adj);
  g.connected = bfs.connected;
  g.diameter = bfs.diameter;
  return g;
}

SpectralReport better_bound_check(const DGMatrix& dg, double eps, double q, double c_pw, const UniversalConstants& uc) {
  const int N = dg.n;
  SpectralReport rep;
  rep.eps = eps;
  rep.q = q;
  rep.c_pw = c_pw;
  rep.eigenvalues = laplacian_spectrum(dg);
  rep.fiedler_value = N >= 2 ? rep.eigenvalues[1] : 0.0;

  const auto tg = threshold_connectivity(dg, eps, q, c_pw, uc);
  rep.tau = tg.tau;
  rep.threshold_connected = tg.connected;
  rep.threshold_diameter = tg.diameter;

  rep.bound_value = std::pow(2.0, 3.0 - 1.0 / q) * std::pow(std::max(eps, 0.0), 1.0 / q) /
                    (uc.c_grad * std::pow(static_cast<double>(N), 4) * c_pw);
  const auto holds_up_to_rounding = [](double value, double floor_value) {
    return value >= floor_value - 1e-10 * std::max(1.0, std::abs(floor_value));
  };
  rep.bound_holds = holds_up_to_rounding(rep.fiedler_value, rep.bound_value);

  // Mohar floor for the unit-weight thresholded graph, checkable without C_PW
  if (tg.connected && N >= 2) {
    DGMatrix unit;
    unit.n = N;
    unit.entries.assign(static_cast<std::size_t>(N) * N, 0.0);
    for (const auto& [i, j] : tg.edges) {
      unit.at(i, j) = 1.0;
      unit.at(j, i) = 1.0;
    }
    for (int i = 0; i < N; ++i) {
      double row = 0.0;
      for (int j = 0; j < N; ++j)
        if (j != i) row += unit.at(i, j);
      unit.at(i, i) = -row;
    }
    const auto spec = laplacian_spectrum(unit);
    rep.thresholded_fiedler = spec[1];
    rep.mohar_bound = 4.0 / (static_cast<double>(N) * std::max(1, tg.diameter));
    rep.mohar_holds = holds_up_to_rounding(rep.thresholded_fiedler, rep.mohar_bound);
  }
  return rep;
}

}  // namespace sdot
