#include "sdot/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace sdot {

double ExchangeDigraph::out_degree(int i) const {
  double s = 0.0;
  for (const auto& e : edges)
    if (e.from == i) s += e.weight;
  return s;
}

double ExchangeDigraph::in_degree(int i) const {
  double s = 0.0;
  for (const auto& e : edges)
    if (e.to == i) s += e.weight;
  return s;
}

std::vector<DigraphEdge> ExchangeDigraph::near_threshold_edges() const {
  std::vector<DigraphEdge> out;
  for (const auto& e : edges)
    if (e.weight <= 2.0 * threshold) out.push_back(e);
  return out;
}

std::string ExchangeDigraph::to_edge_list() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : edges) os << e.from << " " << e.to << " " << e.weight << "\n";
  return os.str();
}

ExchangeDigraph build_digraph(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu, double threshold,
                              int n_threads) {
  const auto m = intersection_mass_matrix(p1, p2, mu, n_threads);
  const int N = p1.n_sites;
  ExchangeDigraph g;
  g.n_vertices = N;
  g.threshold = threshold;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const double w = m[static_cast<std::size_t>(i) * N + j];
      if (w > threshold) g.edges.push_back({i, j, w});
    }
  return g;
}

namespace {

std::vector<std::vector<int>> adjacency(const ExchangeDigraph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.n_vertices));
  for (const auto& e : g.edges) adj[static_cast<std::size_t>(e.from)].push_back(e.to);
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

// Kahn peeling; returns the vertices NOT peeled (empty iff acyclic) and, when
// asked, the order in which vertices were peeled (smallest index first).
std::vector<int> kahn_residual(const ExchangeDigraph& g, std::vector<int>* order_out) {
  const auto adj = adjacency(g);
  const int n = g.n_vertices;
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (const auto& e : g.edges) ++indeg[static_cast<std::size_t>(e.to)];
  // repeatedly take the smallest zero-indegree vertex
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  while (true) {
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (!done[static_cast<std::size_t>(v)] && indeg[static_cast<std::size_t>(v)] == 0) {
        pick = v;
        break;
      }
    if (pick < 0) break;
    done[static_cast<std::size_t>(pick)] = true;
    order.push_back(pick);
    for (int w : adj[static_cast<std::size_t>(pick)]) --indeg[static_cast<std::size_t>(w)];
  }
  if (order_out) *order_out = order;
  std::vector<int> residual;
  for (int v = 0; v < n; ++v)
    if (!done[static_cast<std::size_t>(v)]) residual.push_back(v);
  return residual;
}

}  // namespace

AcyclicityCheck check_acyclic(const ExchangeDigraph& g) {
  const auto residual = kahn_residual(g, nullptr);
  if (residual.empty()) return {true, std::nullopt};

  // shortest cycle through the residual subgraph, by BFS from each residual vertex
  const auto adj = adjacency(g);
  std::vector<bool> in_res(static_cast<std::size_t>(g.n_vertices), false);
  for (int v : residual) in_res[static_cast<std::size_t>(v)] = true;

  std::vector<int> best;
  for (int s : residual) {
    std::vector<int> parent(static_cast<std::size_t>(g.n_vertices), -2);
    std::deque<int> queue{s};
    parent[static_cast<std::size_t>(s)] = -1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (!in_res[static_cast<std::size_t>(w)]) continue;
        if (w == s) {
          std::vector<int> cycle{s};
          for (int u = v; u != s; u = parent[static_cast<std::size_t>(u)]) cycle.push_back(u);
          std::reverse(cycle.begin() + 1, cycle.end());
          if (best.empty() || cycle.size() < best.size()) best = cycle;
          queue.clear();
          break;
        }
        if (parent[static_cast<std::size_t>(w)] == -2) {
          parent[static_cast<std::size_t>(w)] = v;
          queue.push_back(w);
        }
      }
    }
  }
  return {false, best};
}

std::vector<int> topological_order(const ExchangeDigraph& g) {
  std::vector<int> order;
  const auto residual = kahn_residual(g, &order);
  if (!residual.empty()) throw std::invalid_argument("topological_order: graph has a cycle");
  return order;
}

SingleBoxReport verify_single_box_perturbation(const ExchangeDigraph& g, const HyperrectangleFee& fee1,
                                               const HyperrectangleFee& fee2, std::span<const double> lambda1,
                                               std::span<const double> lambda2, double symmetric_diff_total) {
  const int N = fee1.size();
  if (fee2.size() != N || g.n_vertices != N || static_cast<int>(lambda1.size()) != N || static_cast<int>(lambda2.size()) != N)
    throw std::invalid_argument("verify_single_box_perturbation: size mismatch");

  int enlarged = -1;
  for (int i = 0; i < N; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    if (fee1.lower[k] != fee2.lower[k]) throw std::invalid_argument("verify_single_box_perturbation: lower bounds differ");
    if (fee1.upper[k] != fee2.upper[k]) {
      if (fee2.upper[k] < fee1.upper[k]) throw std::invalid_argument("verify_single_box_perturbation: upper bound shrank");
      if (enlarged >= 0) throw std::invalid_argument("verify_single_box_perturbation: more than one upper bound changed");
      enlarged = i;
    }
  }
  SingleBoxReport rep;
  rep.enlarged_coordinate = enlarged;
  rep.eps = enlarged >= 0 ? fee2.upper[static_cast<std::size_t>(enlarged)] - fee1.upper[static_cast<std::size_t>(enlarged)] : 0.0;
  rep.tolerance = 3.0 * g.threshold * N;
  rep.symmetric_diff = symmetric_diff_total;

  double max_out = 0.0;
  for (int i = 0; i < N; ++i) max_out = std::max(max_out, g.out_degree(i));
  rep.max_outdegree = max_out;
  rep.outdegree_bounded = max_out <= rep.eps + rep.tolerance;

  double move = 0.0;
  for (int i = 0; i < N; ++i) move += std::abs(lambda1[static_cast<std::size_t>(i)] - lambda2[static_cast<std::size_t>(i)]);
  rep.mass_move = move;
  rep.mass_move_bounded = move <= 2.0 * rep.eps + rep.tolerance;

  rep.symmetric_diff_bounded = symmetric_diff_total <= 2.0 * N * rep.eps + rep.tolerance;

  // vertices with an incoming edge must sit at their fee1 capacity
  double cap_slack = 0.0;
  for (const auto& e : g.edges)
    cap_slack = std::max(cap_slack, fee1.upper[static_cast<std::size_t>(e.to)] - lambda1[static_cast<std::size_t>(e.to)]);
  rep.capacity_slack = cap_slack;
  rep.capacity_clause = cap_slack <= rep.tolerance;

  // non-enlarged coordinates cannot gain mass
  double mono = 0.0;
  for (int i = 0; i < N; ++i)
    if (i != enlarged) mono = std::max(mono, lambda2[static_cast<std::size_t>(i)] - lambda1[static_cast<std::size_t>(i)]);
  rep.monotone_slack = mono;
  rep.monotone_clause = mono <= rep.tolerance;

  rep.enlarged_no_outgoing = enlarged < 0 || g.out_degree(enlarged) == 0.0;

  double identity_err = 0.0;
  for (int i = 0; i < N; ++i) {
    const double lhs = lambda2[static_cast<std::size_t>(i)] - lambda1[static_cast<std::size_t>(i)];
    const double rhs = g.in_degree(i) - g.out_degree(i);
    identity_err = std::max(identity_err, std::abs(lhs - rhs));
  }
  rep.degree_identity_error = identity_err;
  rep.degree_identity = identity_err <= rep.tolerance;
  return rep;
}

}  // namespace sdot
