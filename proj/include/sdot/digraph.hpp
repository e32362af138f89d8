#pragma once

#include <optional>
#include <string>

#include "sdot/partition.hpp"
#include "sdot/storage.hpp"

namespace sdot {

struct DigraphEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

// Weighted digraph on the target sites; edge i -> j carries the mass
// mu(Lag_i(psi_1) cap Lag_j(psi_2)) when above the rasterization threshold.
struct ExchangeDigraph {
  int n_vertices = 0;
  std::vector<DigraphEdge> edges;
  double threshold = 0.0;

  double out_degree(int i) const;
  double in_degree(int i) const;
  // Edges within a factor 2 of the drop threshold, worth flagging in reports.
  std::vector<DigraphEdge> near_threshold_edges() const;
  // One "i j weight" row per edge.
  std::string to_edge_list() const;
};

ExchangeDigraph build_digraph(const CellPartition& p1, const CellPartition& p2, const GriddedMeasure& mu, double threshold,
                              int n_threads = 1);

struct AcyclicityCheck {
  bool acyclic = false;
  std::optional<std::vector<int>> witness_cycle;  // a minimal-length cycle if one exists
};

// Kahn peeling; on failure the witness is a shortest cycle in the residual.
AcyclicityCheck check_acyclic(const ExchangeDigraph& g);

// Kahn order with ties broken by smallest vertex index; throws on cycles.
std::vector<int> topological_order(const ExchangeDigraph& g);

// Conclusions of the single-coordinate enlargement lemmas, each with its
// measured slack so near-threshold failures are inspectable.
struct SingleBoxReport {
  int enlarged_coordinate = -1;
  double eps = 0.0;
  bool outdegree_bounded = false;  // every outdegree <= eps (+ tolerance)
  double max_outdegree = 0.0;
  bool mass_move_bounded = false;  // |lambda_1 - lambda_2|_1 <= 2 eps
  double mass_move = 0.0;
  bool symmetric_diff_bounded = false;  // sum Delta_mu <= 2 N eps
  double symmetric_diff = 0.0;
  bool capacity_clause = false;  // incoming edge => lambda_1 at its upper bound
  double capacity_slack = 0.0;
  bool monotone_clause = false;  // non-enlarged coordinates do not gain mass
  double monotone_slack = 0.0;
  bool enlarged_no_outgoing = false;
  bool degree_identity = false;  // lambda_2 - lambda_1 = indeg - outdeg
  double degree_identity_error = 0.0;
  double tolerance = 0.0;

  bool all_hold() const {
    return outdegree_bounded && mass_move_bounded && symmetric_diff_bounded && capacity_clause && monotone_clause &&
           enlarged_no_outgoing && degree_identity;
  }
};

// fee2 must enlarge exactly one upper bound of fee1; `symmetric_diff_total`
// is the measured sum of per-cell mu-symmetric differences for the pair.
SingleBoxReport verify_single_box_perturbation(const ExchangeDigraph& g, const HyperrectangleFee& fee1,
                                               const HyperrectangleFee& fee2, std::span<const double> lambda1,
                                               std::span<const double> lambda2, double symmetric_diff_total);

}  // namespace sdot
