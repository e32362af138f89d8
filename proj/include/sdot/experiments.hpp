#pragma once

#include <string>

#include "json.hpp"
#include "sdot/config.hpp"
#include "sdot/digraph.hpp"
#include "sdot/spectral.hpp"
#include "sdot/stability.hpp"

namespace sdot {

// Process exit codes shared by the CLI and the test drivers.
enum ExitCode : int {
  kExitOk = 0,
  kExitBoundViolation = 2,
  kExitSolverFailure = 3,
  kExitConfigError = 4,
};

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;  // deterministic; no wall-clock content
  std::string csv;        // sweep rows, when applicable
  std::string trace;      // solver trace table, when applicable
  std::string log;        // timing and progress notes, not reproducible
};

// |a - b - shift|_inf minimized over the scalar shift.
double linf_mod_constants(std::span<const double> a, std::span<const double> b);

// Least-squares slope of log(y) against log(x) over pairs with positive entries.
double loglog_slope(std::span<const double> x, std::span<const double> y);

RunResult run_solve(const ExperimentConfig& cfg);
RunResult run_perturb_sweep(const ExperimentConfig& cfg);
RunResult run_storage_demo(const ExperimentConfig& cfg);
RunResult run_spectral(const ExperimentConfig& cfg);

// Writes <stem>.json, <stem>.csv, <stem>_trace.txt, <stem>_log.txt under
// out_dir (files only for nonempty parts).
void write_outputs(const RunResult& result, const std::string& out_dir, const std::string& stem);

// Shared analysis of a storage-fee pair: both solutions, the exchange
// digraph, acyclicity/topological structure, and the single-enlargement
// lemma clauses when fee2 enlarges exactly one upper bound of fee1.
struct FeePairAnalysis {
  StorageSolution sol1;
  StorageSolution sol2;
  CellPartition part1;
  CellPartition part2;
  ExchangeDigraph digraph;
  AcyclicityCheck acyclicity;
  std::vector<int> topo_order;  // empty when cyclic
  bool single_enlargement = false;
  SingleBoxReport single_box;
  SymmetricDifference sym;
  double lambda_l1_diff = 0.0;
};

FeePairAnalysis analyze_fee_pair(const HyperrectangleFee& fee1, const HyperrectangleFee& fee2, const GriddedMeasure& mu,
                                 const CostModel& model, const SiteSet& sites, const StorageOptions& opts);

// The 1D sharp-example problem: X = [0, N], uniform measure at
// resolution_per_unit pixels per unit, sites y_i = i - 1/2, inner-product cost.
Problem sharp_example_problem(int n_sites, int resolution_per_unit);

// Dual vector ((i-1) i / 2)_i inducing the cells [i-1, i], canonicalized.
DualVector sharp_example_classical_dual(int n_sites);

// Dual vector ((i-1)(i-2) / 2)_i of the enlarged-fee optimum, canonicalized.
DualVector sharp_example_enlarged_dual(int n_sites);

nlohmann::json stability_report_to_json(const StabilityReport& rep);
nlohmann::json spectral_report_to_json(const SpectralReport& rep);

}  // namespace sdot
