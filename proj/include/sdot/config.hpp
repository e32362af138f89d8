#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdot/cost.hpp"
#include "sdot/measure.hpp"

namespace sdot {

struct SiteSpec {
  std::vector<std::vector<double>> points;  // explicit sites, or
  int generated_count = 0;                  // generator: count + seed + margin
  std::uint64_t generator_seed = 0;
  double margin = 0.05;
  bool use_generator() const { return points.empty(); }
};

struct DensitySpec {
  std::string kind = "uniform";  // uniform | gaussian | file
  std::vector<double> mean;
  std::vector<double> sigma;
  std::string path;
};

struct SweepSpec {
  int trials = 20;
  std::vector<double> t_grid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::uint64_t seed = 1;
  double min_mass = 0.02;  // simplex floor for drawn targets
  int hausdorff_directions = 720;
  std::string metrics = "full";  // full | fast
};

struct StorageSpec {
  int n_sites = 4;                   // Remark-2.8 demo size
  int resolution_per_unit = 1024;
  std::vector<double> fee_lower;     // explicit fees for general runs
  std::vector<double> fee_upper;
  int enlarge_index = -1;            // single-coordinate enlargement
  double enlarge_eps = 0.0;
  int max_outer = 400;
  double clamp = 1e-5;
};

struct ExperimentConfig {
  std::string schema = "sdot-config/1";
  CostModel cost;
  SiteSpec sites;
  Box domain;
  std::vector<int> resolution;
  DensitySpec density;
  double q = 2.0;
  double c_pw = 1.0;
  double solver_tol = 1e-5;
  int solver_max_iter = 60;
  std::optional<std::vector<double>> target_lambda;  // absent = uniform
  SweepSpec sweep;
  StorageSpec storage;
  int threads = 1;

  // FNV-1a over the canonical serialized form; stamped on every CSV row.
  std::string config_hash() const;
  std::string to_json_text() const;
};

// Strict parse: unknown keys anywhere are an error (ConfigError).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// A complete commented example, written by `gen-config`.
std::string example_config_text();

// Materialized inputs for a run.
struct Problem {
  CostModel model;
  SiteSet sites;
  GriddedMeasure mu;
  UniversalConstants constants;
};

Problem build_problem(const ExperimentConfig& cfg);

}  // namespace sdot
