#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sdot/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int resolution = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "Path to the sdot-config/1 JSON file");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override the sweep seed")->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads, "Override the thread count");
  cmd->add_option("--resolution", args.resolution, "Override the grid resolution on every axis");
}

sdot::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  sdot::ExperimentConfig cfg = sdot::load_config(args.config_path);
  if (args.seed_set) cfg.sweep.seed = args.seed;
  if (args.threads > 0) cfg.threads = args.threads;
  if (args.resolution > 0) {
    for (auto& r : cfg.resolution) r = args.resolution;
    cfg.storage.resolution_per_unit = args.resolution;
  }
  return cfg;
}

int dispatch(const std::string& name, const CommonArgs& args, sdot::RunResult (*runner)(const sdot::ExperimentConfig&)) {
  const auto cfg = load_with_overrides(args);
  const auto result = runner(cfg);
  sdot::write_outputs(result, args.out_dir, name);
  std::cout << name << ": wrote " << args.out_dir << "/" << name << ".json (exit " << result.exit_code << ")\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-discrete optimal transport stability toolkit"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, storage_args, spectral_args;
  std::string gen_path = "config.json";

  auto* solve = app.add_subcommand("solve", "Solve G(psi) = lambda for the configured target");
  add_common(solve, solve_args);
  auto* sweep = app.add_subcommand("perturb-sweep", "Randomized perturbation sweep with stability reports");
  add_common(sweep, sweep_args);
  auto* storage = app.add_subcommand("storage-demo", "Storage-fee demo (sharp 1D example or explicit fee pair)");
  add_common(storage, storage_args);
  auto* spectral = app.add_subcommand("spectral", "Spectrum and connectivity report for -DG");
  add_common(spectral, spectral_args);
  auto* gen = app.add_subcommand("gen-config", "Write an example configuration file");
  gen->add_option("path", gen_path, "Where to write the example config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::ofstream f(gen_path, std::ios::binary);
      if (!f) {
        std::cerr << "gen-config: cannot write " << gen_path << "\n";
        return sdot::kExitConfigError;
      }
      f << sdot::example_config_text();
      std::cout << "gen-config: wrote " << gen_path << "\n";
      return sdot::kExitOk;
    }
    if (solve->parsed()) return dispatch("solve", solve_args, sdot::run_solve);
    if (sweep->parsed()) return dispatch("sweep", sweep_args, sdot::run_perturb_sweep);
    if (storage->parsed()) return dispatch("storage_demo", storage_args, sdot::run_storage_demo);
    if (spectral->parsed()) return dispatch("spectral", spectral_args, sdot::run_spectral);
  } catch (const sdot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return sdot::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sdot::kExitSolverFailure;
  }
  return sdot::kExitOk;
}
