#include "sdot/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdot/rng.hpp"

namespace sdot {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

std::vector<double> as_doubles(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError("config: " + where + " must be an array");
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw ConfigError("config: " + where + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(root, "top level",
               {"schema", "cost", "sites", "domain", "density", "pw", "solver", "target", "sweep", "storage", "threads"});

  ExperimentConfig cfg;
  if (!root.contains("schema") || root["schema"] != "sdot-config/1")
    throw ConfigError("config: missing or unsupported schema (want \"sdot-config/1\")");

  {
    const auto& c = root.at("cost");
    require_keys(c, "cost", {"family", "dimension"});
    cfg.cost = CostModel(cost_family_from_string(c.at("family").get<std::string>()), c.at("dimension").get<int>());
  }
  {
    const auto& s = root.at("sites");
    require_keys(s, "sites", {"points", "generator"});
    if (s.contains("points") == s.contains("generator"))
      throw ConfigError("config: sites needs exactly one of 'points' or 'generator'");
    if (s.contains("points")) {
      for (const auto& p : s.at("points")) cfg.sites.points.push_back(as_doubles(p, "sites.points[]"));
    } else {
      const auto& g = s.at("generator");
      require_keys(g, "sites.generator", {"count", "seed", "margin"});
      cfg.sites.generated_count = g.at("count").get<int>();
      cfg.sites.generator_seed = g.at("seed").get<std::uint64_t>();
      if (g.contains("margin")) cfg.sites.margin = g.at("margin").get<double>();
      if (cfg.sites.generated_count < 1) throw ConfigError("config: sites.generator.count must be >= 1");
    }
  }
  {
    const auto& d = root.at("domain");
    require_keys(d, "domain", {"lower", "upper", "resolution"});
    cfg.domain = Box(as_doubles(d.at("lower"), "domain.lower"), as_doubles(d.at("upper"), "domain.upper"));
    if (d.at("resolution").is_number()) {
      cfg.resolution.assign(static_cast<std::size_t>(cfg.domain.dim()), d.at("resolution").get<int>());
    } else {
      for (const auto& r : d.at("resolution")) cfg.resolution.push_back(r.get<int>());
    }
    if (static_cast<int>(cfg.resolution.size()) != cfg.domain.dim())
      throw ConfigError("config: domain.resolution does not match the dimension");
    for (int r : cfg.resolution)
      if (r < 64) throw ConfigError("config: resolution must be >= 64 on every axis");
  }
  if (root.contains("density")) {
    const auto& d = root.at("density");
    require_keys(d, "density", {"kind", "mean", "sigma", "path"});
    cfg.density.kind = d.at("kind").get<std::string>();
    if (cfg.density.kind == "gaussian") {
      cfg.density.mean = as_doubles(d.at("mean"), "density.mean");
      cfg.density.sigma = as_doubles(d.at("sigma"), "density.sigma");
    } else if (cfg.density.kind == "file") {
      cfg.density.path = d.at("path").get<std::string>();
    } else if (cfg.density.kind != "uniform") {
      throw ConfigError("config: density.kind must be uniform, gaussian, or file");
    }
  }
  if (root.contains("pw")) {
    const auto& p = root.at("pw");
    require_keys(p, "pw", {"q", "c_pw"});
    if (p.contains("q")) cfg.q = p.at("q").get<double>();
    if (p.contains("c_pw")) cfg.c_pw = p.at("c_pw").get<double>();
    if (!(cfg.q >= 1.0)) throw ConfigError("config: pw.q must be >= 1");
    if (!(cfg.c_pw > 0.0)) throw ConfigError("config: pw.c_pw must be positive");
  }
  if (root.contains("solver")) {
    const auto& s = root.at("solver");
    require_keys(s, "solver", {"tol", "max_iter"});
    if (s.contains("tol")) cfg.solver_tol = s.at("tol").get<double>();
    if (s.contains("max_iter")) cfg.solver_max_iter = s.at("max_iter").get<int>();
    if (!(cfg.solver_tol > 0.0)) throw ConfigError("config: solver.tol must be positive");
  }
  if (root.contains("target")) {
    const auto& t = root.at("target");
    require_keys(t, "target", {"lambda"});
    if (t.contains("lambda") && !t.at("lambda").is_string())
      cfg.target_lambda = as_doubles(t.at("lambda"), "target.lambda");
    else if (t.contains("lambda") && t.at("lambda").get<std::string>() != "uniform")
      throw ConfigError("config: target.lambda must be an array or \"uniform\"");
  }
  if (root.contains("sweep")) {
    const auto& s = root.at("sweep");
    require_keys(s, "sweep", {"trials", "t_grid", "seed", "min_mass", "hausdorff_directions", "metrics"});
    if (s.contains("trials")) cfg.sweep.trials = s.at("trials").get<int>();
    if (s.contains("t_grid")) cfg.sweep.t_grid = as_doubles(s.at("t_grid"), "sweep.t_grid");
    if (s.contains("seed")) cfg.sweep.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("min_mass")) cfg.sweep.min_mass = s.at("min_mass").get<double>();
    if (s.contains("hausdorff_directions")) cfg.sweep.hausdorff_directions = s.at("hausdorff_directions").get<int>();
    if (s.contains("metrics")) cfg.sweep.metrics = s.at("metrics").get<std::string>();
    if (cfg.sweep.trials < 1) throw ConfigError("config: sweep.trials must be >= 1");
    double prev = 0.0;
    for (double t : cfg.sweep.t_grid) {
      if (!(t > prev)) throw ConfigError("config: sweep.t_grid must be positive and increasing");
      prev = t;
    }
    if (cfg.sweep.metrics != "full" && cfg.sweep.metrics != "fast")
      throw ConfigError("config: sweep.metrics must be full or fast");
  }
  if (root.contains("storage")) {
    const auto& s = root.at("storage");
    require_keys(s, "storage",
                 {"n_sites", "resolution_per_unit", "fee_lower", "fee_upper", "enlarge_index", "enlarge_eps", "max_outer", "clamp"});
    if (s.contains("n_sites")) cfg.storage.n_sites = s.at("n_sites").get<int>();
    if (s.contains("resolution_per_unit")) cfg.storage.resolution_per_unit = s.at("resolution_per_unit").get<int>();
    if (s.contains("fee_lower")) cfg.storage.fee_lower = as_doubles(s.at("fee_lower"), "storage.fee_lower");
    if (s.contains("fee_upper")) cfg.storage.fee_upper = as_doubles(s.at("fee_upper"), "storage.fee_upper");
    if (s.contains("enlarge_index")) cfg.storage.enlarge_index = s.at("enlarge_index").get<int>();
    if (s.contains("enlarge_eps")) cfg.storage.enlarge_eps = s.at("enlarge_eps").get<double>();
    if (s.contains("max_outer")) cfg.storage.max_outer = s.at("max_outer").get<int>();
    if (s.contains("clamp")) cfg.storage.clamp = s.at("clamp").get<double>();
    if (cfg.storage.n_sites < 2) throw ConfigError("config: storage.n_sites must be >= 2");
  }
  if (root.contains("threads")) {
    cfg.threads = root.at("threads").get<int>();
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  json root;
  root["schema"] = schema;
  root["cost"] = {{"family", to_string(cost.family)}, {"dimension", cost.dimension}};
  if (!sites.points.empty())
    root["sites"] = {{"points", sites.points}};
  else
    root["sites"] = {{"generator", {{"count", sites.generated_count}, {"seed", sites.generator_seed}, {"margin", sites.margin}}}};
  root["domain"] = {{"lower", domain.lower}, {"upper", domain.upper}, {"resolution", resolution}};
  json dens = {{"kind", density.kind}};
  if (density.kind == "gaussian") {
    dens["mean"] = density.mean;
    dens["sigma"] = density.sigma;
  } else if (density.kind == "file") {
    dens["path"] = density.path;
  }
  root["density"] = dens;
  root["pw"] = {{"q", q}, {"c_pw", c_pw}};
  root["solver"] = {{"tol", solver_tol}, {"max_iter", solver_max_iter}};
  if (target_lambda)
    root["target"] = {{"lambda", *target_lambda}};
  else
    root["target"] = {{"lambda", "uniform"}};
  root["sweep"] = {{"trials", sweep.trials},
                   {"t_grid", sweep.t_grid},
                   {"seed", sweep.seed},
                   {"min_mass", sweep.min_mass},
                   {"hausdorff_directions", sweep.hausdorff_directions},
                   {"metrics", sweep.metrics}};
  json st = {{"n_sites", storage.n_sites},
             {"resolution_per_unit", storage.resolution_per_unit},
             {"max_outer", storage.max_outer},
             {"clamp", storage.clamp}};
  if (!storage.fee_lower.empty()) st["fee_lower"] = storage.fee_lower;
  if (!storage.fee_upper.empty()) st["fee_upper"] = storage.fee_upper;
  if (storage.enlarge_index >= 0) {
    st["enlarge_index"] = storage.enlarge_index;
    st["enlarge_eps"] = storage.enlarge_eps;
  }
  root["storage"] = st;
  root["threads"] = threads;
  return root.dump(2) + "\n";
}

std::string ExperimentConfig::config_hash() const {
  // identifies the experiment's inputs; execution settings stay out
  ExperimentConfig canonical = *this;
  canonical.threads = 1;
  const std::string text = canonical.to_json_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string example_config_text() {
  ExperimentConfig cfg;
  cfg.cost = CostModel(CostFamily::InnerProduct, 2);
  cfg.sites.generated_count = 6;
  cfg.sites.generator_seed = 7;
  cfg.domain = Box({0.0, 0.0}, {1.0, 1.0});
  cfg.resolution = {256, 256};
  // the l1 mass residual cannot resolve below a few pixels; 2e-4 suits 256^2
  cfg.solver_tol = 2e-4;
  cfg.target_lambda.reset();
  return cfg.to_json_text();
}

Problem build_problem(const ExperimentConfig& cfg) {
  SiteSet sites;
  if (!cfg.sites.points.empty()) {
    sites = SiteSet::from_points(cfg.sites.points);
  } else {
    CounterRng rng(cfg.sites.generator_seed, /*stream_id=*/17);
    std::vector<double> coords;
    coords.reserve(static_cast<std::size_t>(cfg.sites.generated_count) * cfg.domain.dim());
    for (int i = 0; i < cfg.sites.generated_count; ++i)
      for (int d = 0; d < cfg.domain.dim(); ++d) {
        const double pad = cfg.sites.margin * cfg.domain.extent(d);
        coords.push_back(rng.uniform(cfg.domain.lower[static_cast<std::size_t>(d)] + pad,
                                     cfg.domain.upper[static_cast<std::size_t>(d)] - pad));
      }
    sites = SiteSet(cfg.domain.dim(), std::move(coords));
  }
  if (sites.dim() != cfg.cost.dimension) throw ConfigError("config: site dimension does not match the cost dimension");

  Grid grid(cfg.domain, cfg.resolution);
  GriddedMeasure mu;
  if (cfg.density.kind == "uniform")
    mu = GriddedMeasure::uniform(grid);
  else if (cfg.density.kind == "gaussian")
    mu = GriddedMeasure::gaussian(grid, cfg.density.mean, cfg.density.sigma);
  else {
    mu = GriddedMeasure::load_density_file(cfg.density.path);
    if (!(mu.grid() == grid)) throw ConfigError("config: density file grid does not match the domain spec");
  }
  auto uc = universal_constants(cfg.cost, sites, cfg.domain, mu.rho_sup());
  return Problem{cfg.cost, std::move(sites), std::move(mu), uc};
}

}  // namespace sdot
