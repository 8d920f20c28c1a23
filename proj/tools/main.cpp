#include "experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

using nodal::cli::ConfigError;
using nodal::cli::ExperimentConfig;

namespace {

struct Flags {
  std::string config;
  std::optional<double> p;
  std::optional<std::string> p_sweep, R_sweep, lambda_grid;
  std::optional<int> K, refine, bisect_steps, jobs;
  std::optional<double> lambda, horizon, tol, s_max, r_cmp, limit_R;
  std::optional<long> nodes, limit_nodes;
  std::optional<double> rtol, M_big, delta, dt_min_rel;
  std::optional<std::string> output, cache_dir;
  bool no_dynamics = false;
};

void add_flags(CLI::App &app, Flags &f) {
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--p", f.p, "single exponent");
  app.add_option("--p-sweep", f.p_sweep, "comma separated exponents");
  app.add_option("--K", f.K, "number of nodal regions");
  app.add_option("--R-sweep", f.R_sweep, "comma separated radii");
  app.add_option("--lambda", f.lambda, "initial data multiplier");
  app.add_option("--lambda-grid", f.lambda_grid, "comma separated multipliers");
  app.add_option("--horizon", f.horizon, "scaled time horizon");
  app.add_option("--nodes", f.nodes, "stationary grid nodes");
  app.add_option("--tol", f.tol, "shooting tolerance");
  app.add_option("--s-max", f.s_max, "rescaled profile range");
  app.add_option("--r-cmp", f.r_cmp, "comparison radius");
  app.add_option("--limit-R", f.limit_R, "limit problem truncation radius");
  app.add_option("--limit-nodes", f.limit_nodes, "limit problem nodes");
  app.add_option("--refine", f.refine, "heat grid refinement");
  app.add_option("--rtol", f.rtol, "heat step tolerance");
  app.add_option("--M-big", f.M_big, "blow-up threshold");
  app.add_option("--delta", f.delta, "decay threshold");
  app.add_option("--dt-min-rel", f.dt_min_rel, "relative step floor for blow-up");
  app.add_option("--bisect-steps", f.bisect_steps, "bisection steps per edge");
  app.add_option("--output", f.output, "output directory");
  app.add_option("--cache-dir", f.cache_dir, "stationary cache directory");
  app.add_option("--jobs", f.jobs, "worker threads");
  app.add_flag("--no-dynamics", f.no_dynamics, "skip the sweep in full");
}

ExperimentConfig resolve(const Flags &f) {
  using nodal::cli::parse_list;
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{}
                                        : nodal::cli::load_config_file(f.config);
  if (f.p) c.p = *f.p;
  if (f.p_sweep) c.p_sweep = parse_list("p_sweep", *f.p_sweep);
  if (f.K) c.K = *f.K;
  if (f.R_sweep) c.R_sweep = parse_list("R_sweep", *f.R_sweep);
  if (f.lambda) c.lambda = *f.lambda;
  if (f.lambda_grid) c.lambda_grid = parse_list("lambda_grid", *f.lambda_grid);
  if (f.horizon) c.horizon = *f.horizon;
  if (f.nodes) c.nodes = *f.nodes;
  if (f.tol) c.tol = *f.tol;
  if (f.s_max) c.s_max = *f.s_max;
  if (f.r_cmp) c.r_cmp = *f.r_cmp;
  if (f.limit_R) c.limit_R = *f.limit_R;
  if (f.limit_nodes) c.limit_nodes = *f.limit_nodes;
  if (f.refine) c.heat.refine = *f.refine;
  if (f.rtol) c.heat.rtol = *f.rtol;
  if (f.M_big) c.heat.M_big = *f.M_big;
  if (f.delta) c.heat.delta = *f.delta;
  if (f.dt_min_rel) c.heat.dt_min_rel = *f.dt_min_rel;
  if (f.bisect_steps) c.bisect_steps = *f.bisect_steps;
  if (f.output) c.output_dir = *f.output;
  if (f.cache_dir) c.cache_dir = *f.cache_dir;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.no_dynamics) c.dynamics = false;
  return c;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"nodal: sign-changing Lane-Emden solutions, spectra and heat flow"};
  app.require_subcommand(1);
  Flags flags;
  add_flags(app, flags);
  app.fallthrough();
  std::string chosen;
  for (const auto &name : nodal::cli::subcommands()) {
    app.add_subcommand(name)->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(flags);
    const auto report = nodal::cli::run(chosen, cfg);
    std::cout << cfg.output_dir << "\n";
    (void)report;
  } catch (const ConfigError &e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
