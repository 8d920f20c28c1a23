#ifndef NODAL_TOOLS_EXPERIMENT_HPP
#define NODAL_TOOLS_EXPERIMENT_HPP

#include "nodal/heat_flow.hpp"
#include "nodal/io.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodal::cli {

struct ConfigError : std::runtime_error {
  ConfigError(std::string field, const std::string &message)
      : std::runtime_error(field + ": " + message), field(std::move(field)) {}
  std::string field;
};

struct ExperimentConfig {
  std::vector<double> p_sweep{20, 50, 100, 200, 500, 1000};
  /// single exponent; replaces p_sweep when set, and drives heatflow/sweep
  std::optional<double> p;
  int K = 2;
  std::vector<double> R_sweep{5, 10, 20, 50};
  std::vector<double> lambda_grid{0.9, 0.95, 0.99, 1.01, 1.05, 1.1};
  double lambda = 1.05;
  double horizon = 50;
  long nodes = 4000;
  double tol = 1e-12;
  double s_max = 20;
  double r_cmp = 10;
  double limit_R = 200;
  long limit_nodes = 8000;
  HeatOptions heat;
  int bisect_steps = 4;
  std::string output_dir = "out";
  std::string cache_dir;
  int jobs = 1;
  bool dynamics = true;

  double heat_p() const { return p.value_or(100.0); }
  std::vector<double> sweep() const {
    return p ? std::vector<double>{*p} : p_sweep;
  }
};

/// Applies the keys of a JSON object; unknown keys and wrong types raise
/// ConfigError naming the field.
void apply_json(ExperimentConfig &cfg, const io::json &j);
ExperimentConfig load_config_file(const std::string &path);

/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig &cfg);

/// Parses "a,b,c"; an empty string gives an empty list.
std::vector<double> parse_list(const std::string &field, const std::string &text);

/// Runs a subcommand, writes its artifacts under cfg.output_dir and returns
/// the JSON report that was written.
io::json run(const std::string &subcommand, const ExperimentConfig &cfg);

const std::vector<std::string> &subcommands();

} // namespace nodal::cli

#endif // NODAL_TOOLS_EXPERIMENT_HPP
