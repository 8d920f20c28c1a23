#include "experiment.hpp"

#include "nodal/criteria.hpp"
#include "nodal/liouville.hpp"
#include "nodal/parallel.hpp"
#include "nodal/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

namespace nodal::cli {

using io::json;
using io::number;

namespace {

template <typename T> T get(const json &j, const std::string &field) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw ConfigError(field, "wrong type");
  }
}

std::vector<double> get_list(const json &j, const std::string &field) {
  if (j.is_string()) {
    return parse_list(field, j.get<std::string>());
  }
  return get<std::vector<double>>(j, field);
}

void apply_heat(HeatOptions &h, const json &j) {
  if (!j.is_object()) {
    throw ConfigError("heat", "must be an object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string &k = it.key();
    const std::string field = "heat." + k;
    const json &v = it.value();
    if (k == "refine") h.refine = get<int>(v, field);
    else if (k == "deep_density") h.deep_density = get<double>(v, field);
    else if (k == "depth_margin") h.depth_margin = get<double>(v, field);
    else if (k == "rtol") h.rtol = get<double>(v, field);
    else if (k == "dt_initial") h.dt_initial = get<double>(v, field);
    else if (k == "M_big") h.M_big = get<double>(v, field);
    else if (k == "delta") h.delta = get<double>(v, field);
    else if (k == "dt_min_rel") h.dt_min_rel = get<double>(v, field);
    else if (k == "stationary_tol") h.stationary_tol = get<double>(v, field);
    else if (k == "fit_samples") h.fit_samples = get<int>(v, field);
    else if (k == "max_steps") h.max_steps = get<long>(v, field);
    else throw ConfigError(field, "unknown field");
  }
}

void require_sorted(const std::vector<double> &v, const std::string &field) {
  if (v.empty()) {
    throw ConfigError(field, "must be nonempty");
  }
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw ConfigError(field, "must be sorted strictly increasing");
    }
  }
}

std::string tag(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

BuildOptions build_options(const ExperimentConfig &cfg) {
  BuildOptions b;
  b.nodes = cfg.nodes;
  b.shoot.tol = cfg.tol;
  return b;
}

bool strictly_decreasing(const std::vector<double> &v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) {
      return false;
    }
  }
  return true;
}

bool strictly_increasing(const std::vector<double> &v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      return false;
    }
  }
  return true;
}

// eigenvalues are converged to about this relative precision; the true
// truncation effect between R/2 and R is far smaller
constexpr long double kSolverSlack = 1e-10L;

// first zero of J0 from its power series
double bessel_j01() {
  auto j0 = [](double x) {
    double term = 1, sum = 1;
    for (int k = 1; k < 60; ++k) {
      term *= -(x * x / 4) / (static_cast<double>(k) * k);
      sum += term;
    }
    return sum;
  };
  double a = 2.0, b = 3.0;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double m = 0.5 * (a + b);
    (j0(a) * j0(m) <= 0 ? b : a) = m;
  }
  return 0.5 * (a + b);
}

class Runner {
public:
  explicit Runner(const ExperimentConfig &cfg)
      : cfg_(cfg), out_(cfg.output_dir), cache_(io::cache_dir(cfg.cache_dir)) {}

  json stationary() {
    const auto &sols = solutions();
    json rows = json::array();
    std::vector<double> mu_p, mu_m, mu_ratio, u_max;
    double energy_bound = 0;
    for (const auto &s : sols) {
      const Energies e = energy_functionals(s);
      json r = io::to_json(s);
      r["energy_gradient"] = e.gradient;
      r["energy_potential"] = e.potential;
      r["ode_residual"] = ode_residual(s);
      r["boundary_value"] = s.u(s.u.size() - 1);
      r["u_min_abs"] = -s.u_min;
      rows.push_back(r);
      mu_p.push_back(s.log_mu_plus);
      mu_m.push_back(s.log_mu_minus);
      mu_ratio.push_back(s.log_mu_plus - s.log_mu_minus);
      u_max.push_back(s.u_max);
      energy_bound = std::max({energy_bound, e.gradient, e.potential});
    }
    json j;
    j["K"] = cfg_.K;
    j["rows"] = rows;
    j["sup_bound"] = *std::max_element(u_max.begin(), u_max.end());
    j["energy_bound"] = energy_bound;
    j["flags"] = {{"mu_plus_decreasing", strictly_decreasing(mu_p)},
                  {"mu_minus_decreasing", strictly_decreasing(mu_m)},
                  {"mu_ratio_decreasing", strictly_decreasing(mu_ratio)}};
    write("stationary.json", j);
    return j;
  }

  json rescale() {
    const auto &sols = solutions();
    json rows = json::array();
    std::vector<double> ve, de, nl, bd;
    for (const auto &s : sols) {
      const RescaledProfile prof = rescale_profile(s, cfg_.s_max);
      const ConvergenceMetric m = convergence_metric(prof, cfg_.r_cmp);
      io::write_table(out_ / ("profile_p" + tag(s.p) + "_K" + std::to_string(s.K) + ".csv"),
                      io::profile_table(prof));
      const double log_nl = std::log(s.nodal_radii.front()) - s.log_mu_plus;
      rows.push_back({{"p", s.p},
                      {"value_error", m.value_error},
                      {"derivative_error", m.derivative_error},
                      {"log_nodal_distance_over_mu", log_nl},
                      {"log_boundary_distance_over_mu", -s.log_mu_plus}});
      ve.push_back(m.value_error);
      de.push_back(m.derivative_error);
      nl.push_back(log_nl);
      bd.push_back(-s.log_mu_plus);
    }
    json j;
    j["K"] = cfg_.K;
    j["s_max"] = cfg_.s_max;
    j["r_cmp"] = cfg_.r_cmp;
    j["rows"] = rows;
    j["flags"] = {{"value_error_decreasing", strictly_decreasing(ve)},
                  {"derivative_error_decreasing", strictly_decreasing(de)},
                  {"nodal_distance_increasing", strictly_increasing(nl)},
                  {"boundary_distance_increasing", strictly_increasing(bd)}};
    write("rescale.json", j);
    return j;
  }

  json limit_spectrum() {
    const EigenPair &lim = limit();
    // nested prefix of the reference layout, cut at the node nearest R/2
    const Eigen::VectorXd full_nodes = limit_nodes(cfg_.limit_R, cfg_.limit_nodes);
    Eigen::Index cut = 0;
    const double log_half = std::log(cfg_.limit_R / 2);
    for (Eigen::Index i = 0; i < full_nodes.size(); ++i) {
      if (std::abs(full_nodes(i) - log_half) < std::abs(full_nodes(cut) - log_half)) {
        cut = i;
      }
    }
    const EigenPair half = limit_first_eigenpair_on(full_nodes.head(cut + 1));
    const double R_half = std::exp(full_nodes(cut));
    const EigenPair doubled = limit_first_eigenpair(cfg_.limit_R, 2 * cfg_.limit_nodes);
    const EigenPair disk = dirichlet_disk_ground_state(cfg_.limit_nodes);
    const double j01 = bessel_j01();
    bool nonincreasing = true, nonnegative = true;
    for (Eigen::Index i = 0; i < lim.phi.size(); ++i) {
      nonnegative = nonnegative && lim.phi(i) >= 0;
      if (i > 0) {
        nonincreasing = nonincreasing && lim.phi(i) <= lim.phi(i - 1);
      }
    }
    io::write_table(out_ / "limit_eigen.csv", io::eigenpair_table(lim));
    json j;
    j["lambda_star"] = static_cast<double>(lim.lambda);
    j["R_trunc"] = cfg_.limit_R;
    j["nodes"] = cfg_.limit_nodes;
    j["residual"] = static_cast<double>(lim.residual);
    j["R_half"] = R_half;
    j["lambda_radius_difference"] = static_cast<double>(lim.lambda - half.lambda);
    j["lambda_half_radius"] = static_cast<double>(half.lambda);
    {
      const double q = (cfg_.limit_R / R_half) * (cfg_.limit_R / R_half);
      j["lambda_richardson_R"] =
          static_cast<double>((q * lim.lambda - half.lambda) / (q - 1));
    }
    j["lambda_doubled_nodes"] = static_cast<double>(doubled.lambda);
    j["bubble_overlap"] = bubble_overlap(lim);
    j["disk_lambda"] = static_cast<double>(disk.lambda);
    j["bessel_j01_squared"] = j01 * j01;
    j["disk_error"] = static_cast<double>(disk.lambda) - j01 * j01;
    j["flags"] = {{"lambda_negative", lim.lambda < 0},
                  {"domain_monotone", lim.lambda <= half.lambda + kSolverSlack * std::abs(half.lambda)},
                  {"domain_stable", std::abs(lim.lambda - half.lambda) < 1e-4L},
                  {"phi_nonnegative", nonnegative},
                  {"phi_nonincreasing", nonincreasing}};
    write("limit.json", j);
    return j;
  }

  json spectrum() {
    const auto &sols = solutions();
    const EigenPair &lim = limit();
    std::vector<json> rows(sols.size());
    std::vector<EigenConvergenceRow> conv(sols.size());
    std::vector<io::Table> tables(sols.size());
    parallel_for(sols.size(), cfg_.jobs, [&](std::size_t k) {
      const auto &s = sols[k];
      const EigenPair pair = first_eigenpair_Lp(s);
      const RescaledEigenPair re = rescaled_eigen(s, pair);
      conv[k] = eigen_convergence_row(s, pair, lim);
      tables[k] = io::rescaled_eigen_table(re);
      bool nonneg = true;
      for (Eigen::Index i = 0; i < pair.phi.size(); ++i) {
        nonneg = nonneg && pair.phi(i) >= 0;
      }
      const double log10_abs =
          static_cast<double>(std::log10(std::abs(pair.lambda)));
      rows[k] = {{"p", s.p},
                 {"lambda_tilde", conv[k].lambda_tilde},
                 {"log10_abs_lambda", log10_abs},
                 {"lambda_negative", pair.lambda < 0},
                 {"phi_nonnegative", nonneg},
                 {"residual", static_cast<double>(pair.residual)},
                 {"lambda_error", conv[k].lambda_error},
                 {"phi_l2_error", conv[k].phi_l2_error},
                 {"gap_integral", conv[k].gap_integral}};
    });
    for (std::size_t k = 0; k < sols.size(); ++k) {
      io::write_table(out_ / ("eigen_p" + tag(sols[k].p) + "_K" +
                              std::to_string(sols[k].K) + ".csv"),
                      tables[k]);
    }
    std::vector<double> le, pe;
    for (const auto &c : conv) {
      le.push_back(c.lambda_error);
      pe.push_back(c.phi_l2_error);
    }
    json j;
    j["K"] = cfg_.K;
    j["lambda_star"] = static_cast<double>(lim.lambda);
    j["rows"] = rows;
    j["flags"] = {{"lambda_error_decreasing", strictly_decreasing(le)},
                  {"phi_error_decreasing", strictly_decreasing(pe)}};
    write("spectrum.json", j);
    return j;
  }

  json conditions() {
    const ConditionReport rep =
        condition_report(solutions(), cfg_.R_sweep, limit(), cfg_.jobs);
    io::write_table(out_ / "S_table.csv",
                    io::condition_matrix(rep.p_sweep, rep.R_sweep, rep.S_table));
    io::write_table(out_ / "M_table.csv",
                    io::condition_matrix(rep.p_sweep, rep.R_sweep, rep.M_table));
    io::write_table(out_ / "Mprime_table.csv",
                    io::condition_matrix(rep.p_sweep, rep.R_sweep, rep.Mprime_table));
    json j = io::to_json(rep);
    write("conditions.json", j);
    return j;
  }

  json criterion() {
    const auto &sols = solutions();
    const double target = bubble_overlap(limit());
    std::vector<json> rows(sols.size());
    std::vector<double> crit(sols.size()), norm(sols.size());
    std::vector<char> positive(sols.size(), 0);
    parallel_for(sols.size(), cfg_.jobs, [&](std::size_t k) {
      const DiscreteStationary ds = discrete_stationary(sols[k]);
      const EigenPair pair = first_eigenpair_Lp(sols[k], ds);
      const ScalarCriterion c = scalar_criterion(sols[k], ds, pair);
      crit[k] = static_cast<double>(c.integral);
      norm[k] = c.normalized;
      positive[k] = c.integral > 0;
      rows[k] = {{"p", sols[k].p},
                 {"integral", number(crit[k])},
                 {"integral_log10", static_cast<double>(std::log10(std::abs(c.integral)))},
                 {"positive", c.integral > 0},
                 {"normalized", c.normalized},
                 {"identity_residual", c.identity_residual}};
    });
    double p_star = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = sols.size(); k-- > 0;) {
      if (!positive[k]) {
        break;
      }
      p_star = sols[k].p;
    }
    const double rel = std::abs(norm.back() - target) / std::abs(target);
    json j;
    j["K"] = cfg_.K;
    j["rows"] = rows;
    j["limit_target"] = target;
    j["p_star"] = number(p_star);
    j["largest_p_relative_gap"] = rel;
    j["flags"] = {{"within_10_percent", rel < 0.1},
                  {"positive_from_p_star", !std::isnan(p_star)}};
    write("criterion.json", j);
    return j;
  }

  json heatflow() {
    const StationarySolution sol = solution(cfg_.heat_p());
    const HeatTrajectory tr = evolve(sol, cfg_.lambda, cfg_.horizon, cfg_.heat);
    io::write_table(out_ / ("trajectory_p" + tag(sol.p) + "_K" + std::to_string(sol.K) +
                            "_lambda" + tag(cfg_.lambda) + ".csv"),
                    io::trajectory_table(tr));
    json j = io::to_json(tr);
    j["horizon"] = cfg_.horizon;
    write("heatflow.json", j);
    return j;
  }

  json sweep() {
    const StationarySolution sol = solution(cfg_.heat_p());
    const WindowReport rep = lambda_sweep(sol, cfg_.lambda_grid, cfg_.horizon,
                                          cfg_.heat, cfg_.bisect_steps, cfg_.jobs);
    json j = io::to_json(rep);
    write("sweep.json", j);
    return j;
  }

  json full() {
    json j;
    j["stationary"] = stationary();
    j["rescale"] = rescale();
    j["limit"] = limit_spectrum();
    j["spectrum"] = spectrum();
    j["conditions"] = conditions();
    j["criterion"] = criterion();
    if (cfg_.dynamics) {
      j["sweep"] = sweep();
    }
    write("full.json", j);
    return j;
  }

private:
  void write(const std::string &name, const json &j) {
    io::write_text(out_ / name, io::dump_json(j));
  }

  StationarySolution solution(double p) {
    const auto res = io::cached_stationary(p, cfg_.K, build_options(cfg_), cache_);
    std::cerr << (res.hit ? "cache hit: " : "built: ") << res.path.string() << "\n";
    return res.solution;
  }

  const std::vector<StationarySolution> &solutions() {
    if (sols_.empty()) {
      const auto ps = cfg_.sweep();
      std::vector<io::CacheResult> res(ps.size());
      // cache files are distinct per cell, so each worker owns its writer
      parallel_for(ps.size(), cfg_.jobs, [&](std::size_t k) {
        res[k] = io::cached_stationary(ps[k], cfg_.K, build_options(cfg_), cache_);
      });
      for (auto &r : res) {
        std::cerr << (r.hit ? "cache hit: " : "built: ") << r.path.string() << "\n";
        sols_.push_back(std::move(r.solution));
      }
    }
    return sols_;
  }

  const EigenPair &limit() {
    if (!limit_) {
      limit_ = limit_first_eigenpair(cfg_.limit_R, cfg_.limit_nodes);
    }
    return *limit_;
  }

  const ExperimentConfig &cfg_;
  io::fs::path out_;
  io::fs::path cache_;
  std::vector<StationarySolution> sols_;
  std::optional<EigenPair> limit_;
};

} // namespace

std::vector<double> parse_list(const std::string &field, const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    char *end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw ConfigError(field, "not a number: '" + item + "'");
    }
    out.push_back(x);
  }
  return out;
}

void apply_json(ExperimentConfig &cfg, const json &j) {
  if (!j.is_object()) {
    throw ConfigError("config", "top level must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string &k = it.key();
    const json &v = it.value();
    if (k == "p_sweep") cfg.p_sweep = get_list(v, k);
    else if (k == "p") cfg.p = get<double>(v, k);
    else if (k == "K") cfg.K = get<int>(v, k);
    else if (k == "R_sweep") cfg.R_sweep = get_list(v, k);
    else if (k == "lambda_grid") cfg.lambda_grid = get_list(v, k);
    else if (k == "lambda") cfg.lambda = get<double>(v, k);
    else if (k == "horizon") cfg.horizon = get<double>(v, k);
    else if (k == "nodes") cfg.nodes = get<long>(v, k);
    else if (k == "tol") cfg.tol = get<double>(v, k);
    else if (k == "s_max") cfg.s_max = get<double>(v, k);
    else if (k == "r_cmp") cfg.r_cmp = get<double>(v, k);
    else if (k == "limit_R") cfg.limit_R = get<double>(v, k);
    else if (k == "limit_nodes") cfg.limit_nodes = get<long>(v, k);
    else if (k == "heat") apply_heat(cfg.heat, v);
    else if (k == "bisect_steps") cfg.bisect_steps = get<int>(v, k);
    else if (k == "output_dir") cfg.output_dir = get<std::string>(v, k);
    else if (k == "cache_dir") cfg.cache_dir = get<std::string>(v, k);
    else if (k == "jobs") cfg.jobs = get<int>(v, k);
    else if (k == "dynamics") cfg.dynamics = get<bool>(v, k);
    else throw ConfigError(k, "unknown field");
  }
}

ExperimentConfig load_config_file(const std::string &path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception &e) {
    throw ConfigError("config", std::string("cannot parse ") + path + ": " + e.what());
  } catch (const std::runtime_error &e) {
    throw ConfigError("config", e.what());
  }
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

void validate(const ExperimentConfig &cfg) {
  require_sorted(cfg.p_sweep, "p_sweep");
  for (double p : cfg.p_sweep) {
    if (!(p > 1)) {
      throw ConfigError("p_sweep", "exponents must exceed 1");
    }
  }
  if (cfg.p && !(*cfg.p > 1)) {
    throw ConfigError("p", "must exceed 1");
  }
  if (cfg.K < 1) {
    throw ConfigError("K", "must be >= 1");
  }
  require_sorted(cfg.R_sweep, "R_sweep");
  if (!(cfg.R_sweep.front() > 0)) {
    throw ConfigError("R_sweep", "radii must be positive");
  }
  require_sorted(cfg.lambda_grid, "lambda_grid");
  if (!(cfg.horizon > 0)) throw ConfigError("horizon", "must be positive");
  if (cfg.nodes < 100) throw ConfigError("nodes", "must be >= 100");
  if (!(cfg.tol > 0)) throw ConfigError("tol", "must be positive");
  if (!(cfg.s_max > 0)) throw ConfigError("s_max", "must be positive");
  if (!(cfg.r_cmp > 0) || cfg.r_cmp > cfg.s_max) {
    throw ConfigError("r_cmp", "must lie in (0, s_max]");
  }
  if (!(cfg.limit_R > 0)) throw ConfigError("limit_R", "must be positive");
  if (cfg.limit_nodes < 100) throw ConfigError("limit_nodes", "must be >= 100");
  if (cfg.bisect_steps < 0) throw ConfigError("bisect_steps", "must be >= 0");
  if (cfg.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must be nonempty");
  try {
    nodal::validate(cfg.heat);
  } catch (const NumericalError &e) {
    const std::string msg = e.what();
    const auto pos = msg.find("heat options: ");
    const std::string rest = pos == std::string::npos ? msg : msg.substr(pos + 14);
    const auto space = rest.find(' ');
    throw ConfigError("heat." + rest.substr(0, space),
                      space == std::string::npos ? "invalid" : rest.substr(space + 1));
  }
}

const std::vector<std::string> &subcommands() {
  static const std::vector<std::string> names{
      "stationary", "rescale",   "spectrum", "limit-spectrum", "conditions",
      "criterion",  "heatflow",  "sweep",    "full"};
  return names;
}

json run(const std::string &subcommand, const ExperimentConfig &cfg) {
  validate(cfg);
  Runner r(cfg);
  if (subcommand == "stationary") return r.stationary();
  if (subcommand == "rescale") return r.rescale();
  if (subcommand == "spectrum") return r.spectrum();
  if (subcommand == "limit-spectrum") return r.limit_spectrum();
  if (subcommand == "conditions") return r.conditions();
  if (subcommand == "criterion") return r.criterion();
  if (subcommand == "heatflow") return r.heatflow();
  if (subcommand == "sweep") return r.sweep();
  if (subcommand == "full") return r.full();
  throw ConfigError("subcommand", "unknown: " + subcommand);
}

} // namespace nodal::cli
