#include "nodal/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nodal::io {

namespace {

std::string nonfinite(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  return x > 0 ? "inf" : "-inf";
}

void dump_value(const json &v, int indent, int depth, std::string &out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (pretty) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (v.type()) {
  case json::value_t::null:
    out += "null";
    return;
  case json::value_t::boolean:
    out += v.get<bool>() ? "true" : "false";
    return;
  case json::value_t::number_integer:
    out += std::to_string(v.get<std::int64_t>());
    return;
  case json::value_t::number_unsigned:
    out += std::to_string(v.get<std::uint64_t>());
    return;
  case json::value_t::number_float: {
    const double x = v.get<double>();
    out += std::isfinite(x) ? fmt(x) : "null";
    return;
  }
  case json::value_t::string:
    out += json(v.get<std::string>()).dump();
    return;
  case json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    const bool flat = std::all_of(v.begin(), v.end(), [](const json &e) {
      return e.is_primitive();
    });
    out += '[';
    bool first = true;
    for (const auto &e : v) {
      if (!first) {
        out += flat || !pretty ? (pretty ? ", " : ",") : ",";
      }
      if (!flat) {
        newline(depth + 1);
      }
      dump_value(e, indent, depth + 1, out);
      first = false;
    }
    if (!flat) {
      newline(depth);
    }
    out += ']';
    return;
  }
  case json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) {
        out += ',';
      }
      newline(depth + 1);
      out += json(it.key()).dump();
      out += pretty ? ": " : ":";
      dump_value(it.value(), indent, depth + 1, out);
      first = false;
    }
    newline(depth);
    out += '}';
    return;
  }
  default:
    out += "null";
  }
}

std::string compact(const json &v) {
  std::string out;
  dump_value(v, -1, 0, out);
  return out;
}

std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) {
    parts.push_back(cur);
  }
  return parts;
}

double parse_number(const std::string &text) {
  char *end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw NumericalError(ErrorKind::CacheCorrupt, "malformed number: " + text);
  }
  return x;
}

} // namespace

std::string fmt(double x) {
  if (!std::isfinite(x)) {
    return nonfinite(x);
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(Wide x) {
  if (!std::isfinite(x)) {
    return nonfinite(static_cast<double>(x));
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17Lg", x);
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump_json(const json &value) {
  std::string out;
  dump_value(value, 2, 0, out);
  out += '\n';
  return out;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_text(const fs::path &path, const std::string &content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out << content;
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Table::csv() const {
  std::string out;
  if (!header.is_null()) {
    out += "# " + compact(header) + "\n";
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out += (c ? "," : "") + columns[c];
  }
  out += '\n';
  for (const auto &row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += (c ? "," : "") + row[c];
    }
    out += '\n';
  }
  return out;
}

std::string Table::dat() const {
  std::string out;
  if (!header.is_null()) {
    out += "# " + compact(header) + "\n";
  }
  out += "#";
  for (const auto &c : columns) {
    out += " " + c;
  }
  out += '\n';
  for (const auto &row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += (c ? " " : "") + row[c];
    }
    out += '\n';
  }
  return out;
}

void write_table(const fs::path &csv_path, const Table &table) {
  write_text(csv_path, table.csv());
  fs::path dat = csv_path;
  dat.replace_extension(".dat");
  write_text(dat, table.dat());
}

fs::path cache_dir(const std::string &configured) {
  if (!configured.empty()) {
    return configured;
  }
  if (const char *env = std::getenv("NODAL_CACHE_DIR"); env && *env) {
    return env;
  }
  return ".nodal_cache";
}

std::string cache_name(double p, int K, double tol, Eigen::Index nodes) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "stationary_p%.12g_K%d_tol%.6g_n%ld.csv", p, K,
                tol, static_cast<long>(nodes));
  return buf;
}

std::string serialize_stationary(const StationarySolution &sol) {
  json h;
  h["format"] = "nodal-stationary-1";
  h["p"] = sol.p;
  h["K"] = sol.K;
  h["tol"] = sol.tol;
  h["nodes"] = static_cast<std::int64_t>(sol.grid.size());
  h["nodal_radius_count"] = static_cast<std::int64_t>(sol.nodal_radii.size());
  h["nodal_radii"] = sol.nodal_radii;
  json ext = json::array();
  for (const auto &e : sol.extrema) {
    ext.push_back(json::array({e.r, e.u}));
  }
  h["extrema"] = ext;
  h["u_max"] = sol.u_max;
  h["u_min"] = sol.u_min;
  h["r_min"] = sol.r_min;
  h["log_mu_plus"] = sol.log_mu_plus;
  h["log_mu_minus"] = sol.log_mu_minus;
  h["mu_plus"] = sol.mu_plus();
  h["mu_minus"] = sol.mu_minus();

  std::string body = "r,u,du,log_r\n";
  for (Eigen::Index i = 0; i < sol.grid.size(); ++i) {
    body += fmt(sol.grid.r(i)) + "," + fmt(sol.u(i)) + "," + fmt(sol.du(i)) + "," +
            fmt(sol.grid.log_r(i)) + "\n";
  }
  h["checksum"] = hex64(fnv1a(compact(h) + "\n" + body));
  return "# " + compact(h) + "\n" + body;
}

// JSON has no infinities; null maps back to `missing`
static double header_number(const json &h, const char *key,
                            double missing = std::numeric_limits<double>::quiet_NaN()) {
  const json &v = h.at(key);
  return v.is_null() ? missing : v.get<double>();
}

StationarySolution parse_stationary(const std::string &text) {
  const auto eol = text.find('\n');
  if (text.rfind("# ", 0) != 0 || eol == std::string::npos) {
    throw NumericalError(ErrorKind::CacheCorrupt, "missing JSON header line");
  }
  json h;
  try {
    h = json::parse(text.substr(2, eol - 2));
  } catch (const std::exception &e) {
    throw NumericalError(ErrorKind::CacheCorrupt,
                         std::string("unreadable header: ") + e.what());
  }
  if (!h.is_object() || !h.contains("checksum")) {
    throw NumericalError(ErrorKind::CacheCorrupt, "header has no checksum");
  }
  const std::string body = text.substr(eol + 1);
  const std::string stored = h["checksum"].get<std::string>();
  h.erase("checksum");
  if (hex64(fnv1a(compact(h) + "\n" + body)) != stored) {
    throw NumericalError(ErrorKind::CacheCorrupt, "checksum mismatch");
  }
  StationarySolution sol;
  try {
    sol.p = h.at("p").get<double>();
    sol.K = h.at("K").get<int>();
    sol.tol = h.at("tol").get<double>();
    sol.nodal_radii = h.at("nodal_radii").get<std::vector<double>>();
    for (const auto &e : h.at("extrema")) {
      sol.extrema.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    }
    sol.u_max = header_number(h, "u_max");
    sol.u_min = header_number(h, "u_min");
    sol.r_min = header_number(h, "r_min");
    sol.log_mu_plus = header_number(h, "log_mu_plus");
    // K = 1 has no negative part: mu_minus is infinite
    sol.log_mu_minus =
        header_number(h, "log_mu_minus", std::numeric_limits<double>::infinity());
  } catch (const json::exception &e) {
    throw NumericalError(ErrorKind::CacheCorrupt,
                         std::string("header field: ") + e.what());
  }
  std::istringstream in(body);
  std::string line;
  std::getline(in, line);
  if (line != "r,u,du,log_r") {
    throw NumericalError(ErrorKind::CacheCorrupt, "unexpected columns: " + line);
  }
  std::vector<double> log_r, u, du;
  while (std::getline(in, line)) {
    const auto parts = split(line, ',');
    if (parts.size() != 4) {
      throw NumericalError(ErrorKind::CacheCorrupt, "bad row: " + line);
    }
    u.push_back(parse_number(parts[1]));
    du.push_back(parse_number(parts[2]));
    log_r.push_back(parse_number(parts[3]));
  }
  const auto n = static_cast<Eigen::Index>(log_r.size());
  if (n < 3 || n != h.value("nodes", std::int64_t{0})) {
    throw NumericalError(ErrorKind::CacheCorrupt, "row count does not match header");
  }
  sol.grid = RadialGrid(Eigen::Map<Eigen::VectorXd>(log_r.data(), n));
  sol.u = Eigen::Map<Eigen::VectorXd>(u.data(), n);
  sol.du = Eigen::Map<Eigen::VectorXd>(du.data(), n);
  return sol;
}

void save_stationary(const fs::path &path, const StationarySolution &sol) {
  write_text(path, serialize_stationary(sol));
}

StationarySolution load_stationary(const fs::path &path) {
  return parse_stationary(read_text(path));
}

CacheResult cached_stationary(double p, int K, const BuildOptions &build,
                              const fs::path &dir) {
  CacheResult res;
  res.path = dir / cache_name(p, K, build.shoot.tol, build.nodes);
  if (fs::exists(res.path)) {
    try {
      res.solution = load_stationary(res.path);
      if (res.solution.p == p && res.solution.K == K &&
          res.solution.tol == build.shoot.tol &&
          res.solution.grid.size() == build.nodes) {
        res.hit = true;
        return res;
      }
      throw NumericalError(ErrorKind::CacheCorrupt, "key fields do not match");
    } catch (const NumericalError &e) {
      if (e.kind() != ErrorKind::CacheCorrupt) {
        throw;
      }
      std::cerr << "cache: " << res.path.string() << ": " << e.what()
                << "; rebuilding\n";
      res.rebuilt_after_corruption = true;
    }
  }
  res.solution = build_stationary(p, K, build);
  save_stationary(res.path, res.solution);
  return res;
}

Table profile_table(const RescaledProfile &profile) {
  Table t;
  t.columns = {"s", "v_p", "dv_p", "U", "dU"};
  t.header = {{"p", profile.p}, {"K", profile.K}, {"s_max", profile.s_max}};
  for (Eigen::Index i = 0; i < profile.s.size(); ++i) {
    const double s = profile.s(i);
    t.add({fmt(s), fmt(profile.v(i)), fmt(profile.dv(i)),
           fmt(LiouvilleBubble::value(s)), fmt(LiouvilleBubble::derivative(s))});
  }
  return t;
}

Table eigenpair_table(const EigenPair &pair) {
  Table t;
  t.columns = {"r", "phi", "log_r"};
  t.header = {{"lambda", fmt(pair.lambda)},
              {"residual", static_cast<double>(pair.residual)},
              {"iterations", pair.iterations}};
  for (Eigen::Index i = 0; i < pair.grid.size(); ++i) {
    t.add({fmt(pair.grid.r(i)), fmt(pair.phi(i)),
           i == 0 ? std::string("-inf") : fmt(pair.grid.log_r(i))});
  }
  return t;
}

Table rescaled_eigen_table(const RescaledEigenPair &pair) {
  Table t;
  t.columns = {"s", "phi_tilde", "V_p"};
  t.header = {{"lambda_tilde", pair.lambda_tilde}, {"log_mu", pair.log_mu}};
  for (Eigen::Index i = 0; i < pair.grid.size(); ++i) {
    t.add({fmt(pair.grid.r(i)), fmt(pair.phi_tilde(i)), fmt(pair.potential(i))});
  }
  return t;
}

Table condition_matrix(const std::vector<double> &p_sweep,
                       const std::vector<double> &R_sweep,
                       const std::vector<std::vector<double>> &values) {
  Table t;
  t.columns.push_back("p");
  for (double R : R_sweep) {
    t.columns.push_back("R=" + fmt(R));
  }
  for (std::size_t i = 0; i < p_sweep.size(); ++i) {
    std::vector<std::string> row{fmt(p_sweep[i])};
    for (double x : values[i]) {
      row.push_back(fmt(x));
    }
    t.add(std::move(row));
  }
  return t;
}

Table trajectory_table(const HeatTrajectory &tr) {
  Table t;
  t.columns = {"t", "sup_norm", "energy", "t_scaled", "dt_scaled", "peak_log_r",
               "peak_sign"};
  t.header = {{"p", tr.p},
              {"K", tr.K},
              {"lambda", tr.lambda},
              {"log_time_scale", tr.log_time_scale},
              {"classification", to_string(tr.classification.outcome)}};
  for (std::size_t j = 0; j < tr.sup_norm.size(); ++j) {
    t.add({fmt(tr.t(j)), fmt(tr.sup_norm[j]), fmt(tr.energy[j]),
           fmt(tr.t_scaled[j]), fmt(tr.dt_scaled[j]), fmt(tr.peak_log_r[j]),
           std::to_string(tr.peak_sign[j])});
  }
  return t;
}

json to_json(const StationarySolution &sol) {
  json j;
  j["p"] = sol.p;
  j["K"] = sol.K;
  j["tol"] = sol.tol;
  j["nodes"] = static_cast<std::int64_t>(sol.grid.size());
  j["u_max"] = sol.u_max;
  j["u_min"] = sol.u_min;
  j["r_min"] = sol.r_min;
  j["nodal_radii"] = sol.nodal_radii;
  j["log_mu_plus"] = sol.log_mu_plus;
  j["log_mu_minus"] = sol.log_mu_minus;
  j["interior_sign_changes"] = sol.interior_sign_changes();
  return j;
}

json to_json(const EigenConvergenceReport &rep) {
  json j;
  j["K"] = rep.K;
  j["lambda_star"] = rep.lambda_star;
  json rows = json::array();
  for (const auto &r : rep.rows) {
    rows.push_back({{"p", r.p},
                    {"lambda_tilde", r.lambda_tilde},
                    {"lambda_error", r.lambda_error},
                    {"phi_l2_error", r.phi_l2_error},
                    {"gap_integral", r.gap_integral}});
  }
  j["rows"] = rows;
  j["lambda_error_decreasing"] = rep.lambda_error_decreasing;
  j["phi_error_decreasing"] = rep.phi_error_decreasing;
  return j;
}

namespace {

json table_json(const std::vector<std::vector<double>> &t) {
  json out = json::array();
  for (const auto &row : t) {
    json r = json::array();
    for (double x : row) {
      r.push_back(number(x));
    }
    out.push_back(r);
  }
  return out;
}

json vec_json(const std::vector<double> &v) {
  json out = json::array();
  for (double x : v) {
    out.push_back(number(x));
  }
  return out;
}

} // namespace

json to_json(const ConditionReport &rep) {
  json j;
  j["K"] = rep.K;
  j["p_sweep"] = rep.p_sweep;
  j["R_sweep"] = rep.R_sweep;
  j["S_table"] = table_json(rep.S_table);
  j["M_table"] = table_json(rep.M_table);
  j["Mprime_table"] = table_json(rep.Mprime_table);
  j["ratio"] = vec_json(rep.ratio);
  j["mu_ratio"] = vec_json(rep.mu_ratio);
  j["outer_sup"] = vec_json(rep.outer_sup);
  j["P31_sup"] = vec_json(rep.P31_sup);
  j["energy_gradient"] = vec_json(rep.energy_gradient);
  j["energy_potential"] = vec_json(rep.energy_potential);
  j["criterion"] = vec_json(rep.criterion);
  j["normalized_criterion"] = vec_json(rep.normalized_criterion);
  j["identity_residual"] = vec_json(rep.identity_residual);
  j["lambda_tilde"] = vec_json(rep.lambda_tilde);
  j["limit_target"] = number(rep.limit_target);
  j["energy_bound"] = number(rep.energy_bound);
  j["p_star"] = number(rep.p_star);
  j["S_tail_gap"] = vec_json(rep.S_tail_gap);
  j["decomposition_defect"] = number(rep.decomposition_defect);
  j["P31_chain_excess"] = number(rep.P31_chain_excess);
  j["flags"] = {{"energy_bounded", rep.energy_bounded},
                {"ratio_decreasing", rep.ratio_decreasing},
                {"mu_ratio_decreasing", rep.mu_ratio_decreasing},
                {"S_decreasing_in_p", rep.S_decreasing_in_p},
                {"Mprime_decreasing_in_p", rep.Mprime_decreasing_in_p},
                {"Mprime_decreasing_in_R", rep.Mprime_decreasing_in_R},
                {"Mprime_decreasing_jointly", rep.Mprime_decreasing_jointly},
                {"outer_sup_below_half", rep.outer_sup_below_half},
                {"P31_bounded", rep.P31_bounded},
                {"criterion_positive", rep.criterion_positive}};
  return j;
}

json to_json(const HeatTrajectory &tr) {
  json j;
  j["p"] = tr.p;
  j["K"] = tr.K;
  j["lambda"] = tr.lambda;
  j["classification"] = to_string(tr.classification.outcome);
  j["T_est"] = number(tr.classification.T_est);
  j["T_scaled"] = number(static_cast<double>(tr.classification.T_scaled));
  j["note"] = tr.classification.note;
  j["stop"] = to_string(tr.stop);
  j["samples"] = static_cast<std::int64_t>(tr.sup_norm.size());
  j["final_sup_norm"] = tr.sup_norm.empty() ? json(nullptr) : number(tr.sup_norm.back());
  j["max_stationary_deviation"] = number(tr.max_stationary_deviation);
  j["final_stationary_residual"] = number(tr.final_stationary_residual);
  j["log_time_scale"] = tr.log_time_scale;
  j["diagnostics"] = {
      {"accepted", tr.accepted},
      {"rejected", tr.rejected},
      {"solve_failures", tr.solve_failures},
      {"nodes", static_cast<std::int64_t>(tr.nodes)},
      {"final_dt_scaled",
       tr.dt_scaled.empty() ? json(nullptr) : json(fmt(tr.dt_scaled.back()))},
      {"stationarity_residual", number(tr.stationarity_residual)}};
  return j;
}

json to_json(const WindowReport &rep) {
  json j;
  j["p"] = rep.p;
  j["K"] = rep.K;
  j["horizon"] = rep.horizon;
  json entries = json::array();
  for (const auto &e : rep.entries) {
    entries.push_back({{"lambda", e.lambda},
                       {"classification", to_string(e.outcome)},
                       {"T_est", number(e.T_est)},
                       {"T_scaled", number(static_cast<double>(e.T_scaled))},
                       {"refined", e.refined}});
  }
  j["entries"] = entries;
  j["window"] = {number(rep.window_low), number(rep.window_high)};
  j["lower_edge"] = {number(rep.lower_edge_a), number(rep.lower_edge_b)};
  j["upper_edge"] = {number(rep.upper_edge_a), number(rep.upper_edge_b)};
  j["small_lambda_global"] = number(rep.small_lambda_global);
  json flags = json::array();
  for (const auto &f : rep.monotonicity_flags) {
    flags.push_back({f.first, f.second});
  }
  j["monotonicity_flags"] = flags;
  return j;
}

} // namespace nodal::io
