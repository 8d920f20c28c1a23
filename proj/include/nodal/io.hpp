#ifndef NODAL_IO_HPP
#define NODAL_IO_HPP

#include "nodal/common.hpp"
#include "nodal/criteria.hpp"
#include "nodal/heat_flow.hpp"
#include "nodal/lane_emden.hpp"
#include "nodal/liouville.hpp"
#include "nodal/spectrum.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nodal::io {

using nlohmann::json;
namespace fs = std::filesystem;

/// 17 significant digits; nan / inf / -inf for non-finite values.
std::string fmt(double x);
std::string fmt(Wide x);

std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t h);

/// Serializes with sorted keys, two-space indent and 17-digit floats.
/// Non-finite numbers become null.
std::string dump_json(const json &value);

/// Writes to a temporary sibling and renames, creating parent directories.
void write_text(const fs::path &path, const std::string &content);
std::string read_text(const fs::path &path);

/// A CSV table plus its gnuplot mirror (same stem, .dat, whitespace
/// delimited, header as comment lines). An optional JSON header goes on the
/// first line of both files, prefixed with "# ".
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json header;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string csv() const;
  std::string dat() const;
};

void write_table(const fs::path &csv_path, const Table &table);

// ---- stationary cache ----

/// Cache directory: explicit value if nonempty, else $NODAL_CACHE_DIR, else
/// ".nodal_cache" under the working directory.
fs::path cache_dir(const std::string &configured);
std::string cache_name(double p, int K, double tol, Eigen::Index nodes);

/// Header JSON carries the scalar fields and a checksum over the rest of
/// the file; columns are r, u, du, log_r.
std::string serialize_stationary(const StationarySolution &sol);
/// Throws CacheCorrupt on checksum mismatch or malformed content.
StationarySolution parse_stationary(const std::string &text);

void save_stationary(const fs::path &path, const StationarySolution &sol);
StationarySolution load_stationary(const fs::path &path);

struct CacheResult {
  StationarySolution solution;
  bool hit = false;
  bool rebuilt_after_corruption = false;
  fs::path path;
};

/// Loads the cached solution for (p, K, tol, nodes) or builds and stores it.
CacheResult cached_stationary(double p, int K, const BuildOptions &build,
                              const fs::path &dir);

// ---- artifacts ----

Table profile_table(const RescaledProfile &profile);
/// Columns r, phi, log_r (r underflows double for deep grids; log_r does not).
Table eigenpair_table(const EigenPair &pair);
Table rescaled_eigen_table(const RescaledEigenPair &pair);
/// rows p, columns R
Table condition_matrix(const std::vector<double> &p_sweep,
                       const std::vector<double> &R_sweep,
                       const std::vector<std::vector<double>> &values);
Table trajectory_table(const HeatTrajectory &traj);

json to_json(const StationarySolution &sol);
json to_json(const EigenConvergenceReport &report);
json to_json(const ConditionReport &report);
json to_json(const HeatTrajectory &traj);
json to_json(const WindowReport &report);

/// Doubles with NaN mapped to null.
json number(double x);

} // namespace nodal::io

#endif // NODAL_IO_HPP
