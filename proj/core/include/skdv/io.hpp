#pragma once

#include <string>
#include <vector>

#include "skdv/estimators.hpp"
#include "skdv/noise.hpp"
#include "skdv/solver.hpp"

namespace skdv::io {

/// Shortest exact round-trip decimal rendering ("%.17g" trimmed); all text
/// output funnels through this so artifacts are byte-stable.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Columnar text trajectory: "# columns: t c0 ... c<2m>" then one row per
/// stored time.
void write_trajectory_text(const std::string& path, const Trajectory& traj);

/// Binary trajectory frames. Little-endian layout:
///   bytes 0..7   magic "SKDVTRJ\0"
///   u32          format version
///   u32          coefficient count (2m+1)
///   u64          record count
///   records      f64 time, then (2m+1) f64 coefficients
/// Jump log and noise are audit-text-only; frames carry the path itself.
void write_trajectory_binary(const std::string& path, const Trajectory& traj);

struct BinaryTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};
BinaryTrajectory read_trajectory_binary(const std::string& path);

/// Audit listing of the jump events: one "t mark_index" row per event.
void write_events_text(const std::string& path,
                       const std::vector<AppliedJump>& jump_log);

/// Audit listing of the Wiener increments: one row per step, one column
/// per mode.
void write_wiener_text(const std::string& path,
                       const std::vector<Eigen::VectorXd>& increments);

/// Columnar data behind the moment report: "m p sup_moment sup_se" plus a
/// "v" block "m v_integral v_se".
void write_moments_data(const std::string& path, const EnsembleStatistics& s);

/// Columnar data behind the increment-scaling report:
/// "theta mean std_error".
void write_aldous_data(const std::string& path, const AldousReport& r);

/// Manifest: tool identity and versions, the command, and the resolved
/// config. Contains no timestamps or absolute paths, so a replay
/// regenerates it byte for byte.
std::string make_manifest(const std::string& command,
                          const std::string& config_json);

struct ManifestInfo {
  std::string command;
  std::string config_json;
  std::string seed_rule;
  int config_schema = 0;
};
ManifestInfo parse_manifest(const std::string& manifest_json);

}  // namespace skdv::io
