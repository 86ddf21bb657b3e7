#pragma once

#include <string>
#include <utility>
#include <vector>

#include "skdv/cutoff.hpp"
#include "skdv/estimators.hpp"
#include "skdv/noise.hpp"
#include "skdv/solver.hpp"

namespace skdv {

struct GridConfig {
  double x1 = 0.0;
  double x2 = 2.0 * 3.14159265358979323846;
  int m = 16;
  int n_phys = 0;  // 0 = smallest odd n >= 3m+1
};

/// Initial condition. "zero", "soliton" (12 kappa^2 sech^2(kappa (x-x0)),
/// speed 4 kappa^2), or "modes" (explicit coefficient pairs
/// [index, value]; indices beyond 2m+1 are dropped by the projection).
struct InitialConfig {
  std::string kind = "zero";
  double kappa = 1.0;
  double x0 = 0.0;
  std::vector<std::pair<int, double>> modes;
};

struct JumpModelConfig {
  std::string kind = "none";  // none | additive | bounded_multiplicative
  double gain = 1.0;
  double r0 = 1.0;
  double zeta = 1.0;
  std::vector<std::pair<int, double>> profile_modes = {{2, 1.0}};
};

struct DiffusionModelConfig {
  std::string kind = "none";  // none | diagonal_damped
  double sigma0 = 0.1;
  double r_v = 10.0;
  double alpha = 0.05;
  double v_range = 50.0;
};

struct NoiseConfig {
  IntensityMeasure intensity;
  JumpModelConfig jump;
  DiffusionModelConfig diffusion;
  /// Multiplies jump gain and diffusion amplitude; the negative-control
  /// knob.
  double inflation = 1.0;
};

struct EstimatorConfig {
  std::vector<double> p_values = {1.0, 2.0};
  int n_traj = 100;
  std::vector<int> m_sweep;  // empty = {grid.m}
  std::vector<double> thetas;
  std::string stopping_rule = "running_median";  // | fraction | threshold
  double stopping_param = 0.5;
  double dual_s = 3.0;
  int validator_samples = 1000;
  double validator_scale = 1.0;
};

struct OutputConfig {
  std::string dir = "out";
  std::string trajectory_format = "both";  // text | binary | both
  int verbosity = 1;
};

struct ExperimentConfig {
  GridConfig grid;
  SolverConfig solver;  // solver.m is synced to grid.m on parse
  CutoffSpec::Mode cutoff_mode = CutoffSpec::Mode::norm_based;
  InitialConfig initial;
  NoiseConfig noise;
  EstimatorConfig estimator;
  OutputConfig output;
};

/// Parses and fully validates a JSON config. Required keys: grid.m,
/// solver.dt, solver.horizon. Unknown keys and constraint violations throw
/// ConfigError naming the offending key. parse(serialize(c)) == c.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical serialization (sorted keys, exact round-trip doubles).
std::string serialize_config(const ExperimentConfig& config);

/// Applies one "dotted.path=value" override onto raw JSON text (value
/// parsed as a JSON literal, bare words as strings). Returns the new text.
std::string apply_override(const std::string& json_text,
                           const std::string& assignment);

/// Instantiates grid, models and initial state at dimension m_override
/// (grid.m when m_override <= 0). The solver seed is copied from the
/// config; sweep callers are expected to derive per-run seeds.
EnsembleRun build_run(const ExperimentConfig& config, int m_override = 0);

}  // namespace skdv
