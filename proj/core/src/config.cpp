#include "skdv/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include "skdv/errors.hpp"

namespace skdv {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& constraint) {
  throw ConfigError(key, constraint);
}

void check_known_keys(const json& j, const std::string& path,
                      const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "must be an object");
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      fail(path + "." + item.key(), "unknown key");
    }
  }
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_double(const json& j, const std::string& path,
                  const std::string& key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(path + "." + key, "must be a number");
  return v->get<double>();
}

double require_double(const json& j, const std::string& path,
                      const std::string& key) {
  const json* v = find(j, key);
  if (!v) fail(path + "." + key, "required key is missing");
  if (!v->is_number()) fail(path + "." + key, "must be a number");
  return v->get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key,
            int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(path + "." + key, "must be an integer");
  return v->get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path,
                      const std::string& key, std::uint64_t fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer() ||
      (v->is_number_integer() && !v->is_number_unsigned() &&
       v->get<long long>() < 0)) {
    fail(path + "." + key, "must be a nonnegative integer");
  }
  return v->get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key,
              bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(path + "." + key, "must be a boolean");
  return v->get<bool>();
}

std::string get_string(const json& j, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path + "." + key, "must be a string");
  return v->get<std::string>();
}

std::vector<double> get_double_vector(const json& j, const std::string& path,
                                      const std::string& key,
                                      std::vector<double> fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_array()) fail(path + "." + key, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) fail(path + "." + key, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> get_int_vector(const json& j, const std::string& path,
                                const std::string& key,
                                std::vector<int> fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_array()) fail(path + "." + key, "must be an array of integers");
  std::vector<int> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer()) {
      fail(path + "." + key, "must be an array of integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<std::pair<int, double>> get_pair_list(
    const json& j, const std::string& path, const std::string& key,
    std::vector<std::pair<int, double>> fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_array()) {
    fail(path + "." + key, "must be an array of [index, value] pairs");
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& e : *v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number()) {
      fail(path + "." + key, "must be an array of [index, value] pairs");
    }
    out.emplace_back(e[0].get<int>(), e[1].get<double>());
  }
  return out;
}

Scheme parse_scheme(const std::string& s, const std::string& key) {
  if (s == "exponential_euler") return Scheme::exponential_euler;
  if (s == "exponential_rk4") return Scheme::exponential_rk4;
  if (s == "semi_implicit_cn") return Scheme::semi_implicit_cn;
  fail(key,
       "must be one of exponential_euler, exponential_rk4, semi_implicit_cn");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::exponential_euler: return "exponential_euler";
    case Scheme::exponential_rk4: return "exponential_rk4";
    case Scheme::semi_implicit_cn: return "semi_implicit_cn";
  }
  return "exponential_rk4";
}

CutoffSpec::Mode parse_cutoff(const std::string& s, const std::string& key) {
  if (s == "norm_based") return CutoffSpec::Mode::norm_based;
  if (s == "pointwise") return CutoffSpec::Mode::pointwise;
  if (s == "disabled") return CutoffSpec::Mode::disabled;
  fail(key, "must be one of norm_based, pointwise, disabled");
}

std::string cutoff_name(CutoffSpec::Mode m) {
  switch (m) {
    case CutoffSpec::Mode::norm_based: return "norm_based";
    case CutoffSpec::Mode::pointwise: return "pointwise";
    case CutoffSpec::Mode::disabled: return "disabled";
  }
  return "norm_based";
}

json pair_list_json(const std::vector<std::pair<int, double>>& v) {
  json out = json::array();
  for (const auto& [i, x] : v) out.push_back(json::array({i, x}));
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("<config>", std::string("invalid JSON: ") + e.what());
  }
  check_known_keys(root, "config",
                   {"grid", "solver", "initial", "noise", "estimator",
                    "output"});

  ExperimentConfig cfg;

  const json* grid = find(root, "grid");
  if (!grid) fail("grid", "required section is missing");
  check_known_keys(*grid, "grid", {"x1", "x2", "m", "n_phys"});
  cfg.grid.x1 = get_double(*grid, "grid", "x1", cfg.grid.x1);
  cfg.grid.x2 = get_double(*grid, "grid", "x2", cfg.grid.x2);
  cfg.grid.m = get_int(*grid, "grid", "m", 0);
  cfg.grid.n_phys = get_int(*grid, "grid", "n_phys", 0);
  if (cfg.grid.m < 1) fail("grid.m", "required, must be an integer >= 1");
  if (!(cfg.grid.x2 > cfg.grid.x1)) fail("grid.x2", "must be > grid.x1");
  if (cfg.grid.n_phys != 0 && cfg.grid.n_phys < 2 * cfg.grid.m + 1) {
    fail("grid.n_phys", "must be 0 (auto) or >= 2m+1");
  }

  const json* solver = find(root, "solver");
  if (!solver) fail("solver", "required section is missing");
  check_known_keys(*solver, "solver",
                   {"dt", "horizon", "stop_radius", "scheme", "seed",
                    "record_noise", "cutoff"});
  cfg.solver.dt = require_double(*solver, "solver", "dt");
  cfg.solver.horizon = require_double(*solver, "solver", "horizon");
  cfg.solver.stop_radius =
      get_double(*solver, "solver", "stop_radius", 0.0);
  cfg.solver.scheme = parse_scheme(
      get_string(*solver, "solver", "scheme", "exponential_rk4"),
      "solver.scheme");
  cfg.solver.seed = get_u64(*solver, "solver", "seed", 0);
  cfg.solver.record_noise =
      get_bool(*solver, "solver", "record_noise", true);
  cfg.cutoff_mode = parse_cutoff(
      get_string(*solver, "solver", "cutoff", "norm_based"), "solver.cutoff");
  if (!(cfg.solver.dt > 0.0)) fail("solver.dt", "must be > 0");
  if (!(cfg.solver.horizon >= 0.0)) fail("solver.horizon", "must be >= 0");
  cfg.solver.m = cfg.grid.m;

  if (const json* initial = find(root, "initial")) {
    check_known_keys(*initial, "initial", {"kind", "kappa", "x0", "modes"});
    cfg.initial.kind = get_string(*initial, "initial", "kind", "zero");
    cfg.initial.kappa = get_double(*initial, "initial", "kappa", 1.0);
    cfg.initial.x0 = get_double(*initial, "initial", "x0", 0.0);
    cfg.initial.modes = get_pair_list(*initial, "initial", "modes", {});
    if (cfg.initial.kind != "zero" && cfg.initial.kind != "soliton" &&
        cfg.initial.kind != "modes") {
      fail("initial.kind", "must be one of zero, soliton, modes");
    }
    if (cfg.initial.kind == "soliton" && !(cfg.initial.kappa > 0.0)) {
      fail("initial.kappa", "must be > 0");
    }
    for (const auto& [i, x] : cfg.initial.modes) {
      if (i < 0) fail("initial.modes", "coefficient indices must be >= 0");
      (void)x;
    }
  }

  if (const json* noise = find(root, "noise")) {
    check_known_keys(*noise, "noise",
                     {"intensity", "jump_model", "diffusion_model",
                      "inflation"});
    if (const json* intensity = find(*noise, "intensity")) {
      check_known_keys(*intensity, "noise.intensity", {"marks", "rates"});
      cfg.noise.intensity.marks =
          get_double_vector(*intensity, "noise.intensity", "marks", {});
      cfg.noise.intensity.rates =
          get_double_vector(*intensity, "noise.intensity", "rates", {});
      if (cfg.noise.intensity.marks.size() !=
          cfg.noise.intensity.rates.size()) {
        fail("noise.intensity.rates", "must have as many entries as marks");
      }
      for (double r : cfg.noise.intensity.rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
          fail("noise.intensity.rates", "entries must be finite and >= 0");
        }
      }
    }
    if (const json* jump = find(*noise, "jump_model")) {
      check_known_keys(*jump, "noise.jump_model",
                       {"kind", "gain", "r0", "zeta", "profile_modes"});
      cfg.noise.jump.kind =
          get_string(*jump, "noise.jump_model", "kind", "none");
      cfg.noise.jump.gain =
          get_double(*jump, "noise.jump_model", "gain", 1.0);
      cfg.noise.jump.r0 = get_double(*jump, "noise.jump_model", "r0", 1.0);
      cfg.noise.jump.zeta =
          get_double(*jump, "noise.jump_model", "zeta", 1.0);
      cfg.noise.jump.profile_modes = get_pair_list(
          *jump, "noise.jump_model", "profile_modes", {{2, 1.0}});
      if (cfg.noise.jump.kind != "none" && cfg.noise.jump.kind != "additive" &&
          cfg.noise.jump.kind != "bounded_multiplicative") {
        fail("noise.jump_model.kind",
             "must be one of none, additive, bounded_multiplicative");
      }
      if (!(cfg.noise.jump.r0 > 0.0)) {
        fail("noise.jump_model.r0", "must be > 0");
      }
      if (!(cfg.noise.jump.zeta > 0.0)) {
        fail("noise.jump_model.zeta", "must be > 0");
      }
    }
    if (const json* diff = find(*noise, "diffusion_model")) {
      check_known_keys(*diff, "noise.diffusion_model",
                       {"kind", "sigma0", "r_v", "alpha", "v_range"});
      cfg.noise.diffusion.kind =
          get_string(*diff, "noise.diffusion_model", "kind", "none");
      cfg.noise.diffusion.sigma0 =
          get_double(*diff, "noise.diffusion_model", "sigma0", 0.1);
      cfg.noise.diffusion.r_v =
          get_double(*diff, "noise.diffusion_model", "r_v", 10.0);
      cfg.noise.diffusion.alpha =
          get_double(*diff, "noise.diffusion_model", "alpha", 0.05);
      cfg.noise.diffusion.v_range =
          get_double(*diff, "noise.diffusion_model", "v_range", 50.0);
      if (cfg.noise.diffusion.kind != "none" &&
          cfg.noise.diffusion.kind != "diagonal_damped") {
        fail("noise.diffusion_model.kind",
             "must be one of none, diagonal_damped");
      }
      if (!(cfg.noise.diffusion.r_v > 0.0)) {
        fail("noise.diffusion_model.r_v", "must be > 0");
      }
      if (!(cfg.noise.diffusion.sigma0 >= 0.0)) {
        fail("noise.diffusion_model.sigma0", "must be >= 0");
      }
    }
    cfg.noise.inflation = get_double(*noise, "noise", "inflation", 1.0);
    if (!(cfg.noise.inflation > 0.0)) fail("noise.inflation", "must be > 0");
  }

  if (const json* est = find(root, "estimator")) {
    check_known_keys(*est, "estimator",
                     {"p_values", "n_traj", "m_sweep", "thetas",
                      "stopping_rule", "stopping_param", "dual_s",
                      "validator_samples", "validator_scale"});
    cfg.estimator.p_values =
        get_double_vector(*est, "estimator", "p_values", {1.0, 2.0});
    cfg.estimator.n_traj = get_int(*est, "estimator", "n_traj", 100);
    cfg.estimator.m_sweep = get_int_vector(*est, "estimator", "m_sweep", {});
    cfg.estimator.thetas = get_double_vector(*est, "estimator", "thetas", {});
    cfg.estimator.stopping_rule =
        get_string(*est, "estimator", "stopping_rule", "running_median");
    cfg.estimator.stopping_param =
        get_double(*est, "estimator", "stopping_param", 0.5);
    cfg.estimator.dual_s = get_double(*est, "estimator", "dual_s", 3.0);
    cfg.estimator.validator_samples =
        get_int(*est, "estimator", "validator_samples", 1000);
    cfg.estimator.validator_scale =
        get_double(*est, "estimator", "validator_scale", 1.0);
    for (double p : cfg.estimator.p_values) {
      if (!(p > 0.0)) fail("estimator.p_values", "entries must be > 0");
    }
    if (cfg.estimator.n_traj < 1) fail("estimator.n_traj", "must be >= 1");
    for (int m : cfg.estimator.m_sweep) {
      if (m < 1) fail("estimator.m_sweep", "entries must be >= 1");
    }
    for (double t : cfg.estimator.thetas) {
      if (!(t > 0.0)) fail("estimator.thetas", "entries must be > 0");
    }
    if (cfg.estimator.stopping_rule != "running_median" &&
        cfg.estimator.stopping_rule != "fraction" &&
        cfg.estimator.stopping_rule != "threshold") {
      fail("estimator.stopping_rule",
           "must be one of running_median, fraction, threshold");
    }
    if (!(cfg.estimator.dual_s > 0.0)) fail("estimator.dual_s", "must be > 0");
    if (cfg.estimator.validator_samples < 1) {
      fail("estimator.validator_samples", "must be >= 1");
    }
    if (!(cfg.estimator.validator_scale > 0.0)) {
      fail("estimator.validator_scale", "must be > 0");
    }
  }

  if (const json* out = find(root, "output")) {
    check_known_keys(*out, "output", {"dir", "trajectory_format",
                                      "verbosity"});
    cfg.output.dir = get_string(*out, "output", "dir", "out");
    cfg.output.trajectory_format =
        get_string(*out, "output", "trajectory_format", "both");
    cfg.output.verbosity = get_int(*out, "output", "verbosity", 1);
    if (cfg.output.trajectory_format != "text" &&
        cfg.output.trajectory_format != "binary" &&
        cfg.output.trajectory_format != "both" &&
        cfg.output.trajectory_format != "none") {
      fail("output.trajectory_format",
           "must be one of text, binary, both, none");
    }
    if (cfg.output.verbosity < 0) fail("output.verbosity", "must be >= 0");
  }

  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json root;
  root["grid"] = {{"x1", cfg.grid.x1},
                  {"x2", cfg.grid.x2},
                  {"m", cfg.grid.m},
                  {"n_phys", cfg.grid.n_phys}};
  root["solver"] = {{"dt", cfg.solver.dt},
                    {"horizon", cfg.solver.horizon},
                    {"stop_radius", cfg.solver.stop_radius},
                    {"scheme", scheme_name(cfg.solver.scheme)},
                    {"seed", cfg.solver.seed},
                    {"record_noise", cfg.solver.record_noise},
                    {"cutoff", cutoff_name(cfg.cutoff_mode)}};
  root["initial"] = {{"kind", cfg.initial.kind},
                     {"kappa", cfg.initial.kappa},
                     {"x0", cfg.initial.x0},
                     {"modes", pair_list_json(cfg.initial.modes)}};
  root["noise"] = {
      {"intensity",
       {{"marks", cfg.noise.intensity.marks},
        {"rates", cfg.noise.intensity.rates}}},
      {"jump_model",
       {{"kind", cfg.noise.jump.kind},
        {"gain", cfg.noise.jump.gain},
        {"r0", cfg.noise.jump.r0},
        {"zeta", cfg.noise.jump.zeta},
        {"profile_modes", pair_list_json(cfg.noise.jump.profile_modes)}}},
      {"diffusion_model",
       {{"kind", cfg.noise.diffusion.kind},
        {"sigma0", cfg.noise.diffusion.sigma0},
        {"r_v", cfg.noise.diffusion.r_v},
        {"alpha", cfg.noise.diffusion.alpha},
        {"v_range", cfg.noise.diffusion.v_range}}},
      {"inflation", cfg.noise.inflation}};
  root["estimator"] = {{"p_values", cfg.estimator.p_values},
                       {"n_traj", cfg.estimator.n_traj},
                       {"m_sweep", cfg.estimator.m_sweep},
                       {"thetas", cfg.estimator.thetas},
                       {"stopping_rule", cfg.estimator.stopping_rule},
                       {"stopping_param", cfg.estimator.stopping_param},
                       {"dual_s", cfg.estimator.dual_s},
                       {"validator_samples", cfg.estimator.validator_samples},
                       {"validator_scale", cfg.estimator.validator_scale}};
  root["output"] = {{"dir", cfg.output.dir},
                    {"trajectory_format", cfg.output.trajectory_format},
                    {"verbosity", cfg.output.verbosity}};
  return root.dump(2);
}

std::string apply_override(const std::string& json_text,
                           const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail("--set", "expected key.path=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("<config>", std::string("invalid JSON: ") + e.what());
  }
  std::string pointer = "/";
  for (char ch : path) pointer += ch == '.' ? '/' : ch;
  json parsed_value;
  try {
    parsed_value = json::parse(value);
  } catch (const json::parse_error&) {
    parsed_value = value;  // bare word: treat as string
  }
  try {
    root[json::json_pointer(pointer)] = parsed_value;
  } catch (const json::exception& e) {
    fail(path, std::string("cannot apply override: ") + e.what());
  }
  return root.dump(2);
}

namespace {

Eigen::VectorXd modes_to_coeffs(const std::vector<std::pair<int, double>>& v,
                                int dim) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (const auto& [i, x] : v) {
    if (i < dim) out[i] += x;  // indices beyond 2m+1: dropped (projection)
  }
  return out;
}

}  // namespace

EnsembleRun build_run(const ExperimentConfig& cfg, int m_override) {
  const int m = m_override > 0 ? m_override : cfg.grid.m;

  std::shared_ptr<const SpectralGrid> grid;
  if (cfg.grid.n_phys > 0 && m == cfg.grid.m) {
    grid = std::make_shared<SpectralGrid>(cfg.grid.x1, cfg.grid.x2, m,
                                          cfg.grid.n_phys);
  } else {
    grid = std::make_shared<SpectralGrid>(cfg.grid.x1, cfg.grid.x2, m);
  }
  const int dim = grid->coeff_count();

  EnsembleRun run;
  run.system.grid = grid;
  run.system.cutoff = CutoffSpec{m, cfg.cutoff_mode};
  run.system.intensity = cfg.noise.intensity;

  const double jump_gain = cfg.noise.jump.gain * cfg.noise.inflation;
  if (cfg.noise.jump.kind == "additive") {
    run.system.jumps = std::make_shared<AdditiveJumpModel>(
        modes_to_coeffs(cfg.noise.jump.profile_modes, dim), jump_gain,
        cfg.noise.intensity, cfg.noise.jump.zeta);
  } else if (cfg.noise.jump.kind == "bounded_multiplicative") {
    run.system.jumps = std::make_shared<BoundedMultiplicativeJumpModel>(
        dim, jump_gain, cfg.noise.jump.r0, cfg.noise.intensity,
        cfg.noise.jump.zeta);
  }

  if (cfg.noise.diffusion.kind == "diagonal_damped") {
    run.system.diffusion = std::make_shared<DiagonalDampedDiffusion>(
        *grid, cfg.noise.diffusion.sigma0 * cfg.noise.inflation,
        cfg.noise.diffusion.r_v, cfg.noise.diffusion.alpha,
        cfg.noise.diffusion.v_range);
  }

  run.solver = cfg.solver;
  run.solver.m = m;

  if (cfg.initial.kind == "zero") {
    run.u0 = GalerkinState{Eigen::VectorXd::Zero(dim), 0.0};
  } else if (cfg.initial.kind == "soliton") {
    const double kappa = cfg.initial.kappa;
    const double x0 = cfg.initial.x0;
    run.u0 = grid->sample([kappa, x0](double x) {
      const double c = std::cosh(kappa * (x - x0));
      return 12.0 * kappa * kappa / (c * c);
    });
  } else {
    run.u0 = GalerkinState{modes_to_coeffs(cfg.initial.modes, dim), 0.0};
  }
  return run;
}

}  // namespace skdv
