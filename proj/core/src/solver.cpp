#include "skdv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skdv/errors.hpp"
#include "skdv/rng.hpp"

namespace skdv {
namespace {

// Per-mode rotation tables for the dispersive flow of u_t = -u_3x over a
// step h: (a, b) -> (c a + s b, -s a + c b) with c = cos(k^3 h),
// s = sin(k^3 h). The Cayley variant substitutes the Crank–Nicolson
// rational approximation of the same rotation.
struct DispersionOp {
  Eigen::VectorXd c, s;  // index j = 1..m

  void build(const SpectralGrid& grid, double h, bool cayley) {
    const int m = grid.modes();
    c.resize(m + 1);
    s.resize(m + 1);
    c[0] = 1.0;
    s[0] = 0.0;
    for (int j = 1; j <= m; ++j) {
      const double k = grid.wavenumbers()[j];
      const double omega = k * k * k;
      if (cayley) {
        const double theta = 0.5 * omega * h;
        const double denom = 1.0 + theta * theta;
        c[j] = (1.0 - theta * theta) / denom;
        s[j] = 2.0 * theta / denom;
      } else {
        c[j] = std::cos(omega * h);
        s[j] = std::sin(omega * h);
      }
    }
  }

  void apply(Eigen::VectorXd& v) const {
    const int m = static_cast<int>(c.size()) - 1;
    for (int j = 1; j <= m; ++j) {
      const double a = v[2 * j - 1];
      const double b = v[2 * j];
      v[2 * j - 1] = c[j] * a + s[j] * b;
      v[2 * j] = -s[j] * a + c[j] * b;
    }
  }

  Eigen::VectorXd applied(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = v;
    apply(out);
    return out;
  }
};

// Non-stiff drift: tamed nonlinearity plus the compensator of the jump
// measure. The dispersive term is handled by DispersionOp, not here.
Eigen::VectorXd slow_drift(const SdeSystem& sys, double t,
                           const Eigen::VectorXd& u) {
  const GalerkinState state{u, t};
  Eigen::VectorXd g =
      -nonlinear_term(*sys.grid, state, sys.cutoff).coeffs;
  if (sys.has_jumps()) {
    Eigen::VectorXd f;
    for (std::size_t i = 0; i < sys.intensity.size(); ++i) {
      const double rate = sys.intensity.rates[i];
      if (rate == 0.0) continue;
      sys.jumps->jump(t, u, sys.intensity.marks[i], f);
      g.noalias() -= rate * f;
    }
  }
  return g;
}

void check_step_args(const SdeSystem& sys, const GalerkinState& state,
                     double dt_eff, const Eigen::VectorXd& dw) {
  if (sys.grid == nullptr) {
    throw InvalidArgument("system.grid", "must not be null");
  }
  if (state.coeffs.size() != sys.grid->coeff_count()) {
    throw DimensionError("step: state has " +
                         std::to_string(state.coeffs.size()) +
                         " coefficients, grid expects " +
                         std::to_string(sys.grid->coeff_count()));
  }
  if (!(dt_eff > 0.0)) {
    throw InvalidArgument("step.dt_eff",
                          "must be > 0, got " + std::to_string(dt_eff));
  }
  if (dw.size() != 0 && sys.diffusion &&
      dw.size() != sys.diffusion->n_wiener_modes()) {
    throw DimensionError("step: wiener increment has " +
                         std::to_string(dw.size()) + " modes, diffusion expects " +
                         std::to_string(sys.diffusion->n_wiener_modes()));
  }
}

}  // namespace

GalerkinState step(const SdeSystem& sys, Scheme scheme,
                   const GalerkinState& state, double dt_eff,
                   const Eigen::VectorXd& dw) {
  check_step_args(sys, state, dt_eff, dw);
  const double t = state.t;
  const double h = dt_eff;
  const Eigen::VectorXd& u = state.coeffs;

  Eigen::VectorXd noise;
  if (dw.size() != 0 && sys.has_diffusion()) {
    sys.diffusion->apply(t, u, dw, noise);
  }

  Eigen::VectorXd out;
  if (scheme == Scheme::exponential_rk4) {
    DispersionOp e_h, e_h2;
    e_h.build(*sys.grid, h, false);
    e_h2.build(*sys.grid, 0.5 * h, false);

    const Eigen::VectorXd g1 = slow_drift(sys, t, u);
    const Eigen::VectorXd stage2 = e_h2.applied(u + (0.5 * h) * g1);
    const Eigen::VectorXd g2 = slow_drift(sys, t + 0.5 * h, stage2);
    const Eigen::VectorXd stage3 = e_h2.applied(u) + (0.5 * h) * g2;
    const Eigen::VectorXd g3 = slow_drift(sys, t + 0.5 * h, stage3);
    const Eigen::VectorXd stage4 = e_h.applied(u) + h * e_h2.applied(g3);
    const Eigen::VectorXd g4 = slow_drift(sys, t + h, stage4);

    out = e_h.applied(u) +
          (h / 6.0) * (e_h.applied(g1) + 2.0 * e_h2.applied(g2 + g3) + g4);
    if (noise.size() != 0) out += e_h.applied(noise);
  } else {
    // First-order: rotate the whole Euler–Maruyama update.
    out = u + h * slow_drift(sys, t, u);
    if (noise.size() != 0) out += noise;
    DispersionOp e_h;
    e_h.build(*sys.grid, h, scheme == Scheme::semi_implicit_cn);
    e_h.apply(out);
  }

  if (!out.allFinite()) {
    const GalerkinState last = state;
    throw BlowUpError(t, norm(*sys.grid, last, NormKind::H()),
                      norm(*sys.grid, last, NormKind::V()), last.coeffs);
  }
  return GalerkinState{std::move(out), t + h};
}

GalerkinState apply_jump(const SdeSystem& sys, const GalerkinState& state,
                         const JumpEvent& event) {
  if (sys.jumps == nullptr) return state;
  if (std::abs(event.t - state.t) >
      1e-9 * std::max(1.0, std::abs(state.t))) {
    throw InvalidArgument("apply_jump.event",
                          "event time " + std::to_string(event.t) +
                              " does not match state time " +
                              std::to_string(state.t));
  }
  if (event.mark_index < 0 ||
      static_cast<std::size_t>(event.mark_index) >= sys.intensity.size()) {
    throw InvalidArgument("apply_jump.event",
                          "mark index " + std::to_string(event.mark_index) +
                              " out of range");
  }
  Eigen::VectorXd f;
  sys.jumps->jump(state.t, state.coeffs,
                  sys.intensity.marks[event.mark_index], f);
  GalerkinState out{state.coeffs + f, state.t};
  if (!out.all_finite()) {
    throw BlowUpError(state.t, norm(*sys.grid, state, NormKind::H()),
                      norm(*sys.grid, state, NormKind::V()), state.coeffs);
  }
  return out;
}

Trajectory simulate(const SdeSystem& sys, const SolverConfig& cfg,
                    const GalerkinState& u0) {
  if (sys.grid == nullptr) {
    throw InvalidArgument("system.grid", "must not be null");
  }
  if (u0.coeffs.size() != sys.grid->coeff_count()) {
    throw DimensionError("simulate: u0 has " +
                         std::to_string(u0.coeffs.size()) +
                         " coefficients, grid expects " +
                         std::to_string(sys.grid->coeff_count()));
  }
  if (!u0.all_finite()) {
    throw InvalidArgument("simulate.u0", "initial state must be finite");
  }
  if (!(cfg.horizon >= 0.0)) {
    throw InvalidArgument("solver.horizon", "must be >= 0");
  }
  if (cfg.horizon > 0.0 && !(cfg.dt > 0.0)) {
    throw InvalidArgument("solver.dt", "must be > 0 when horizon > 0");
  }

  const double t0 = u0.t;
  const double T = cfg.horizon;
  const double radius =
      cfg.stop_radius > 0.0 ? cfg.stop_radius
                            : 1e3 * std::max(u0.coeffs.norm(), 1.0);

  Trajectory traj;
  traj.times.push_back(t0);
  traj.states.push_back(u0.coeffs);
  if (u0.coeffs.norm() >= radius) {
    traj.stopped_at = t0;
    return traj;
  }
  if (T == 0.0) return traj;

  // Derived substreams: 0 = jump process, 1 = Wiener increments.
  std::vector<JumpEvent> events;
  if (sys.has_jumps()) {
    Rng jump_rng(derive_stream_seed(cfg.seed, 0));
    events = sample_prm(sys.intensity, T, jump_rng);
    for (JumpEvent& e : events) e.t += t0;
  }
  Rng wiener_rng(derive_stream_seed(cfg.seed, 1));

  // Jump-adapted grid: uniform dt points merged with the event times.
  // Event times win a merge so jumps are applied at their exact time.
  const double merge_tol = 1e-12 * std::max(1.0, T);
  std::vector<double> grid_times;
  const long n_uniform =
      static_cast<long>(std::ceil(T / cfg.dt - 1e-9));
  grid_times.reserve(n_uniform + events.size() + 1);
  for (long i = 1; i < n_uniform; ++i) grid_times.push_back(t0 + i * cfg.dt);
  grid_times.push_back(t0 + T);
  for (const JumpEvent& e : events) grid_times.push_back(e.t);
  std::sort(grid_times.begin(), grid_times.end());
  grid_times.erase(std::unique(grid_times.begin(), grid_times.end(),
                               [&](double a, double b) {
                                 return std::abs(a - b) <= merge_tol;
                               }),
                   grid_times.end());
  // Merging may have kept a uniform point instead of a coincident event
  // time; snap event times onto the surviving grid point.
  std::size_t next_event = 0;

  const int n_wiener =
      sys.has_diffusion() ? sys.diffusion->n_wiener_modes() : 0;
  Eigen::VectorXd dw;
  GalerkinState u = u0;

  for (double tb : grid_times) {
    const double dt_eff = tb - u.t;
    if (dt_eff <= 0.0) continue;

    if (n_wiener > 0) {
      dw.resize(n_wiener);
      const double sd = std::sqrt(dt_eff);
      for (int j = 0; j < n_wiener; ++j) dw[j] = sd * wiener_rng.gaussian();
    }
    u = step(sys, cfg.scheme, u, dt_eff,
             n_wiener > 0 ? dw : Eigen::VectorXd());
    if (cfg.record_noise) {
      traj.wiener_increments.push_back(n_wiener > 0 ? dw : Eigen::VectorXd());
    }

    while (next_event < events.size() &&
           events[next_event].t <= tb + merge_tol) {
      JumpEvent e = events[next_event];
      e.t = u.t;  // snap to the grid point actually reached
      traj.jump_log.push_back({e, u.coeffs});
      u = apply_jump(sys, u, e);
      ++next_event;
    }

    traj.times.push_back(u.t);
    traj.states.push_back(u.coeffs);
    if (u.coeffs.norm() >= radius) {
      traj.stopped_at = u.t;
      break;
    }
  }
  return traj;
}

}  // namespace skdv
