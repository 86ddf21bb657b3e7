#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "skdv/solver.hpp"
#include "skdv/stats.hpp"

namespace skdv {

/// One ensemble configuration: system, solver settings (whose seed acts as
/// this run's master seed) and initial state. Trajectory i uses the
/// derived stream seed derive_stream_seed(solver.seed, i).
struct EnsembleRun {
  SdeSystem system;
  SolverConfig solver;
  GalerkinState u0;
};

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimates of the two a-priori functionals
///   E[ sup_{0<=s<=T} |u(s)|_H^{2p} ]   and   E[ int_0^T |u(s)|_V^2 ds ],
/// per Galerkin dimension m, with standard errors. The sup runs over the
/// stored jump-adapted grid including pre-jump left limits; the integral
/// is trapezoidal with jump-aware endpoints.
struct EnsembleStatistics {
  int n_traj = 0;
  std::vector<int> m_values;
  std::vector<double> p_values;
  std::map<std::pair<int, double>, MomentEstimate> sup_moment;  // (m, p)
  std::map<int, MomentEstimate> v_integral;                     // m
  std::map<int, int> blowup_count;

  /// max/min ratio of an estimate across the m sweep; the empirical
  /// surrogate for uniform-in-m boundedness.
  double sup_cross_m_ratio(double p) const;
  double v_cross_m_ratio() const;

  std::string to_text() const;
};

/// Runs n_traj trajectories per configuration and reduces the Lemma-style
/// functionals. Trajectories that blow up are excluded and counted; more
/// than 1% blow-ups in any configuration fails the run (throws Error).
/// Requires every p in p_values to lie in [1/2, 2 + zeta] (zeta from the
/// run's jump model; the widest declared window when models differ).
EnsembleStatistics estimate_moments(const std::vector<EnsembleRun>& runs,
                                    int n_traj,
                                    const std::vector<double>& p_values,
                                    int n_threads = 1);

/// Discrete bookkeeping of |u(t)|_H^{2p} along one trajectory:
///   |u(t)|^{2p} = |u(0)|^{2p} + K(t) + M(t) + I(t)
/// with K the Wiener + drift + Ito-correction part (dW term left-point,
/// ds terms trapezoidal), M the compensated jump part and I the
/// compensator remainder. residual reports how far the stored path is from
/// closing the identity (quadrature plus scheme error; zero drift/noise
/// collapses it to the scheme's conservation error).
struct ItoDecomposition {
  double p = 1.0;
  std::vector<double> times;
  std::vector<double> a_path;  // |u(t)|^{2p}
  std::vector<double> k_path;  // cumulative
  std::vector<double> m_path;
  std::vector<double> i_path;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
};

ItoDecomposition ito_decomposition(const SdeSystem& system,
                                   const Trajectory& traj, double p);

/// Minimal constants (2% search headroom) for the Taylor-remainder
/// inequalities of |.|^{2p}, derived by brute-force search over the scale-
/// reduced configuration space (|x| = 1 plus the x = 0 ray):
///   |x+h|^{2p} - |x|^{2p} - 2p|x|^{2p-2}<x,h>| <= c1 (|x|^{2p-2} + |h|^{2p-2}) |h|^2
///   (|x+h|^{2p} - |x|^{2p})^2 <= 2[4p^2 |x|^{4p-2}|h|^2 + c2 (|x|^{2p-2}+|h|^{2p-2})^2 |h|^4]
///   (|x+h|^{2p} - |x|^{2p})^2 <= 8p^2 |x|^{4p-2}|h|^2 + c3 |x|^{4p-4}|h|^4 + c3 |h|^{4p}
struct TaylorConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

TaylorConstants minimal_taylor_constants(double p);

struct TaylorCheck {
  TaylorConstants constants;
  double lhs1 = 0.0, rhs1 = 0.0;
  double lhs2 = 0.0, rhs2_paired = 0.0, rhs2_split = 0.0;
  double margin1 = 0.0;        // rhs1 - lhs1
  double margin2_paired = 0.0;
  double margin2_split = 0.0;
  bool pass = false;
};

/// Evaluates both remainder inequalities at concrete (x, h, p), p >= 1.
TaylorCheck taylor_remainder_check(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& h, double p);

/// Adapted stopping rules for the increment diagnostic. Every rule is
/// capped at T/2 so tau + theta stays inside the horizon.
struct StoppingRule {
  enum class Kind {
    running_median_crossing,  // first time |u|_H exceeds its running median
    fixed_time_fraction,      // tau = param * T
    norm_threshold            // first time |u|_H >= param
  };
  Kind kind = Kind::running_median_crossing;
  double param = 0.5;

  static StoppingRule running_median() {
    return {Kind::running_median_crossing, 0.0};
  }
  static StoppingRule fraction(double q) {
    return {Kind::fixed_time_fraction, q};
  }
  static StoppingRule threshold(double r) { return {Kind::norm_threshold, r}; }
};

/// Increment-scaling diagnostic: estimates E|u(tau+theta) - u(tau)|_{U'}
/// over an ensemble for each lag theta and fits log E against log theta.
/// U' is the dual norm of order dual_s (default 3).
struct AldousReport {
  std::vector<double> thetas;
  std::vector<MomentEstimate> increments;
  double fitted_b = 0.0;  // log-log slope
  double fitted_log_c = 0.0;
  double b_std_error = 0.0;
  double dual_s = 3.0;
  bool degenerate = false;  // all increments vanished

  std::string to_text() const;
};

/// Requires at least 4 lags, all inside (0, T/2), increasing.
AldousReport aldous_check(const EnsembleRun& run, int n_traj,
                          const std::vector<double>& thetas,
                          StoppingRule rule, double dual_s = 3.0,
                          int n_threads = 1);

}  // namespace skdv
