#include "skdv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "skdv/errors.hpp"
#include "skdv/rng.hpp"

namespace skdv {
namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

// |u(right limit before t_{i+1})|: the left limit at a jump time, the
// stored state otherwise.
struct PathView {
  const Trajectory& traj;
  // jump index aligned to time index: -1 when no jump at that time
  std::vector<int> jump_at_time;

  explicit PathView(const Trajectory& t) : traj(t) {
    jump_at_time.assign(t.times.size(), -1);
    std::size_t ji = 0;
    for (std::size_t i = 0; i < t.times.size() && ji < t.jump_log.size();) {
      const double jt = t.jump_log[ji].event.t;
      if (std::abs(jt - t.times[i]) <= 1e-12 * std::max(1.0, std::abs(jt))) {
        jump_at_time[i] = static_cast<int>(ji);
        ++ji;  // multiple jumps at one grid time collapse to the first
        while (ji < t.jump_log.size() &&
               std::abs(t.jump_log[ji].event.t - t.times[i]) <=
                   1e-12 * std::max(1.0, std::abs(jt))) {
          ++ji;
        }
        ++i;
      } else if (jt < t.times[i]) {
        ++ji;
      } else {
        ++i;
      }
    }
  }

  // State approaching times[i] from the left (continuous value before the
  // jump, if any).
  const Eigen::VectorXd& left_limit(std::size_t i) const {
    const int ji = jump_at_time[i];
    return ji >= 0 ? traj.jump_log[ji].left_coeffs : traj.states[i];
  }
};

double trapezoid_v_integral(const SpectralGrid& grid, const Trajectory& traj,
                            const PathView& view) {
  Eigen::VectorXd weights(grid.coeff_count());
  for (int i = 0; i < grid.coeff_count(); ++i) {
    const double k = grid.wavenumber_of(i);
    weights[i] = 1.0 + k * k;
  }

  auto v_sq = [&](const Eigen::VectorXd& u) {
    return u.cwiseProduct(u).dot(weights);
  };

  stats::KahanSum acc;
  for (std::size_t i = 0; i + 1 < traj.times.size(); ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    const double left = v_sq(traj.states[i]);
    const double right = v_sq(view.left_limit(i + 1));
    acc.add(0.5 * dt * (left + right));
  }
  return acc.value();
}

double path_sup_h_norm(const Trajectory& traj) {
  double sup = 0.0;
  for (const auto& s : traj.states) sup = std::max(sup, s.norm());
  for (const auto& j : traj.jump_log) {
    sup = std::max(sup, j.left_coeffs.norm());
  }
  return sup;
}

}  // namespace

double EnsembleStatistics::sup_cross_m_ratio(double p) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int m : m_values) {
    const auto it = sup_moment.find({m, p});
    if (it == sup_moment.end()) continue;
    lo = std::min(lo, it->second.value);
    hi = std::max(hi, it->second.value);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

double EnsembleStatistics::v_cross_m_ratio() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& [m, est] : v_integral) {
    lo = std::min(lo, est.value);
    hi = std::max(hi, est.value);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::string EnsembleStatistics::to_text() const {
  std::ostringstream out;
  out << "n_traj = " << n_traj << "\n";
  for (int m : m_values) {
    for (double p : p_values) {
      const auto it = sup_moment.find({m, p});
      if (it == sup_moment.end()) continue;
      out << "sup_moment[m=" << m << ",p=" << fmt(p)
          << "] = " << fmt(it->second.value)
          << " +- " << fmt(it->second.std_error) << "\n";
    }
  }
  for (const auto& [m, est] : v_integral) {
    out << "v_integral[m=" << m << "] = " << fmt(est.value) << " +- "
        << fmt(est.std_error) << "\n";
  }
  for (double p : p_values) {
    out << "sup_cross_m_ratio[p=" << fmt(p)
        << "] = " << fmt(sup_cross_m_ratio(p)) << "\n";
  }
  out << "v_cross_m_ratio = " << fmt(v_cross_m_ratio()) << "\n";
  for (const auto& [m, c] : blowup_count) {
    out << "blowups[m=" << m << "] = " << c << "\n";
  }
  return out.str();
}

EnsembleStatistics estimate_moments(const std::vector<EnsembleRun>& runs,
                                    int n_traj,
                                    const std::vector<double>& p_values,
                                    int n_threads) {
  if (runs.empty()) {
    throw InvalidArgument("estimate_moments.runs", "must be nonempty");
  }
  if (n_traj < 2) {
    throw InvalidArgument("estimate_moments.n_traj", "must be >= 2");
  }
  double zeta_eff = 0.0;
  for (const auto& run : runs) {
    zeta_eff = std::max(zeta_eff,
                        run.system.jumps ? run.system.jumps->zeta() : 1.0);
  }
  for (double p : p_values) {
    if (!(p >= 0.5 && p <= 2.0 + zeta_eff + 1e-12)) {
      throw InvalidArgument("estimate_moments.p_values",
                            "p=" + fmt(p) + " outside [1/2, 2+zeta] with zeta=" +
                                fmt(zeta_eff));
    }
  }

  EnsembleStatistics out;
  out.n_traj = n_traj;
  out.p_values = p_values;

  for (const auto& run : runs) {
    const int m = run.system.grid->modes();
    out.m_values.push_back(m);

    std::vector<double> sup_h(n_traj, 0.0);
    std::vector<double> vint(n_traj, 0.0);
    std::vector<char> blown(n_traj, 0);

    detail::parallel_for_index(n_traj, n_threads, [&](int i) {
      SolverConfig cfg = run.solver;
      cfg.seed = derive_stream_seed(run.solver.seed, i);
      cfg.record_noise = false;
      try {
        const Trajectory traj = simulate(run.system, cfg, run.u0);
        const PathView view(traj);
        sup_h[i] = path_sup_h_norm(traj);
        vint[i] = trapezoid_v_integral(*run.system.grid, traj, view);
      } catch (const BlowUpError&) {
        blown[i] = 1;
      }
    });

    int n_blown = 0;
    for (char b : blown) n_blown += b;
    out.blowup_count[m] = n_blown;
    if (n_blown > 0.01 * n_traj) {
      throw BlowUpLimitError(
          "estimate_moments: " + std::to_string(n_blown) + "/" +
          std::to_string(n_traj) + " trajectories blew up at m=" +
          std::to_string(m) + " (limit 1%)");
    }

    for (double p : p_values) {
      stats::RunningStats acc;
      for (int i = 0; i < n_traj; ++i) {
        if (!blown[i]) acc.add(std::pow(sup_h[i] * sup_h[i], p));
      }
      out.sup_moment[{m, p}] = {acc.mean(), acc.std_error()};
    }
    stats::RunningStats acc;
    for (int i = 0; i < n_traj; ++i) {
      if (!blown[i]) acc.add(vint[i]);
    }
    out.v_integral[m] = {acc.mean(), acc.std_error()};
  }
  return out;
}

namespace {

// |u + f|^{2p} - |u|^{2p}, cancellation-safe.
double power_jump(const Eigen::VectorXd& u, const Eigen::VectorXd& f,
                  double p) {
  const double hn2 = u.squaredNorm();
  if (hn2 == 0.0) return std::pow(f.squaredNorm(), p);
  const double w = (2.0 * u.dot(f) + f.squaredNorm()) / hn2;
  if (w <= -1.0) return -std::pow(hn2, p);  // |u+f| == 0 (or rounding)
  return std::pow(hn2, p) * std::expm1(p * std::log1p(w));
}

}  // namespace

ItoDecomposition ito_decomposition(const SdeSystem& sys,
                                   const Trajectory& traj, double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("ito_decomposition.p", "must be >= 1");
  }
  if (traj.times.size() != traj.states.size() || traj.states.empty()) {
    throw DimensionError("ito_decomposition: trajectory has " +
                         std::to_string(traj.times.size()) + " times vs " +
                         std::to_string(traj.states.size()) + " states");
  }
  if (traj.state_dim() != sys.grid->coeff_count()) {
    throw DimensionError("ito_decomposition: states have " +
                         std::to_string(traj.state_dim()) +
                         " coefficients, grid expects " +
                         std::to_string(sys.grid->coeff_count()));
  }
  const bool need_noise = sys.has_diffusion();
  if (need_noise &&
      traj.wiener_increments.size() + 1 != traj.times.size()) {
    throw DimensionError(
        "ito_decomposition: trajectory lacks recorded wiener increments (" +
        std::to_string(traj.wiener_increments.size()) + " rows for " +
        std::to_string(traj.times.size()) + " times)");
  }

  const PathView view(traj);
  const std::size_t n = traj.times.size();

  ItoDecomposition out;
  out.p = p;
  out.times = traj.times;
  out.a_path.resize(n);
  out.k_path.assign(n, 0.0);
  out.m_path.assign(n, 0.0);
  out.i_path.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.a_path[i] = std::pow(traj.states[i].squaredNorm(), p);
  }

  // ds-integrands at a state (drift pairing + Ito correction for K; the
  // jump compensator pieces for M and I).
  auto k_integrand = [&](double t, const Eigen::VectorXd& u) {
    const double hn2 = u.squaredNorm();
    const GalerkinState s{u, t};
    const Eigen::VectorXd drift =
        deriv(*sys.grid, s, 3).coeffs + nonlinear_term(*sys.grid, s, sys.cutoff).coeffs;
    double val = -2.0 * p * std::pow(hn2, p - 1.0) * u.dot(drift);
    if (need_noise && hn2 > 0.0) {
      const double hs2 = sys.diffusion->hs_norm_sq(t, u);
      const double adj2 = sys.diffusion->adjoint_norm_sq(t, u, u);
      val += p * std::pow(hn2, p - 1.0) * hs2;
      if (p > 1.0) val += 2.0 * p * (p - 1.0) * std::pow(hn2, p - 2.0) * adj2;
    } else if (need_noise && hn2 == 0.0 && p == 1.0) {
      val += sys.diffusion->hs_norm_sq(t, u);
    }
    return val;
  };
  auto mi_integrands = [&](double t, const Eigen::VectorXd& u) {
    double m_val = 0.0, i_val = 0.0;
    if (sys.has_jumps()) {
      const double hn2 = u.squaredNorm();
      Eigen::VectorXd f;
      for (std::size_t k = 0; k < sys.intensity.size(); ++k) {
        const double rate = sys.intensity.rates[k];
        if (rate == 0.0) continue;
        sys.jumps->jump(t, u, sys.intensity.marks[k], f);
        const double dj = power_jump(u, f, p);
        m_val += rate * dj;
        i_val += rate * (dj - 2.0 * p * std::pow(hn2, p - 1.0) * u.dot(f));
      }
    }
    return std::pair<double, double>(m_val, i_val);
  };

  stats::KahanSum k_acc, m_acc, i_acc;
  double prev_k = k_integrand(traj.times[0], traj.states[0]);
  auto [prev_m, prev_i] = mi_integrands(traj.times[0], traj.states[0]);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t_l = traj.times[i];
    const double t_r = traj.times[i + 1];
    const double dt = t_r - t_l;
    const Eigen::VectorXd& u_l = traj.states[i];
    const Eigen::VectorXd& u_r = view.left_limit(i + 1);

    // Left-point Ito rule for the dW pairing.
    if (need_noise && traj.wiener_increments[i].size() != 0) {
      Eigen::VectorXd phi_dw;
      sys.diffusion->apply(t_l, u_l, traj.wiener_increments[i], phi_dw);
      k_acc.add(2.0 * p * std::pow(u_l.squaredNorm(), p - 1.0) *
                u_l.dot(phi_dw));
    }

    const double cur_k = k_integrand(t_r, u_r);
    k_acc.add(0.5 * dt * (prev_k + cur_k));
    prev_k = cur_k;

    auto [cur_m, cur_i] = mi_integrands(t_r, u_r);
    m_acc.add(-0.5 * dt * (prev_m + cur_m));
    i_acc.add(0.5 * dt * (prev_i + cur_i));
    prev_m = cur_m;
    prev_i = cur_i;

    // Jump landing exactly at t_r: the measure atom itself.
    const int ji = view.jump_at_time[i + 1];
    if (ji >= 0) {
      // Walk all jumps recorded at this time.
      for (std::size_t jj = ji; jj < traj.jump_log.size(); ++jj) {
        const auto& rec = traj.jump_log[jj];
        if (std::abs(rec.event.t - t_r) >
            1e-12 * std::max(1.0, std::abs(t_r))) {
          break;
        }
        Eigen::VectorXd f;
        sys.jumps->jump(t_r, rec.left_coeffs,
                        sys.intensity.marks[rec.event.mark_index], f);
        m_acc.add(power_jump(rec.left_coeffs, f, p));
      }
      // Integrand values must restart from the post-jump state.
      prev_k = k_integrand(t_r, traj.states[i + 1]);
      auto [pm, pi] = mi_integrands(t_r, traj.states[i + 1]);
      prev_m = pm;
      prev_i = pi;
    }

    out.k_path[i + 1] = k_acc.value();
    out.m_path[i + 1] = m_acc.value();
    out.i_path[i + 1] = i_acc.value();
  }

  double a_max = 0.0;
  for (double a : out.a_path) a_max = std::max(a_max, a);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = out.a_path[i] - out.a_path[0] - out.k_path[i] -
                     out.m_path[i] - out.i_path[i];
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
  }
  out.max_rel_residual =
      a_max > 0.0 ? out.max_abs_residual / a_max : out.max_abs_residual;
  return out;
}

namespace {

struct TaylorRatios {
  double g1, g2, g3;
};

// Ratios at |x| = 1, h = r (c, sqrt(1-c^2)); cancellation-safe through
// expm1/log1p.
TaylorRatios taylor_ratios(double p, double r, double c) {
  const double w = 2.0 * r * c + r * r;
  const double d = std::expm1(p * std::log1p(w));
  const double r2p2 = std::pow(r, 2.0 * p - 2.0);
  TaylorRatios g;
  g.g1 = std::abs(d - 2.0 * p * r * c) / ((1.0 + r2p2) * r * r);
  const double num2 = d * d - 8.0 * p * p * r * r;
  g.g2 = num2 / (2.0 * (1.0 + r2p2) * (1.0 + r2p2) * r * r * r * r);
  g.g3 = num2 / (r * r * r * r + std::pow(r, 4.0 * p));
  return g;
}

void scan_max(double p, const std::vector<double>& rs,
              const std::vector<double>& cs, TaylorRatios& best,
              double& r1, double& c1, double& r2, double& c2, double& r3,
              double& c3) {
  for (double r : rs) {
    for (double c : cs) {
      const TaylorRatios g = taylor_ratios(p, r, c);
      if (g.g1 > best.g1) {
        best.g1 = g.g1;
        r1 = r;
        c1 = c;
      }
      if (g.g2 > best.g2) {
        best.g2 = g.g2;
        r2 = r;
        c2 = c;
      }
      if (g.g3 > best.g3) {
        best.g3 = g.g3;
        r3 = r;
        c3 = c;
      }
    }
  }
}

std::vector<double> log_range(double lo, double hi, int n) {
  std::vector<double> v(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(a + (b - a) * i / (n - 1));
  }
  return v;
}

std::vector<double> lin_range(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TaylorConstants minimal_taylor_constants(double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("minimal_taylor_constants.p", "must be >= 1");
  }
  TaylorRatios best{0.0, 0.0, 0.0};
  double r1 = 1, c1 = 0, r2 = 1, c2 = 0, r3 = 1, c3 = 0;
  const auto rs = log_range(1e-3, 1e4, 561);
  const auto cs = lin_range(-1.0, 1.0, 201);
  scan_max(p, rs, cs, best, r1, c1, r2, c2, r3, c3);

  // One local refinement pass per constant (one coarse cell each way).
  const double rstep = std::pow(1e7, 1.0 / 560.0);
  const double cstep = 2.0 / 200.0;
  auto refine = [&](double r0, double c0) {
    const auto rr = log_range(r0 / rstep, r0 * rstep, 81);
    const auto cc = lin_range(std::max(-1.0, c0 - cstep),
                              std::min(1.0, c0 + cstep), 81);
    double dr1 = r0, dc1 = c0, dr2 = r0, dc2 = c0, dr3 = r0, dc3 = c0;
    scan_max(p, rr, cc, best, dr1, dc1, dr2, dc2, dr3, dc3);
  };
  refine(r1, c1);
  refine(r2, c2);
  refine(r3, c3);

  // Analytic limits and the x = 0 ray (pow(0,0) == 1 conventions).
  const double small_r_limit = p * (2.0 * p - 1.0) / (p == 1.0 ? 2.0 : 1.0);
  const double ray1 = p == 1.0 ? 0.5 : 1.0;
  const double ray2 = p == 1.0 ? 0.125 : 0.5;
  const double ray3 = p == 1.0 ? 0.5 : 1.0;

  TaylorConstants out;
  const double headroom = 1.02;
  out.c1 = headroom * std::max({best.g1, small_r_limit, ray1, 1.0});
  out.c2 = headroom * std::max({best.g2, ray2, 0.5});
  out.c3 = headroom * std::max({best.g3, ray3, 1.0});
  return out;
}

TaylorCheck taylor_remainder_check(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& h, double p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("taylor_remainder_check.p", "must be >= 1");
  }
  if (x.size() != h.size()) {
    throw DimensionError("taylor_remainder_check: x has " +
                         std::to_string(x.size()) + " entries, h has " +
                         std::to_string(h.size()));
  }
  TaylorCheck out;
  out.constants = minimal_taylor_constants(p);

  const double xn2 = x.squaredNorm();
  const double hn2 = h.squaredNorm();
  const double xn = std::sqrt(xn2);
  const double hn = std::sqrt(hn2);
  const double inner = x.dot(h);
  const double d = power_jump(x, h, p);  // |x+h|^{2p} - |x|^{2p}

  const double x_2p2 = std::pow(xn, 2.0 * p - 2.0);
  const double h_2p2 = std::pow(hn, 2.0 * p - 2.0);

  out.lhs1 = std::abs(d - 2.0 * p * x_2p2 * inner);
  out.rhs1 = out.constants.c1 * (x_2p2 + h_2p2) * hn2;
  out.margin1 = out.rhs1 - out.lhs1;

  out.lhs2 = d * d;
  out.rhs2_paired =
      2.0 * (4.0 * p * p * std::pow(xn, 4.0 * p - 2.0) * hn2 +
             out.constants.c2 * (x_2p2 + h_2p2) * (x_2p2 + h_2p2) * hn2 * hn2);
  out.rhs2_split = 8.0 * p * p * std::pow(xn, 4.0 * p - 2.0) * hn2 +
                   out.constants.c3 * std::pow(xn, 4.0 * p - 4.0) * hn2 * hn2 +
                   out.constants.c3 * std::pow(hn, 4.0 * p);
  out.margin2_paired = out.rhs2_paired - out.lhs2;
  out.margin2_split = out.rhs2_split - out.lhs2;

  const double tol1 = 1e-12 * std::max(1.0, out.rhs1);
  const double tol2 = 1e-12 * std::max({1.0, out.rhs2_paired, out.rhs2_split});
  out.pass = out.margin1 >= -tol1 && out.margin2_paired >= -tol2 &&
             out.margin2_split >= -tol2;
  return out;
}

namespace {

// Order-statistics pair of multisets; median is the lower middle value.
class RunningMedian {
 public:
  void add(double x) {
    if (low_.empty() || x <= *low_.rbegin()) {
      low_.insert(x);
    } else {
      high_.insert(x);
    }
    if (low_.size() > high_.size() + 1) {
      high_.insert(*low_.rbegin());
      low_.erase(std::prev(low_.end()));
    } else if (high_.size() > low_.size()) {
      low_.insert(*high_.begin());
      high_.erase(high_.begin());
    }
  }
  double median() const { return *low_.rbegin(); }

 private:
  std::multiset<double> low_, high_;
};

std::size_t nearest_time_index(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const std::size_t hi = it - times.begin();
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

std::size_t stopping_index(const Trajectory& traj, const StoppingRule& rule,
                           double t_cap) {
  std::size_t cap_index = nearest_time_index(traj.times, t_cap);
  while (cap_index > 0 && traj.times[cap_index] > t_cap + 1e-12) --cap_index;

  switch (rule.kind) {
    case StoppingRule::Kind::fixed_time_fraction: {
      const double target =
          traj.times.front() +
          rule.param * (traj.times.back() - traj.times.front());
      std::size_t i = nearest_time_index(traj.times, target);
      return std::min(i, cap_index);
    }
    case StoppingRule::Kind::norm_threshold: {
      for (std::size_t i = 0; i <= cap_index; ++i) {
        if (traj.states[i].norm() >= rule.param) return i;
      }
      return cap_index;
    }
    case StoppingRule::Kind::running_median_crossing: {
      RunningMedian med;
      med.add(traj.states[0].norm());
      for (std::size_t i = 1; i <= cap_index; ++i) {
        const double h = traj.states[i].norm();
        if (h > med.median()) return i;
        med.add(h);
      }
      return cap_index;
    }
  }
  return cap_index;
}

}  // namespace

std::string AldousReport::to_text() const {
  std::ostringstream out;
  out << "dual_s = " << fmt(dual_s) << "\n";
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out << "increment[theta=" << fmt(thetas[i])
        << "] = " << fmt(increments[i].value) << " +- "
        << fmt(increments[i].std_error) << "\n";
  }
  out << "fitted_b = " << fmt(fitted_b) << " +- " << fmt(b_std_error) << "\n";
  out << "fitted_log_c = " << fmt(fitted_log_c) << "\n";
  out << "degenerate = " << (degenerate ? "true" : "false") << "\n";
  return out.str();
}

AldousReport aldous_check(const EnsembleRun& run, int n_traj,
                          const std::vector<double>& thetas,
                          StoppingRule rule, double dual_s, int n_threads) {
  if (thetas.size() < 4) {
    throw InvalidArgument("aldous.thetas",
                          "need at least 4 lags, got " +
                              std::to_string(thetas.size()));
  }
  const double T = run.solver.horizon;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0.0 && thetas[i] < 0.5 * T)) {
      throw InvalidArgument("aldous.thetas",
                            "lags must lie in (0, T/2); theta=" +
                                fmt(thetas[i]) + " with T=" + fmt(T));
    }
    if (i > 0 && thetas[i] <= thetas[i - 1]) {
      throw InvalidArgument("aldous.thetas", "lags must be increasing");
    }
  }
  if (n_traj < 2) {
    throw InvalidArgument("aldous.n_traj", "must be >= 2");
  }

  const std::size_t n_lags = thetas.size();
  std::vector<std::vector<double>> incr(n_lags,
                                        std::vector<double>(n_traj, 0.0));
  std::vector<char> blown(n_traj, 0);
  const NormKind dual = NormKind::VDual(dual_s);

  detail::parallel_for_index(n_traj, n_threads, [&](int i) {
    SolverConfig cfg = run.solver;
    cfg.seed = derive_stream_seed(run.solver.seed, i);
    cfg.record_noise = false;
    Trajectory traj;
    try {
      traj = simulate(run.system, cfg, run.u0);
    } catch (const BlowUpError&) {
      blown[i] = 1;
      return;
    }
    const double t0 = traj.times.front();
    const std::size_t tau_idx =
        stopping_index(traj, rule, t0 + 0.5 * T);
    const double tau = traj.times[tau_idx];
    const Eigen::VectorXd& u_tau = traj.states[tau_idx];
    for (std::size_t l = 0; l < n_lags; ++l) {
      const std::size_t idx = nearest_time_index(traj.times, tau + thetas[l]);
      GalerkinState diff{traj.states[idx] - u_tau, 0.0};
      incr[l][i] = norm(*run.system.grid, diff, dual);
    }
  });

  AldousReport report;
  report.thetas = thetas;
  report.dual_s = dual_s;
  report.increments.resize(n_lags);

  std::vector<double> log_theta, log_mean;
  bool any_positive = false;
  for (std::size_t l = 0; l < n_lags; ++l) {
    stats::RunningStats acc;
    for (int i = 0; i < n_traj; ++i) {
      if (!blown[i]) acc.add(incr[l][i]);
    }
    report.increments[l] = {acc.mean(), acc.std_error()};
    if (acc.mean() > 1e-300) {
      any_positive = true;
      log_theta.push_back(std::log(thetas[l]));
      log_mean.push_back(std::log(acc.mean()));
    }
  }
  if (!any_positive || log_theta.size() < 2) {
    report.degenerate = true;
    return report;
  }
  const stats::LineFit fit = stats::fit_line(log_theta, log_mean);
  report.fitted_b = fit.slope;
  report.fitted_log_c = fit.intercept;
  report.b_std_error = fit.slope_std_error;
  return report;
}

}  // namespace skdv
