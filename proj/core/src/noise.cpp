#include "skdv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skdv/errors.hpp"

namespace skdv {

double IntensityMeasure::total_rate() const {
  double acc = 0.0;
  for (double r : rates) acc += r;
  return acc;
}

void IntensityMeasure::validate() const {
  if (marks.size() != rates.size()) {
    throw DimensionError("intensity: " + std::to_string(marks.size()) +
                         " marks vs " + std::to_string(rates.size()) +
                         " rates");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] >= 0.0) || !std::isfinite(rates[i])) {
      throw InvalidArgument("intensity.rates[" + std::to_string(i) + "]",
                            "must be finite and >= 0");
    }
    if (!std::isfinite(marks[i])) {
      throw InvalidArgument("intensity.marks[" + std::to_string(i) + "]",
                            "must be finite");
    }
  }
}

std::vector<JumpEvent> sample_prm(const IntensityMeasure& nu, double horizon,
                                  Rng& rng) {
  nu.validate();
  if (!(horizon > 0.0)) {
    throw InvalidArgument("sample_prm.horizon",
                          "must be > 0, got " + std::to_string(horizon));
  }
  const double lambda = nu.total_rate();
  if (lambda == 0.0) return {};

  // Draw order is part of the reproducibility contract:
  // count, then all times, then all marks.
  const std::uint64_t count = rng.poisson(lambda * horizon);
  std::vector<JumpEvent> events(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    events[i].t = horizon * rng.uniform01_open0();  // in (0, T]
  }
  std::vector<double> cumulative(nu.rates.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.rates.size(); ++i) {
    acc += nu.rates[i];
    cumulative[i] = acc;
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const double u = rng.uniform01() * lambda;
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    events[i].mark_index = static_cast<int>(
        std::min<std::size_t>(it - cumulative.begin(), nu.rates.size() - 1));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const JumpEvent& a, const JumpEvent& b) {
                     return a.t < b.t;
                   });
  return events;
}

std::vector<JumpEvent> sample_prm(const IntensityMeasure& nu, double horizon,
                                  std::uint64_t seed) {
  Rng rng(seed);
  return sample_prm(nu, horizon, rng);
}

Eigen::MatrixXd compensated_integral(const std::vector<JumpEvent>& events,
                                     const IntensityMeasure& nu,
                                     const JumpIntegrand& integrand,
                                     const std::vector<double>& grid_times) {
  nu.validate();
  if (grid_times.empty()) {
    throw InvalidArgument("compensated_integral.grid_times", "must be nonempty");
  }

  // Probe the dimension.
  Eigen::VectorXd probe =
      nu.empty() ? integrand(grid_times.front(), 0.0)
                 : integrand(grid_times.front(), nu.marks.front());
  const Eigen::Index dim = probe.size();

  auto rate_weighted_sum = [&](double t) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (nu.rates[i] > 0.0) s += nu.rates[i] * integrand(t, nu.marks[i]);
    }
    return s;
  };

  Eigen::MatrixXd path(grid_times.size(), dim);
  Eigen::VectorXd jump_sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd compensator = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd prev_rate_sum = rate_weighted_sum(grid_times.front());
  std::size_t next_event = 0;

  for (std::size_t k = 0; k < grid_times.size(); ++k) {
    const double t = grid_times[k];
    if (k > 0) {
      const double t_prev = grid_times[k - 1];
      if (t < t_prev) {
        throw InvalidArgument("compensated_integral.grid_times",
                              "must be nondecreasing");
      }
      const Eigen::VectorXd cur_rate_sum = rate_weighted_sum(t);
      compensator += 0.5 * (t - t_prev) * (prev_rate_sum + cur_rate_sum);
      prev_rate_sum = cur_rate_sum;
    }
    while (next_event < events.size() && events[next_event].t <= t) {
      const JumpEvent& e = events[next_event];
      jump_sum += integrand(e.t, nu.marks.at(e.mark_index));
      ++next_event;
    }
    path.row(k) = (jump_sum - compensator).transpose();
  }
  return path;
}

WienerPath sample_wiener(int n_modes, int n_steps, double dt, Rng& rng) {
  if (n_modes < 1) {
    throw InvalidArgument("sample_wiener.n_modes",
                          "must be >= 1, got " + std::to_string(n_modes));
  }
  if (n_steps < 0) {
    throw InvalidArgument("sample_wiener.n_steps",
                          "must be >= 0, got " + std::to_string(n_steps));
  }
  if (!(dt > 0.0)) {
    throw InvalidArgument("sample_wiener.dt",
                          "must be > 0, got " + std::to_string(dt));
  }
  WienerPath path;
  path.n_modes = n_modes;
  path.dt = dt;
  path.increments.resize(n_steps, n_modes);
  const double s = std::sqrt(dt);
  // Row-major draw order: step by step, mode by mode.
  for (int i = 0; i < n_steps; ++i) {
    for (int j = 0; j < n_modes; ++j) path.increments(i, j) = s * rng.gaussian();
  }
  return path;
}

WienerPath sample_wiener(int n_modes, int n_steps, double dt,
                         std::uint64_t seed) {
  Rng rng(seed);
  return sample_wiener(n_modes, n_steps, dt, rng);
}

}  // namespace skdv
