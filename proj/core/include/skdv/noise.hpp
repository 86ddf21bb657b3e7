#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "skdv/rng.hpp"

namespace skdv {

/// Finite-activity intensity measure: a finite list of mark points with
/// nonnegative rates per unit time. Stands in for a sigma-finite measure
/// after truncation; the truncation level is a configuration choice.
struct IntensityMeasure {
  std::vector<double> marks;
  std::vector<double> rates;

  double total_rate() const;
  bool empty() const { return marks.empty(); }
  std::size_t size() const { return marks.size(); }
  void validate() const;
};

/// One atom of the random measure: an event time in (0, T] and the index
/// of its mark.
struct JumpEvent {
  double t = 0.0;
  int mark_index = 0;
};

/// Truncated cylindrical Wiener path: i.i.d. N(0, dt) increments, one row
/// per step, one column per mode.
struct WienerPath {
  int n_modes = 0;
  double dt = 0.0;
  Eigen::MatrixXd increments;  // n_steps x n_modes

  int n_steps() const { return static_cast<int>(increments.rows()); }
};

/// Samples the Poisson random measure on (0, horizon] x marks: total count
/// Poisson(Lambda*horizon), event times uniform, marks categorical with
/// probabilities nu_i/Lambda. Exact for finite activity. Events are
/// returned sorted by time. Lambda == 0 yields an empty list.
std::vector<JumpEvent> sample_prm(const IntensityMeasure& nu, double horizon,
                                  Rng& rng);
std::vector<JumpEvent> sample_prm(const IntensityMeasure& nu, double horizon,
                                  std::uint64_t seed);

/// Integrand of a jump integral: (t, mark) -> vector.
using JumpIntegrand = std::function<Eigen::VectorXd(double, double)>;

/// Path of the compensated integral
///   t |-> sum_{events <= t} f(t_i, y_i) - int_0^t sum_i f(s, y_i) nu_i ds,
/// evaluated at the given times (which must be increasing and start at a
/// time >= 0). The compensator integral uses the trapezoidal rule between
/// consecutive grid times, so it is exact for integrands affine in t.
/// For a deterministic bounded integrand the path is a martingale sampled
/// on the grid.
Eigen::MatrixXd compensated_integral(const std::vector<JumpEvent>& events,
                                     const IntensityMeasure& nu,
                                     const JumpIntegrand& integrand,
                                     const std::vector<double>& grid_times);

/// i.i.d. Gaussian increments with per-mode variance dt; modes independent.
WienerPath sample_wiener(int n_modes, int n_steps, double dt, Rng& rng);
WienerPath sample_wiener(int n_modes, int n_steps, double dt,
                         std::uint64_t seed);

}  // namespace skdv
