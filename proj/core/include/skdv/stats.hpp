#pragma once

#include <cstdint>
#include <vector>

namespace skdv::stats {

/// Regularized lower incomplete gamma P(a, x); series for x < a+1,
/// continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution with df degrees of
/// freedom.
double chi_square_sf(double statistic, int df);

struct GofResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  int bins = 0;
};

/// Pearson chi-square goodness-of-fit of observed counts against
/// Poisson(lambda). Adjacent cells are merged until every expected count
/// is at least min_expected; df = bins - 1 (lambda is given, not fitted).
GofResult poisson_chi_square_gof(const std::vector<std::uint64_t>& samples,
                                 double lambda, double min_expected = 5.0);

/// Mean / variance accumulator (Welford). Deterministic for a fixed feed
/// order; ensembles always feed by trajectory index.
class RunningStats {
 public:
  void add(double x);
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased; 0 for n < 2
  double std_error() const;

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Compensated (Kahan) summation.
class KahanSum {
 public:
  void add(double x);
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  int n = 0;
};

/// Ordinary least squares y = intercept + slope * x with the usual
/// residual-based standard error of the slope. Requires n >= 2 (>= 3 for a
/// finite standard error).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace skdv::stats
