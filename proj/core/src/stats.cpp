#include "skdv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skdv/errors.hpp"

namespace skdv::stats {
namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

// Series representation, converges fast for x < a+1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), converges fast for x > a+1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("gamma_p.a", "must be > 0");
  if (x < 0.0) throw InvalidArgument("gamma_p.x", "must be >= 0");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("gamma_q.a", "must be > 0");
  if (x < 0.0) throw InvalidArgument("gamma_q.x", "must be >= 0");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_square_sf(double statistic, int df) {
  if (df < 1) throw InvalidArgument("chi_square_sf.df", "must be >= 1");
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * statistic);
}

GofResult poisson_chi_square_gof(const std::vector<std::uint64_t>& samples,
                                 double lambda, double min_expected) {
  if (samples.size() < 2) {
    throw InvalidArgument("poisson_chi_square_gof.samples",
                          "need at least 2 samples");
  }
  if (!(lambda > 0.0)) {
    throw InvalidArgument("poisson_chi_square_gof.lambda", "must be > 0");
  }
  const double n = static_cast<double>(samples.size());
  const std::uint64_t max_count =
      *std::max_element(samples.begin(), samples.end());

  // Histogram over 0..max_count.
  std::vector<double> observed(max_count + 1, 0.0);
  for (std::uint64_t s : samples) observed[s] += 1.0;

  // Poisson pmf cells, final cell absorbs the tail mass.
  std::vector<double> expected(max_count + 1, 0.0);
  double pmf = std::exp(-lambda);
  double cum = 0.0;
  for (std::uint64_t k = 0; k <= max_count; ++k) {
    if (k > 0) pmf *= lambda / static_cast<double>(k);
    expected[k] = n * pmf;
    cum += pmf;
  }
  expected[max_count] += n * std::max(0.0, 1.0 - cum);

  // Merge adjacent cells (left to right) until each expected >= min_expected.
  std::vector<double> obs_bins, exp_bins;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    o_acc += observed[k];
    e_acc += expected[k];
    if (e_acc >= min_expected) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!exp_bins.empty()) {
      obs_bins.back() += o_acc;
      exp_bins.back() += e_acc;
    } else {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
    }
  }

  GofResult result;
  result.bins = static_cast<int>(exp_bins.size());
  if (result.bins < 2) {
    // Degenerate: everything in one cell; no test possible.
    result.df = 0;
    result.p_value = 1.0;
    return result;
  }
  for (int b = 0; b < result.bins; ++b) {
    const double d = obs_bins[b] - exp_bins[b];
    result.statistic += d * d / exp_bins[b];
  }
  result.df = result.bins - 1;
  result.p_value = chi_square_sf(result.statistic, result.df);
  return result;
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::std_error() const {
  return n_ < 1 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

void KahanSum::add(double x) {
  const double y = x - comp_;
  const double t = sum_ + y;
  comp_ = (t - sum_) - y;
  sum_ = t;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw DimensionError("fit_line: " + std::to_string(x.size()) + " x vs " +
                         std::to_string(y.size()) + " y values");
  }
  if (x.size() < 2) {
    throw InvalidArgument("fit_line", "need at least 2 points");
  }
  const int n = static_cast<int>(x.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line", "x values are all equal");

  LineFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ss_res += r * r;
    }
    fit.slope_std_error = std::sqrt(ss_res / (n - 2) / sxx);
  }
  return fit;
}

}  // namespace skdv::stats
