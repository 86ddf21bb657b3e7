#include "skdv/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skdv/errors.hpp"

namespace skdv {

std::vector<double> LevyNoiseModel::growth_orders() const {
  std::vector<double> orders;
  orders.reserve(growth_.size());
  for (const auto& [p, c] : growth_) orders.push_back(p);
  return orders;
}

double LevyNoiseModel::growth_constant(double p) const {
  const auto it = growth_.find(p);
  if (it == growth_.end()) {
    throw InvalidArgument("growth_constant.p",
                          "no C_p declared at p=" + std::to_string(p));
  }
  return it->second;
}

ZeroJumpModel::ZeroJumpModel(int dim) : dim_(dim) {
  lipschitz_ = 0.0;
  zeta_ = 1.0;
  for (double p : {1.0, 2.0, 2.0 + 0.5 * zeta_, 4.0 + zeta_}) {
    declare_growth(p, 0.0);
  }
}

void ZeroJumpModel::jump(double, const Eigen::VectorXd&, double,
                         Eigen::VectorXd& out) const {
  out = Eigen::VectorXd::Zero(dim_);
}

namespace {

double abs_moment(const IntensityMeasure& nu, double gain, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    acc += nu.rates[i] * std::pow(std::abs(gain * nu.marks[i]), p);
  }
  return acc;
}

}  // namespace

AdditiveJumpModel::AdditiveJumpModel(Eigen::VectorXd profile, double gain,
                                     const IntensityMeasure& nu, double zeta)
    : profile_(std::move(profile)), gain_(gain) {
  nu.validate();
  lipschitz_ = 0.0;
  zeta_ = zeta;
  const double profile_norm = profile_.norm();
  for (double p : {1.0, 2.0, 2.0 + 0.5 * zeta_, 4.0 + zeta_}) {
    declare_growth(p, abs_moment(nu, gain_, p) * std::pow(profile_norm, p));
  }
}

void AdditiveJumpModel::jump(double, const Eigen::VectorXd&, double mark,
                             Eigen::VectorXd& out) const {
  out = (gain_ * mark) * profile_;
}

BoundedMultiplicativeJumpModel::BoundedMultiplicativeJumpModel(
    int dim, double gain, double r0, const IntensityMeasure& nu, double zeta,
    double declared_l_override)
    : dim_(dim), gain_(gain), r0_(r0) {
  nu.validate();
  if (!(r0 > 0.0)) {
    throw InvalidArgument("bounded_multiplicative.r0", "must be > 0");
  }
  zeta_ = zeta;
  lipschitz_ = declared_l_override >= 0.0 ? declared_l_override
                                          : abs_moment(nu, gain_, 2.0);
  for (double p : {1.0, 2.0, 2.0 + 0.5 * zeta_, 4.0 + zeta_}) {
    declare_growth(p, abs_moment(nu, gain_, p));
  }
}

void BoundedMultiplicativeJumpModel::jump(double, const Eigen::VectorXd& u,
                                          double mark,
                                          Eigen::VectorXd& out) const {
  const double norm = u.norm();
  const double rho = norm > r0_ ? r0_ / norm : 1.0;
  out = (gain_ * mark * rho) * u;
  if (out.size() != dim_) out.conservativeResize(dim_);
}

double DiffusionModel::adjoint_norm_sq(double t, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& v) const {
  const Eigen::MatrixXd phi = matrix(t, u);
  return (phi.transpose() * v).squaredNorm();
}

Eigen::MatrixXd DiffusionModel::matrix(double t,
                                       const Eigen::VectorXd& u) const {
  Eigen::MatrixXd out(state_dim(), n_wiener_modes());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n_wiener_modes());
  Eigen::VectorXd col;
  for (int j = 0; j < n_wiener_modes(); ++j) {
    e[j] = 1.0;
    apply(t, u, e, col);
    out.col(j) = col;
    e[j] = 0.0;
  }
  return out;
}

ZeroDiffusion::ZeroDiffusion(int dim) : dim_(dim) {
  lipschitz_ = 0.0;
  alpha_ = 1e-6;
  beta_ = 1.0;
  kappa_ = 1.0;
  growth_ = 1e-12;
  v_range_ = std::sqrt(kappa_ / alpha_);
}

void ZeroDiffusion::apply(double, const Eigen::VectorXd&,
                          const Eigen::VectorXd&, Eigen::VectorXd& out) const {
  out = Eigen::VectorXd::Zero(dim_);
}

DiagonalDampedDiffusion::DiagonalDampedDiffusion(const SpectralGrid& grid,
                                                 double sigma0, double r_v,
                                                 double alpha, double v_range)
    : r_v_(r_v) {
  if (!(r_v > 0.0)) {
    throw InvalidArgument("diagonal_damped.r_v", "must be > 0");
  }
  const int n = grid.coeff_count();
  sigma_.resize(n);
  v_weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double k = grid.wavenumber_of(i);
    v_weights_[i] = 1.0 + k * k;
    sigma_[i] = sigma0 / v_weights_[i];
  }
  sigma_sq_sum_ = sigma_.squaredNorm();

  lipschitz_ = sigma_sq_sum_ / (r_v_ * r_v_);
  alpha_ = alpha;
  beta_ = 1.0;
  v_range_ = v_range;
  kappa_ = sigma_sq_sum_ + alpha_ * v_range * v_range;
  growth_ = sigma_sq_sum_;
}

double DiagonalDampedDiffusion::v_norm(const Eigen::VectorXd& u) const {
  return std::sqrt(u.cwiseProduct(u).dot(v_weights_));
}

double DiagonalDampedDiffusion::damping(const Eigen::VectorXd& u) const {
  const double vn = v_norm(u);
  return vn > r_v_ ? r_v_ / vn : 1.0;
}

void DiagonalDampedDiffusion::apply(double, const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& dw,
                                    Eigen::VectorXd& out) const {
  if (dw.size() != sigma_.size()) {
    throw DimensionError("diagonal_damped.apply: increment has " +
                         std::to_string(dw.size()) + " modes, expected " +
                         std::to_string(sigma_.size()));
  }
  out = damping(u) * sigma_.cwiseProduct(dw);
}

double DiagonalDampedDiffusion::hs_norm_sq(double,
                                           const Eigen::VectorXd& u) const {
  const double rho = damping(u);
  return rho * rho * sigma_sq_sum_;
}

double DiagonalDampedDiffusion::adjoint_norm_sq(
    double, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  const double rho = damping(u);
  return rho * rho * sigma_.cwiseProduct(v).squaredNorm();
}

GalerkinState k_lambda(const SpectralGrid& grid, const GalerkinState& state,
                       double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("k_lambda.lambda", "must lie in [0, 1], got " +
                                                 std::to_string(lambda));
  }
  GalerkinState out = deriv(grid, state, 3);
  if (lambda != 0.0) {
    out.coeffs += lambda * quadratic_term(grid, state).coeffs;
  }
  return out;
}

StateSampler make_gaussian_state_sampler(const SpectralGrid& grid,
                                         double scale, double decay) {
  const int n = grid.coeff_count();
  Eigen::VectorXd stddev(n);
  for (int i = 0; i < n; ++i) {
    const double k = grid.wavenumber_of(i);
    stddev[i] = scale / std::pow(1.0 + k * k, decay);
  }
  return [stddev, n](Rng& rng) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = stddev[i] * rng.gaussian();
    return GalerkinState{std::move(c), 0.0};
  };
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InequalityCheck& c) { return c.pass; });
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "model = " << model_name << "\n";
  out << "result = " << (pass() ? "pass" : "FAIL") << "\n";
  for (const auto& c : checks) {
    out << c.name << ": " << (c.pass ? "pass" : "FAIL")
        << "  samples=" << c.n_samples << "  max_ratio=" << c.max_ratio
        << "  min_margin=" << c.min_margin;
    if (!c.note.empty()) out << "  [" << c.note << "]";
    out << "\n";
  }
  return out.str();
}

namespace {

constexpr double kRatioTolerance = 1.0 + 1e-9;

double jump_integral_sq(const LevyNoiseModel& model,
                        const IntensityMeasure& nu, double t,
                        const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
  double acc = 0.0;
  Eigen::VectorXd f1, f2;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu.rates[i] == 0.0) continue;
    model.jump(t, u1, nu.marks[i], f1);
    model.jump(t, u2, nu.marks[i], f2);
    acc += nu.rates[i] * (f1 - f2).squaredNorm();
  }
  return acc;
}

}  // namespace

ValidationReport validate_hypotheses(const SpectralGrid& grid,
                                     const LevyNoiseModel& model,
                                     const IntensityMeasure& nu,
                                     const StateSampler& sampler,
                                     int n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    throw InvalidArgument("validate_hypotheses.n_samples", "must be >= 1");
  }
  nu.validate();
  Rng rng(seed);
  ValidationReport report;
  report.model_name = "jump:" + model.name();

  // Lipschitz bound on pairs.
  InequalityCheck lip;
  lip.name = "F2";
  lip.n_samples = n_samples;
  lip.pass = true;
  const double l = model.lipschitz_constant();
  for (int s = 0; s < n_samples; ++s) {
    const double t = rng.uniform01();
    const GalerkinState u1 = sampler(rng);
    const GalerkinState u2 = sampler(rng);
    const double lhs = jump_integral_sq(model, nu, t, u1.coeffs, u2.coeffs);
    const double rhs = l * (u1.coeffs - u2.coeffs).squaredNorm();
    if (rhs > 0.0) {
      lip.max_ratio = std::max(lip.max_ratio, lhs / rhs);
    } else if (lhs > 1e-14) {
      lip.max_ratio = std::numeric_limits<double>::infinity();
    }
  }
  lip.pass = lip.max_ratio <= kRatioTolerance;
  lip.min_margin = 1.0 - lip.max_ratio;
  report.checks.push_back(lip);

  // Growth bounds at every declared order.
  Eigen::VectorXd f;
  for (double p : model.growth_orders()) {
    InequalityCheck growth;
    growth.name = "F3[p=" + std::to_string(p) + "]";
    growth.n_samples = n_samples;
    const double cp = model.growth_constant(p);
    for (int s = 0; s < n_samples; ++s) {
      const double t = rng.uniform01();
      const GalerkinState u = sampler(rng);
      double lhs = 0.0;
      for (std::size_t i = 0; i < nu.size(); ++i) {
        if (nu.rates[i] == 0.0) continue;
        model.jump(t, u.coeffs, nu.marks[i], f);
        lhs += nu.rates[i] * std::pow(f.norm(), p);
      }
      const double rhs = cp * (1.0 + std::pow(u.coeffs.norm(), p));
      if (rhs > 0.0) {
        growth.max_ratio = std::max(growth.max_ratio, lhs / rhs);
      } else if (lhs > 1e-14) {
        growth.max_ratio = std::numeric_limits<double>::infinity();
      }
    }
    growth.pass = growth.max_ratio <= kRatioTolerance;
    growth.min_margin = 1.0 - growth.max_ratio;
    report.checks.push_back(growth);
  }
  (void)grid;
  return report;
}

ValidationReport validate_hypotheses(const SpectralGrid& grid,
                                     const DiffusionModel& model,
                                     const StateSampler& sampler,
                                     int n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    throw InvalidArgument("validate_hypotheses.n_samples", "must be >= 1");
  }
  Rng rng(seed);
  ValidationReport report;
  report.model_name = "diffusion:" + model.name();

  InequalityCheck lip;
  lip.name = "Phi1";
  lip.n_samples = n_samples;
  const double l_phi = model.lipschitz_constant();
  for (int s = 0; s < n_samples; ++s) {
    const double t = rng.uniform01();
    const GalerkinState u1 = sampler(rng);
    const GalerkinState u2 = sampler(rng);
    const double lhs = (model.matrix(t, u1.coeffs) - model.matrix(t, u2.coeffs))
                           .squaredNorm();
    GalerkinState diff{u1.coeffs - u2.coeffs, 0.0};
    const double rhs = l_phi * norm_squared(grid, diff, NormKind::V());
    if (rhs > 0.0) {
      lip.max_ratio = std::max(lip.max_ratio, lhs / rhs);
    } else if (lhs > 1e-14) {
      lip.max_ratio = std::numeric_limits<double>::infinity();
    }
  }
  lip.pass = lip.max_ratio <= kRatioTolerance;
  lip.min_margin = 1.0 - lip.max_ratio;
  report.checks.push_back(lip);

  InequalityCheck growth;
  growth.name = "Phi3";
  growth.n_samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    const double t = rng.uniform01();
    const GalerkinState u = sampler(rng);
    const double lhs = model.hs_norm_sq(t, u.coeffs);
    const double rhs =
        model.growth_constant() *
        (std::max(norm(grid, u, NormKind::V()), norm(grid, u, NormKind::H())) +
         1.0);
    growth.max_ratio = std::max(growth.max_ratio, lhs / rhs);
  }
  growth.pass = growth.max_ratio <= kRatioTolerance;
  growth.min_margin = 1.0 - growth.max_ratio;
  report.checks.push_back(growth);

  // Coercivity, lambda in {0, 1}, restricted to the declared |u|_V range.
  for (double lambda : {0.0, 1.0}) {
    InequalityCheck coer;
    coer.name = "Phi2[lambda=" + std::to_string(static_cast<int>(lambda)) + "]";
    coer.n_samples = n_samples;
    coer.min_margin = std::numeric_limits<double>::infinity();
    double held_up_to = 0.0;
    double first_violation = std::numeric_limits<double>::infinity();
    bool in_range_violation = false;
    for (int s = 0; s < n_samples; ++s) {
      const double t = rng.uniform01();
      const GalerkinState u = sampler(rng);
      const double vn = norm(grid, u, NormKind::V());
      const double hn = u.coeffs.norm();
      const double hs2 = model.hs_norm_sq(t, u.coeffs);
      const double pairing =
          2.0 * k_lambda(grid, u, lambda).coeffs.dot(u.coeffs);
      const double lhs = std::min(pairing - hs2, -hs2);
      const double rhs = model.alpha() * vn * vn - model.beta() * hn -
                         model.kappa();
      const double margin = lhs - rhs;
      if (margin >= -1e-9) {
        held_up_to = std::max(held_up_to, vn);
      } else {
        first_violation = std::min(first_violation, vn);
        if (vn <= model.coercivity_v_range()) in_range_violation = true;
      }
      if (vn <= model.coercivity_v_range()) {
        coer.min_margin = std::min(coer.min_margin, margin);
      }
    }
    coer.pass = !in_range_violation;
    std::ostringstream note;
    note << "checked on |u|_V <= " << model.coercivity_v_range()
         << "; held up to |u|_V = " << held_up_to;
    if (std::isfinite(first_violation)) {
      note << "; first violation at |u|_V = " << first_violation;
    }
    coer.note = note.str();
    if (!std::isfinite(coer.min_margin)) coer.min_margin = 0.0;
    report.checks.push_back(coer);
  }
  return report;
}

}  // namespace skdv
