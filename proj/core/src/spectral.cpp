#include "skdv/spectral.hpp"

#include <cmath>
#include <string>

namespace skdv {
namespace {

int default_n_phys(int m) {
  int n = 3 * m + 1;
  if (n % 2 == 0) ++n;  // odd point count: no Nyquist mode to special-case
  return n;
}

void check_grid_args(double x1, double x2, int m, int n_phys) {
  if (!(x2 > x1)) {
    throw InvalidArgument("grid.x2", "must satisfy x2 > x1, got [" +
                                         std::to_string(x1) + ", " +
                                         std::to_string(x2) + "]");
  }
  if (m < 1) {
    throw InvalidArgument("grid.m", "must be >= 1, got " + std::to_string(m));
  }
  if (n_phys < 2 * m + 1) {
    throw InvalidArgument(
        "grid.n_phys", "must be >= 2m+1 = " + std::to_string(2 * m + 1) +
                           ", got " + std::to_string(n_phys));
  }
}

void check_same_dim(const SpectralGrid& grid, const GalerkinState& state,
                    const char* op) {
  if (state.coeffs.size() != grid.coeff_count()) {
    throw DimensionError(std::string(op) + ": state has " +
                         std::to_string(state.coeffs.size()) +
                         " coefficients, grid expects " +
                         std::to_string(grid.coeff_count()));
  }
}

}  // namespace

SpectralGrid::SpectralGrid(double x1, double x2, int m)
    : SpectralGrid(x1, x2, m, default_n_phys(m)) {}

SpectralGrid::SpectralGrid(double x1, double x2, int m, int n_phys)
    : x1_(x1), x2_(x2), m_(m), n_phys_(n_phys) {
  check_grid_args(x1, x2, m, n_phys);

  const double L = x2_ - x1_;
  wavenumbers_.resize(m_ + 1);
  for (int j = 0; j <= m_; ++j) wavenumbers_[j] = 2.0 * M_PI * j / L;

  points_.resize(n_phys_);
  for (int i = 0; i < n_phys_; ++i) points_[i] = x1_ + i * L / n_phys_;

  const double c0 = 1.0 / std::sqrt(L);
  const double cj = std::sqrt(2.0 / L);
  synthesis_.resize(n_phys_, 2 * m_ + 1);
  for (int i = 0; i < n_phys_; ++i) {
    synthesis_(i, 0) = c0;
    const double xi = points_[i] - x1_;
    for (int j = 1; j <= m_; ++j) {
      synthesis_(i, 2 * j - 1) = cj * std::cos(wavenumbers_[j] * xi);
      synthesis_(i, 2 * j) = cj * std::sin(wavenumbers_[j] * xi);
    }
  }
  // Uniform-grid quadrature of f against each basis function; exact by
  // discrete orthogonality as long as no source mode folds onto j <= m.
  analysis_ = (L / n_phys_) * synthesis_.transpose();
}

Eigen::VectorXd SpectralGrid::synthesize(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != 2 * m_ + 1) {
    throw DimensionError("synthesize: got " + std::to_string(coeffs.size()) +
                         " coefficients, expected " +
                         std::to_string(2 * m_ + 1));
  }
  return synthesis_ * coeffs;
}

Eigen::VectorXd SpectralGrid::analyze(const Eigen::VectorXd& samples) const {
  if (samples.size() != n_phys_) {
    throw DimensionError("analyze: got " + std::to_string(samples.size()) +
                         " samples, expected " + std::to_string(n_phys_));
  }
  return analysis_ * samples;
}

GalerkinState SpectralGrid::sample(const std::function<double(double)>& f,
                                   double t) const {
  Eigen::VectorXd samples(n_phys_);
  for (int i = 0; i < n_phys_; ++i) samples[i] = f(points_[i]);
  return GalerkinState{analyze(samples), t};
}

GalerkinState project(const Eigen::VectorXd& coeffs_full, int m) {
  if (m < 1) {
    throw InvalidArgument("project.m", "must be >= 1, got " + std::to_string(m));
  }
  const Eigen::Index want = 2 * static_cast<Eigen::Index>(m) + 1;
  if (coeffs_full.size() < want) {
    throw DimensionError("project: input has " +
                         std::to_string(coeffs_full.size()) +
                         " coefficients, need at least " +
                         std::to_string(want) + " for m=" + std::to_string(m));
  }
  return GalerkinState{coeffs_full.head(want), 0.0};
}

GalerkinState project(const GalerkinState& state, int m) {
  GalerkinState out = project(state.coeffs, m);
  out.t = state.t;
  return out;
}

GalerkinState deriv(const SpectralGrid& grid, const GalerkinState& state,
                    int order) {
  check_same_dim(grid, state, "deriv");
  if (order != 1 && order != 3) {
    throw InvalidArgument("deriv.order",
                          "supported orders are 1 and 3, got " +
                              std::to_string(order));
  }
  const int m = grid.modes();
  Eigen::VectorXd out(2 * m + 1);
  out[0] = 0.0;
  const Eigen::VectorXd& k = grid.wavenumbers();
  for (int j = 1; j <= m; ++j) {
    const double a = state.coeffs[2 * j - 1];
    const double b = state.coeffs[2 * j];
    if (order == 1) {
      // d/dx: (a, b) -> (k b, -k a)
      out[2 * j - 1] = k[j] * b;
      out[2 * j] = -k[j] * a;
    } else {
      // d^3/dx^3: (a, b) -> (-k^3 b, k^3 a)
      const double k3 = k[j] * k[j] * k[j];
      out[2 * j - 1] = -k3 * b;
      out[2 * j] = k3 * a;
    }
  }
  return GalerkinState{std::move(out), state.t};
}

double norm_squared(const SpectralGrid& grid, const GalerkinState& state,
                    NormKind kind) {
  check_same_dim(grid, state, "norm");
  const int m = grid.modes();
  const Eigen::VectorXd& k = grid.wavenumbers();
  switch (kind.tag) {
    case NormKind::Tag::H:
      return state.coeffs.squaredNorm();
    case NormKind::Tag::V: {
      double acc = state.coeffs[0] * state.coeffs[0];
      for (int j = 1; j <= m; ++j) {
        const double w = 1.0 + k[j] * k[j];
        acc += w * (state.coeffs[2 * j - 1] * state.coeffs[2 * j - 1] +
                    state.coeffs[2 * j] * state.coeffs[2 * j]);
      }
      return acc;
    }
    case NormKind::Tag::VDual: {
      double acc = state.coeffs[0] * state.coeffs[0];
      for (int j = 1; j <= m; ++j) {
        const double w = std::pow(1.0 + k[j] * k[j], -kind.s);
        acc += w * (state.coeffs[2 * j - 1] * state.coeffs[2 * j - 1] +
                    state.coeffs[2 * j] * state.coeffs[2 * j]);
      }
      return acc;
    }
  }
  return 0.0;  // unreachable
}

double norm(const SpectralGrid& grid, const GalerkinState& state,
            NormKind kind) {
  return std::sqrt(norm_squared(grid, state, kind));
}

GalerkinState quadratic_term(const SpectralGrid& grid,
                             const GalerkinState& state) {
  check_same_dim(grid, state, "quadratic_term");
  const GalerkinState ux = deriv(grid, state, 1);
  const Eigen::VectorXd u_phys = grid.synthesize(state.coeffs);
  const Eigen::VectorXd ux_phys = grid.synthesize(ux.coeffs);
  return GalerkinState{grid.analyze(u_phys.cwiseProduct(ux_phys)), state.t};
}

GalerkinState nonlinear_term(const SpectralGrid& grid,
                             const GalerkinState& state,
                             const CutoffSpec& cutoff) {
  check_same_dim(grid, state, "nonlinear_term");
  const GalerkinState ux = deriv(grid, state, 1);

  if (cutoff.mode == CutoffSpec::Mode::pointwise) {
    // theta enters the product before projection; the triple product is not
    // band-limited, so this variant is only as dealiased as n_phys allows.
    const Eigen::VectorXd u_phys = grid.synthesize(state.coeffs);
    Eigen::VectorXd ux_phys = grid.synthesize(ux.coeffs);
    const double inv_m = 1.0 / static_cast<double>(cutoff.m);
    for (Eigen::Index i = 0; i < ux_phys.size(); ++i) {
      ux_phys[i] *= cutoff.theta(std::abs(ux_phys[i]) * inv_m) * u_phys[i];
    }
    return GalerkinState{grid.analyze(ux_phys), state.t};
  }

  double scale = 1.0;
  if (cutoff.mode == CutoffSpec::Mode::norm_based) {
    scale = cutoff.theta(ux.coeffs.norm() / static_cast<double>(cutoff.m));
    if (scale == 0.0) {
      return GalerkinState{Eigen::VectorXd::Zero(grid.coeff_count()), state.t};
    }
  }
  GalerkinState out = quadratic_term(grid, state);
  out.coeffs *= scale;
  return out;
}

}  // namespace skdv
