#pragma once

#include <Eigen/Core>
#include <functional>

#include "skdv/cutoff.hpp"
#include "skdv/errors.hpp"

namespace skdv {

/// Truncated solution at one time instant: coefficients against the real
/// orthonormal Fourier basis of L^2([x1,x2]), layout
///   [c0, a1, b1, a2, b2, ..., am, bm]   (length 2m+1)
/// where c0 multiplies 1/sqrt(L), a_j multiplies sqrt(2/L) cos(k_j (x-x1)),
/// b_j multiplies sqrt(2/L) sin(k_j (x-x1)), k_j = 2*pi*j/L.
/// Parseval holds by construction: |u|_H = ||coeffs||_2.
struct GalerkinState {
  Eigen::VectorXd coeffs;
  double t = 0.0;

  int modes() const { return static_cast<int>((coeffs.size() - 1) / 2); }
  bool all_finite() const { return coeffs.allFinite(); }
};

/// Sobolev norm selector. H is the L^2 norm (per-mode weight 1), V the
/// first-order norm (weight sqrt(1+k^2)), VDual the negative-order dual
/// norm of order s (weight (1+k^2)^(-s/2)). The dual norm with s=3 hosts
/// the increment diagnostics.
struct NormKind {
  enum class Tag { H, V, VDual };
  Tag tag = Tag::H;
  double s = 3.0;  // only meaningful for VDual

  static NormKind H() { return {Tag::H, 0.0}; }
  static NormKind V() { return {Tag::V, 0.0}; }
  static NormKind VDual(double s) { return {Tag::VDual, s}; }
};

/// Periodic spectral discretization of [x1,x2] with m retained mode pairs
/// and n_phys uniform collocation points. Realizes the projection P_m and
/// the exact synthesis/analysis pair between coefficients and samples.
///
/// n_phys >= 2m+1 is required to represent the basis; the default is the
/// smallest odd n >= 3m+1, which makes quadratic products alias-free (the
/// 2/3 rule): a product of two modes <= m has bandwidth 2m, and no mode
/// j' <= 2m can fold onto a retained mode j <= m when n >= 3m+1.
class SpectralGrid {
 public:
  SpectralGrid(double x1, double x2, int m);
  SpectralGrid(double x1, double x2, int m, int n_phys);

  double x1() const { return x1_; }
  double x2() const { return x2_; }
  double length() const { return x2_ - x1_; }
  int modes() const { return m_; }
  int coeff_count() const { return 2 * m_ + 1; }
  int n_phys() const { return n_phys_; }

  /// k_j = 2*pi*j/L for j = 0..m.
  const Eigen::VectorXd& wavenumbers() const { return wavenumbers_; }

  /// Wavenumber attached to coefficient index i (0 for i=0, else k_{(i+1)/2}).
  double wavenumber_of(int coeff_index) const {
    return wavenumbers_[(coeff_index + 1) / 2];
  }

  /// Collocation points x_i = x1 + i L/n, i = 0..n-1.
  const Eigen::VectorXd& collocation_points() const { return points_; }

  /// Coefficients -> samples at the collocation points. Exact.
  Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;

  /// Samples -> first 2m+1 coefficients. Exact for functions band-limited
  /// to n_phys - m - 1 modes; in particular for quadratic products of
  /// band-limited-to-m data when n_phys >= 3m+1.
  Eigen::VectorXd analyze(const Eigen::VectorXd& samples) const;

  /// Sample a function at the collocation points and analyze it.
  GalerkinState sample(const std::function<double(double)>& f,
                       double t = 0.0) const;

 private:
  double x1_, x2_;
  int m_, n_phys_;
  Eigen::VectorXd wavenumbers_;
  Eigen::VectorXd points_;
  Eigen::MatrixXd synthesis_;  // n_phys x (2m+1)
  Eigen::MatrixXd analysis_;   // (2m+1) x n_phys  ==  (L/n) synthesis^T
};

/// Orthogonal projection P_m: keeps the first 2m+1 coefficients.
GalerkinState project(const Eigen::VectorXd& coeffs_full, int m);
GalerkinState project(const GalerkinState& state, int m);

/// Spectral derivative of the given order (1 or 3 supported; these are the
/// orders the dynamics use). Mode j is multiplied by (i k_j)^order in the
/// complex representation c_j = a_j - i b_j; conjugate symmetry is
/// automatic in the real layout.
GalerkinState deriv(const SpectralGrid& grid, const GalerkinState& state,
                    int order);

/// Weighted l^2 norm of the coefficients per NormKind.
double norm(const SpectralGrid& grid, const GalerkinState& state,
            NormKind kind);
double norm_squared(const SpectralGrid& grid, const GalerkinState& state,
                    NormKind kind);

/// Dealiased P_m(u u_x), no taming. Physical-space multiplication on the
/// n_phys points followed by projection.
GalerkinState quadratic_term(const SpectralGrid& grid,
                             const GalerkinState& state);

/// The tamed nonlinearity theta(.) P_m(u u_x). In norm_based mode the
/// cutoff argument is |u_x|_H / m, so the scalar theta multiplies the
/// dealiased product; in pointwise mode theta(|u_x(x)|/m) enters the
/// physical-space product before projection; disabled means theta == 1.
GalerkinState nonlinear_term(const SpectralGrid& grid,
                             const GalerkinState& state,
                             const CutoffSpec& cutoff);

}  // namespace skdv
