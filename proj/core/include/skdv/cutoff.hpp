#pragma once

namespace skdv {

/// Smooth taming profile for the nonlinearity:
///   theta(xi) = 1 on [0, m/2],  theta in [0,1] on [m/2, m],  theta = 0 above m,
/// built from the exp(-1/x) mollifier, so theta is C^infinity.
///
/// Mode selects where the cutoff argument comes from: the H-norm of u_x
/// (default), the pointwise |u_x(x)| on the collocation grid, or no taming
/// at all (negative-control runs).
struct CutoffSpec {
  enum class Mode { norm_based, pointwise, disabled };

  int m = 1;
  Mode mode = Mode::norm_based;

  double theta(double xi) const;
};

}  // namespace skdv
