#include "skdv/cutoff.hpp"

#include <cmath>

namespace skdv {
namespace {

double mollifier(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// Smooth step: 0 at x<=0, 1 at x>=1, C^inf everywhere.
double smoothstep(double x) {
  const double a = mollifier(x);
  const double b = mollifier(1.0 - x);
  return a / (a + b);
}

}  // namespace

double CutoffSpec::theta(double xi) const {
  if (mode == Mode::disabled) return 1.0;
  const double half = 0.5 * static_cast<double>(m);
  if (xi <= half) return 1.0;
  if (xi >= static_cast<double>(m)) return 0.0;
  return 1.0 - smoothstep((xi - half) / half);
}

}  // namespace skdv
