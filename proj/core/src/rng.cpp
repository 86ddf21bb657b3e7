#include "skdv/rng.hpp"

#include <cmath>

namespace skdv {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                 std::uint64_t stream_index) {
  // Two mixing rounds decorrelate (seed, index) lattices.
  return splitmix64(splitmix64(master_seed) ^
                    splitmix64(stream_index * 0xD6E8FEB86659FD93ULL + 1));
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  const double u1 = uniform01_open0();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_gaussian_ = r * std::sin(angle);
  has_cached_gaussian_ = true;
  return r * std::cos(angle);
}

std::uint64_t Rng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  return lambda < 30.0 ? poisson_inversion(lambda) : poisson_ptrs(lambda);
}

std::uint64_t Rng::poisson_inversion(double lambda) {
  // Count uniforms until their product drops below exp(-lambda).
  const double threshold = std::exp(-lambda);
  std::uint64_t count = 0;
  double product = uniform01_open0();
  while (product > threshold) {
    ++count;
    product *= uniform01_open0();
  }
  return count;
}

std::uint64_t Rng::poisson_ptrs(double lambda) {
  // Hörmann (1993), "The transformed rejection method for generating
  // Poisson random variables", PTRS variant. Exact for lambda >= 10.
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = uniform01() - 0.5;
    const double v = uniform01_open0();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - lambda - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace skdv
