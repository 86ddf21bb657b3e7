#pragma once

#include <cstdint>
#include <random>

namespace skdv {

/// Derives the seed of an independent stream from a master seed and a
/// stream index ("splitmix64-v1"). Streams with distinct indices are
/// statistically independent for Monte Carlo purposes; the rule is pure
/// arithmetic, so an ensemble is reproducible from (master_seed, index)
/// alone regardless of scheduling.
std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                 std::uint64_t stream_index);

/// Deterministic random source. All samplers are hand-rolled on top of
/// std::mt19937_64 (whose output sequence is pinned by the standard), so a
/// given seed yields the same draws on every platform; std::*_distribution
/// would not guarantee that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform01_open0() { return 1.0 - uniform01(); }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Integer uniform on [0, n) via rejection (no modulo bias).
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box–Muller (second value cached).
  double gaussian();

  /// Normal with the given standard deviation.
  double gaussian(double stddev) { return stddev * gaussian(); }

  /// Exact Poisson(lambda) sample. Inversion by uniform products for small
  /// lambda, Hörmann's PTRS transformed rejection for large.
  std::uint64_t poisson(double lambda);

  double exponential(double rate) { return -std::log(uniform01_open0()) / rate; }

 private:
  std::uint64_t poisson_inversion(double lambda);
  std::uint64_t poisson_ptrs(double lambda);

  std::mt19937_64 engine_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace skdv
