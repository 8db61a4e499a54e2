#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "logicmix/errors.hpp"

namespace logicmix {

namespace detail {

// splitmix64 finalizer; used to key streams, not as the generator itself.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic random stream keyed by (seed, stream ids). The engine is
/// std::mt19937_64, whose sequence is pinned by the standard; all draw
/// primitives below are implemented here rather than with std::*_distribution
/// so that sequences are identical across standard libraries and platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(detail::mix64(seed)) {}

  template <typename... Ids>
  RngStream(std::uint64_t seed, Ids... stream_ids) : engine_(key(seed, stream_ids...)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution. Exactly one engine call.
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on {0, ..., n-1} by 128-bit multiply-high; exactly one engine
  /// call per draw (bias <= n / 2^64, far below any test resolution here).
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw ContractViolation("RngStream::bounded: n must be >= 1");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform on {lo, ..., hi} inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw ContractViolation("RngStream::uniform_int: lo > hi");
    return lo + bounded(hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform_double() < p; }

  /// Standard normal via Box-Muller (the spare variate is discarded).
  double normal() {
    double u1 = uniform_double();
    double u2 = uniform_double();
    while (u1 == 0.0) u1 = uniform_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Gamma(alpha, 1). Marsaglia-Tsang squeeze for alpha >= 1; the alpha < 1
  /// case boosts through Gamma(alpha + 1) * U^(1/alpha), which stays correct
  /// where naive inverse methods degenerate.
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw ContractViolation("RngStream::gamma: alpha must be > 0");
    if (alpha < 1.0) {
      const double u = uniform_double();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    const double sum = ga + gb;
    if (sum == 0.0) return 0.5;  // both gammas underflowed; measure-zero tie
    return ga / sum;
  }

 private:
  template <typename... Ids>
  static std::uint64_t key(std::uint64_t seed, Ids... stream_ids) {
    std::uint64_t k = detail::mix64(seed);
    ((k = detail::mix64(k ^ detail::mix64(static_cast<std::uint64_t>(stream_ids)))), ...);
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace logicmix
