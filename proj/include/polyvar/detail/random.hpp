#pragma once

// Frozen random variate generators on top of std::mt19937_64. The standard
// library distributions are implementation-defined, so the transforms are
// written out here to keep fields bit-identical across toolchains.

#include <cmath>
#include <cstdint>
#include <random>

namespace polyvar::detail {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for replica r of a run with base seed s.
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
  return splitmix64(seed + replica * 0x9E3779B97F4A7C15ULL);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline double exponential1(Engine& g) { return -std::log1p(-uniform01(g)); }

/// Standard normal by the Marsaglia polar method (second variate discarded).
inline double normal01(Engine& g) {
  while (true) {
    const double u = 2.0 * uniform01(g) - 1.0;
    const double v = 2.0 * uniform01(g) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Gamma(shape, 1): Marsaglia-Tsang for shape >= 1 (no squeeze step), and
/// Gamma(shape + 1) * U^(1/shape) below 1.
inline double gamma_variate(Engine& g, double shape) {
  if (shape < 1.0) {
    const double x = gamma_variate(g, shape + 1.0);
    const double u = uniform01(g);
    return x * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal01(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(g);
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

/// Standard normal conditioned on [lo, hi]. Wide windows reject from the
/// normal itself; narrow ones propose uniformly and accept by the density
/// ratio against its maximum on the window.
inline double truncated_normal(Engine& g, double lo, double hi) {
  if (hi - lo > 2.0 && lo < 1.0 && hi > -1.0) {
    while (true) {
      const double x = normal01(g);
      if (x >= lo && x <= hi) return x;
    }
  }
  const double peak = lo > 0.0 ? lo : (hi < 0.0 ? hi : 0.0);
  while (true) {
    const double x = lo + (hi - lo) * uniform01(g);
    if (uniform01(g) <= std::exp(0.5 * (peak * peak - x * x))) return x;
  }
}

}  // namespace polyvar::detail
