#pragma once

// Dense max-plus primitives over R u {-inf}, shared by the zero-temperature
// solver and the log-domain Perron-Frobenius iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace polyvar::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Row-major square matrix over the max-plus semiring.
struct DenseMaxPlus {
  std::size_t n = 0;
  std::vector<double> a;

  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
};

/// Karp's maximum cycle mean. D_k(v) is the heaviest k-edge walk ending at v
/// (from any start); lambda = max_v min_k (D_n(v) - D_k(v)) / (n - k).
inline double karp_max_cycle_mean(const DenseMaxPlus& m) {
  const std::size_t n = m.n;
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, kNegInf));
  std::fill(d[0].begin(), d[0].end(), 0.0);
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t u = 0; u < n; ++u) {
      if (d[k - 1][u] == kNegInf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const double w = m(u, v);
        if (w == kNegInf) continue;
        d[k][v] = std::max(d[k][v], d[k - 1][u] + w);
      }
    }
  double best = kNegInf;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == kNegInf) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (d[k][v] == kNegInf) continue;
      worst = std::min(worst, (d[n][v] - d[k][v]) / static_cast<double>(n - k));
    }
    best = std::max(best, worst);
  }
  return best;
}

/// Kleene star I + A + A^2 + ... by Floyd-Warshall; valid when no cycle has
/// positive weight.
inline DenseMaxPlus kleene_star(const DenseMaxPlus& m) {
  DenseMaxPlus s = m;
  const std::size_t n = m.n;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double ik = s(i, k);
      if (ik == kNegInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double kj = s(k, j);
        if (kj == kNegInf) continue;
        s(i, j) = std::max(s(i, j), ik + kj);
      }
    }
  for (std::size_t i = 0; i < n; ++i) s(i, i) = std::max(s(i, i), 0.0);
  return s;
}

/// A - lambda entrywise.
inline DenseMaxPlus normalized(const DenseMaxPlus& m, double lambda) {
  DenseMaxPlus out = m;
  for (double& v : out.a)
    if (v != kNegInf) v -= lambda;
  return out;
}

/// Eigenvector from the star column at node c: sigma(i) = star(i, c).
inline std::vector<double> star_column(const DenseMaxPlus& star, std::size_t c) {
  std::vector<double> col(star.n);
  for (std::size_t i = 0; i < star.n; ++i) col[i] = star(i, c);
  return col;
}

/// Value of the heaviest cycle through each node, relative to lambda:
/// max_j A_lambda(i, j) + star(j, i). Zero exactly on critical nodes.
inline std::vector<double> cycle_excess(const DenseMaxPlus& normalized_m, const DenseMaxPlus& star) {
  const std::size_t n = normalized_m.n;
  std::vector<double> out(n, kNegInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = normalized_m(i, j);
      if (w == kNegInf || star(j, i) == kNegInf) continue;
      out[i] = std::max(out[i], w + star(j, i));
    }
  return out;
}

}  // namespace polyvar::detail
