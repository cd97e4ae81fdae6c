#pragma once

// Positive-temperature periodic theory: transfer matrix over the quotient,
// Perron-Frobenius eigenvalue and eigenvectors, the corrector built from the
// right eigenvector, the tilted invariant measure with its entropy, and the
// point-to-level Busemann function.
//
// Everything runs in the log domain so large beta does not overflow.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "polyvar/detail/graph.hpp"
#include "polyvar/detail/maxplus_core.hpp"
#include "polyvar/error.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/periodic_env.hpp"

namespace polyvar {

namespace detail {

inline double log_sum_exp(const double* v, std::size_t n) {
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& v) { return log_sum_exp(v.data(), v.size()); }

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double mx = std::max(a, b);
  return mx + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace detail

/// A(omega, omega') = |R|^-1 sum_{z: T_z omega = omega'} exp(beta (V0(omega) + h.z)),
/// stored as entrywise logarithms (-inf where A vanishes).
struct TransferMatrix {
  std::size_t size = 0;
  double beta = 1.0;
  Tilt h;
  std::vector<double> log_entries;

  double log_at(std::size_t i, std::size_t j) const { return log_entries[i * size + j]; }
  double at(std::size_t i, std::size_t j) const { return std::exp(log_at(i, j)); }
};

namespace detail {

inline TransferMatrix transfer_matrix_unchecked(const QuotientSpace& q, const Tilt& h, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("beta must be a positive finite number");
  h.validate(q.steps().dimension());
  const std::size_t m = q.size();
  const auto& steps = q.steps();
  const double log_r = std::log(static_cast<double>(steps.size()));
  TransferMatrix a{m, beta, h, std::vector<double>(m * m, kNegInf)};
  for (std::size_t w = 0; w < m; ++w)
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const std::size_t t = q.shift(w, k);
      const double e = beta * (q.v0(w) + h.dot(steps[k])) - log_r;
      a.log_entries[w * m + t] = log_add(a.log_entries[w * m + t], e);
    }
  return a;
}

}  // namespace detail

/// Linear-domain-safe builder: refuses parameters whose exponentials would
/// leave double range. Use build_log_transfer_matrix for large beta.
inline TransferMatrix build_transfer_matrix(const QuotientSpace& q, const Tilt& h, double beta) {
  double vmax = 0.0;
  for (double v : q.potential()) vmax = std::max(vmax, std::abs(v));
  double hmax = 0.0;
  for (const auto& z : q.steps().steps()) hmax = std::max(hmax, std::abs(h.dot(z)));
  if (beta * (vmax + hmax) > 700.0)
    throw OverflowGuard("beta*(max|V0| + max|h.z|) = " + std::to_string(beta * (vmax + hmax)) +
                        " exceeds 700; use build_log_transfer_matrix");
  return detail::transfer_matrix_unchecked(q, h, beta);
}

/// Same matrix with no range restriction; all consumers work on log entries.
inline TransferMatrix build_log_transfer_matrix(const QuotientSpace& q, const Tilt& h, double beta) {
  return detail::transfer_matrix_unchecked(q, h, beta);
}

struct PFSolution {
  double beta = 1.0;
  Tilt h;
  double log_rho = 0.0;
  double rho = 0.0;  // may be +inf for very large beta; log_rho is authoritative
  double g_pl = 0.0;
  std::vector<double> log_lev;
  std::vector<double> log_rev;
  std::vector<double> lev;
  std::vector<double> rev;
  std::vector<double> mu0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct PFOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
};

namespace detail {

// (A x)(i) in log form for log-vector x.
inline std::vector<double> log_apply(const TransferMatrix& a, const std::vector<double>& x,
                                     bool transpose) {
  const std::size_t m = a.size;
  std::vector<double> out(m), buf(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      buf[j] = (transpose ? a.log_at(j, i) : a.log_at(i, j)) + x[j];
    out[i] = log_sum_exp(buf);
  }
  return out;
}

struct PowerResult {
  std::vector<double> log_vec;
  double log_rho = 0.0;
  std::size_t iterations = 0;
};

// Shifted power iteration on A + eps I in the log domain. The start vector is
// the max-plus eigenvector of log A and eps = exp(max cycle mean of log A),
// which lies within a factor m of rho, so periodic patterns converge fast
// regardless of how skewed the entries are.
inline PowerResult power_iterate(const TransferMatrix& a, bool transpose, const PFOptions& opt) {
  const std::size_t m = a.size;
  DenseMaxPlus lm{m, a.log_entries};
  if (transpose)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) lm(i, j) = a.log_at(j, i);
  const double lambda = karp_max_cycle_mean(lm);
  const auto star = kleene_star(normalized(lm, lambda));
  std::vector<double> x = star_column(star, 0);
  // Column 0 may be -inf off the critical class only if unreachable, which
  // irreducibility excludes; guard anyway.
  for (double& v : x)
    if (!std::isfinite(v)) v = 0.0;
  const double log_eps = lambda;

  double last_spread = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    auto y = log_apply(a, x, transpose);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = log_add(y[i], log_eps + x[i]);
      const double r = y[i] - x[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double mx = *std::max_element(y.begin(), y.end());
    for (double& v : y) v -= mx;
    x = std::move(y);
    const double log_shifted = 0.5 * (lo + hi);
    last_spread = hi - lo;
    if (last_spread <= opt.tolerance * std::max(1.0, std::abs(log_shifted))) {
      // rho = (rho + eps) - eps, done in logs.
      const double log_rho = log_shifted + std::log1p(-std::exp(log_eps - log_shifted));
      return {x, log_rho, it};
    }
  }
  throw ConvergenceError("power iteration did not converge", last_spread);
}

}  // namespace detail

/// Perron-Frobenius eigenvalue rho, g_pl = beta^-1 log rho, eigenvectors
/// normalized so that sum rev = m and sum lev*rev = 1.
inline PFSolution solve_pf(const TransferMatrix& a, const PFOptions& opt = {}) {
  const std::size_t m = a.size;
  const auto right = detail::power_iterate(a, false, opt);
  const auto left = detail::power_iterate(a, true, opt);

  PFSolution s;
  s.beta = a.beta;
  s.h = a.h;
  s.log_rho = right.log_rho;
  s.rho = std::exp(s.log_rho);
  s.g_pl = s.log_rho / a.beta;
  s.iterations = std::max(right.iterations, left.iterations);

  s.log_rev = right.log_vec;
  const double rshift = std::log(static_cast<double>(m)) - detail::log_sum_exp(s.log_rev);
  for (double& v : s.log_rev) v += rshift;
  s.log_lev = left.log_vec;
  std::vector<double> prod(m);
  for (std::size_t i = 0; i < m; ++i) prod[i] = s.log_lev[i] + s.log_rev[i];
  const double lshift = -detail::log_sum_exp(prod);
  for (double& v : s.log_lev) v += lshift;

  // Two-sided quotient lev.A.rev / lev.rev: second order in the eigenvector
  // errors, so sharper than the stopping bound of the iteration.
  const auto ar = detail::log_apply(a, s.log_rev, false);
  std::vector<double> num(m);
  for (std::size_t i = 0; i < m; ++i) num[i] = s.log_lev[i] + ar[i];
  s.log_rho = detail::log_sum_exp(num);
  s.rho = std::exp(s.log_rho);
  s.g_pl = s.log_rho / a.beta;

  s.lev.resize(m);
  s.rev.resize(m);
  s.mu0.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.lev[i] = std::exp(s.log_lev[i]);
    s.rev[i] = std::exp(s.log_rev[i]);
    s.mu0[i] = std::exp(s.log_lev[i] + s.log_rev[i]);
  }

  // Relative eigen-equation residuals for both vectors.
  const auto al = detail::log_apply(a, s.log_lev, true);
  for (std::size_t i = 0; i < m; ++i) {
    s.residual = std::max(s.residual, std::abs(std::expm1(ar[i] - s.log_rho - s.log_rev[i])));
    s.residual = std::max(s.residual, std::abs(std::expm1(al[i] - s.log_rho - s.log_lev[i])));
  }
  return s;
}

/// Collatz-Wielandt quotients min/max_i (A phi)(i) / phi(i) for positive phi,
/// returned as logarithms. They bracket rho.
inline std::pair<double, double> collatz_wielandt_log(const TransferMatrix& a,
                                                      const std::vector<double>& log_phi) {
  const auto y = detail::log_apply(a, log_phi, false);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < a.size; ++i) {
    lo = std::min(lo, y[i] - log_phi[i]);
    hi = std::max(hi, y[i] - log_phi[i]);
  }
  return {lo, hi};
}

/// Corrector potential f = beta^-1 log rev.
inline GradientCocycle corrector_from_rev(const PFSolution& sol) {
  GradientCocycle f;
  f.f.reserve(sol.log_rev.size());
  for (double v : sol.log_rev) f.f.push_back(v / sol.beta);
  return f;
}

/// Per-state bracket beta^-1 log sum_z |R|^-1 exp(beta(V0 + h.z + F(omega,0,z))).
inline std::vector<double> cocycle_brackets(const QuotientSpace& q, const Tilt& h, double beta,
                                            const GradientCocycle& f) {
  const auto& steps = q.steps();
  const double log_r = std::log(static_cast<double>(steps.size()));
  std::vector<double> out(q.size());
  std::vector<double> terms(steps.size());
  for (std::size_t w = 0; w < q.size(); ++w) {
    for (std::size_t k = 0; k < steps.size(); ++k)
      terms[k] = beta * (q.v0(w) + h.dot(steps[k]) + f.increment(q, w, k));
    out[w] = (detail::log_sum_exp(terms) - log_r) / beta;
  }
  return out;
}

/// max over states of the cocycle bracket; an upper bound for g_pl that is
/// attained by the corrector.
inline double evaluate_cocycle_formula(const QuotientSpace& q, const Tilt& h, double beta,
                                       const GradientCocycle& f) {
  const auto b = cocycle_brackets(q, h, beta, f);
  return *std::max_element(b.begin(), b.end());
}

struct EntropyReport {
  std::vector<double> mu0;
  std::vector<std::vector<double>> q0;           // state kernel
  std::vector<std::vector<double>> step_kernel;  // probability of step k from state w
  double energy = 0.0;                           // E[V0 + h.Z1]
  double entropy = 0.0;                          // H(mu x q | mu x p)
  double identity_gap = 0.0;                     // |energy - H/beta - g_pl|
  double stationarity_error = 0.0;               // max |mu0 q0 - mu0|
  double kernel_row_error = 0.0;                 // max |sum_k step_kernel - 1|
};

/// Tilted invariant measure and the entropy identity
/// E[V0 + h.Z1] - beta^-1 H = g_pl. The relative entropy is taken on the
/// step level (Omega x R), which is where the kernel p is uniform.
inline EntropyReport invariant_measure_and_entropy(const QuotientSpace& q, const PFSolution& sol) {
  const auto& steps = q.steps();
  const std::size_t m = q.size();
  const std::size_t r = steps.size();
  const double log_r = std::log(static_cast<double>(r));
  EntropyReport rep;
  rep.mu0 = sol.mu0;
  rep.q0.assign(m, std::vector<double>(m, 0.0));
  rep.step_kernel.assign(m, std::vector<double>(r, 0.0));
  std::vector<double> log_q(r);
  for (std::size_t w = 0; w < m; ++w) {
    for (std::size_t k = 0; k < r; ++k)
      log_q[k] = sol.beta * (q.v0(w) + sol.h.dot(steps[k])) - log_r + sol.log_rev[q.shift(w, k)] -
                 sol.log_rev[w] - sol.log_rho;
    // Rows sum to 1 up to the eigenvector error; renormalize so the kernel is
    // exactly stochastic.
    const double row_log = detail::log_sum_exp(log_q);
    rep.kernel_row_error = std::max(rep.kernel_row_error, std::abs(std::expm1(row_log)));
    double row = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
      const std::size_t t = q.shift(w, k);
      const double log_p = log_q[k] - row_log;
      const double p = std::exp(log_p);
      rep.step_kernel[w][k] = p;
      rep.q0[w][t] += p;
      row += p;
      rep.energy += sol.mu0[w] * p * (q.v0(w) + sol.h.dot(steps[k]));
      if (p > 0.0) rep.entropy += sol.mu0[w] * p * (log_p + log_r);
    }
    rep.kernel_row_error = std::max(rep.kernel_row_error, std::abs(row - 1.0));
  }
  for (std::size_t t = 0; t < m; ++t) {
    double mass = 0.0;
    for (std::size_t w = 0; w < m; ++w) mass += sol.mu0[w] * rep.q0[w][t];
    rep.stationarity_error = std::max(rep.stationarity_error, std::abs(mass - sol.mu0[t]));
  }
  rep.identity_gap = std::abs(rep.energy - rep.entropy / sol.beta - sol.g_pl);
  return rep;
}

/// Period of the positivity pattern of A (1 means primitive).
inline std::size_t transfer_period(const QuotientSpace& q) {
  detail::Adjacency adj(q.size());
  for (std::size_t w = 0; w < q.size(); ++w)
    for (std::size_t k = 0; k < q.steps().size(); ++k) adj[w].push_back(q.shift(w, k));
  std::vector<std::size_t> all(q.size());
  std::iota(all.begin(), all.end(), 0);
  return detail::cyclicity(adj, all);
}

struct BusemannPF {
  PFSolution solution;
  /// limit[w][k] = beta^-1 (log rho + log rev(w) - log rev(T_{z_k} w))
  std::vector<std::vector<double>> limit;
  /// trace[w][k][n-1] = finite-n gradient for n = 1..n_max
  std::vector<std::vector<std::vector<double>>> trace;
  /// max |trace at n_max - limit|
  double max_deviation = 0.0;
  /// max over states of |-beta^-1 log sum_z |R|^-1 exp(-beta(B - h.z)) - V0|
  double recovery_residual = 0.0;
};

/// Point-to-level Busemann function from finite-n gradients
/// beta^-1 [log sum_w' A^n(w, w') - log sum_w' A^{n-1}(T_z w, w')].
inline BusemannPF busemann_pf(const QuotientSpace& q, const Tilt& h, double beta,
                              std::size_t n_max = 200, const PFOptions& opt = {}) {
  if (n_max < 1) throw std::invalid_argument("busemann_pf: n_max must be >= 1");
  const std::size_t period = transfer_period(q);
  if (period != 1)
    throw NotPrimitive("transfer matrix has period " + std::to_string(period));
  const auto a = build_log_transfer_matrix(q, h, beta);
  BusemannPF out;
  out.solution = solve_pf(a, opt);
  const auto& s = out.solution;
  const auto& steps = q.steps();
  const std::size_t m = q.size();
  const std::size_t r = steps.size();

  out.limit.assign(m, std::vector<double>(r, 0.0));
  for (std::size_t w = 0; w < m; ++w)
    for (std::size_t k = 0; k < r; ++k)
      out.limit[w][k] = (s.log_rho + s.log_rev[w] - s.log_rev[q.shift(w, k)]) / beta;

  // u_n = log(A^n 1) kept normalized; the dropped constants are re-added.
  out.trace.assign(m, std::vector<std::vector<double>>(r));
  std::vector<double> prev(m, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    auto cur = detail::log_apply(a, prev, false);
    const double c = *std::max_element(cur.begin(), cur.end());
    for (double& v : cur) v -= c;
    for (std::size_t w = 0; w < m; ++w)
      for (std::size_t k = 0; k < r; ++k)
        out.trace[w][k].push_back((cur[w] + c - prev[q.shift(w, k)]) / beta);
    prev = std::move(cur);
  }

  std::vector<double> terms(r);
  for (std::size_t w = 0; w < m; ++w) {
    for (std::size_t k = 0; k < r; ++k) {
      out.max_deviation =
          std::max(out.max_deviation, std::abs(out.trace[w][k].back() - out.limit[w][k]));
      terms[k] = -beta * (out.limit[w][k] - h.dot(steps[k]));
    }
    const double recovered = -(detail::log_sum_exp(terms) - std::log(static_cast<double>(r))) / beta;
    out.recovery_residual = std::max(out.recovery_residual, std::abs(recovered - q.v0(w)));
  }
  return out;
}

}  // namespace polyvar
