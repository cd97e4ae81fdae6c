#pragma once

// Closed forms for the exactly solvable 1+1 dimensional models (log-gamma
// polymer, exponential corner growth), annealed bounds, and grid Legendre
// transforms between point-to-point and point-to-level free energies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "polyvar/error.hpp"
#include "polyvar/mc_engine.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/special_functions.hpp"

namespace polyvar {

namespace detail {

inline void require_open_unit(double s, const char* what) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument(std::string(what) + ": s must lie in (0,1)");
}

// Root of a decreasing function on (lo, hi) by bisection to machine precision.
template <class Fn>
double bisect_decreasing(Fn&& fn, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Log-gamma polymer: Gamma(rho) weights, V0 = -log w + log 2, beta = 1.
struct LogGammaModel {
  double rho = 1.0;

  void validate() const {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive");
  }
};

/// theta in (0, rho) with s Psi1(theta) = (1 - s) Psi1(rho - theta).
inline double loggamma_theta(const LogGammaModel& m, double s) {
  m.validate();
  detail::require_open_unit(s, "loggamma_theta");
  return detail::bisect_decreasing(
      [&](double t) { return s * trigamma(t) - (1.0 - s) * trigamma(m.rho - t); }, 0.0, m.rho);
}

inline double loggamma_theta_residual(const LogGammaModel& m, double s, double theta) {
  return s * trigamma(theta) - (1.0 - s) * trigamma(m.rho - theta);
}

/// g_pp at xi = (s, 1 - s): -s Psi0(theta) - (1 - s) Psi0(rho - theta).
inline double loggamma_gpp(const LogGammaModel& m, double s) {
  const double t = loggamma_theta(m, s);
  return -s * digamma(t) - (1.0 - s) * digamma(m.rho - t);
}

inline double loggamma_gpp(const LogGammaModel& m, const Velocity& v) {
  if (v.xi.size() != 2) throw std::invalid_argument("log-gamma velocities are two-dimensional");
  return loggamma_gpp(m, v.xi[0]);
}

struct LogGammaDual {
  double theta = 0.0;
  Tilt h;  // representative with h2 = 0
  double g_pl = 0.0;
  double g_pp = 0.0;
  double duality_residual = 0.0;  // |g_pl - g_pp - h.xi|
};

/// Tilt dual to xi = (s, 1 - s): h1 - h2 = Psi0(theta) - Psi0(rho - theta),
/// and g_pl(h) = h1 - Psi0(theta).
inline LogGammaDual loggamma_duality(const LogGammaModel& m, double s) {
  LogGammaDual d;
  d.theta = loggamma_theta(m, s);
  d.h.h = {digamma(d.theta) - digamma(m.rho - d.theta), 0.0};
  d.g_pl = d.h.h[0] - digamma(d.theta);
  d.g_pp = -s * digamma(d.theta) - (1.0 - s) * digamma(m.rho - d.theta);
  d.duality_residual = std::abs(d.g_pl - d.g_pp - (d.h.h[0] * s + d.h.h[1] * (1.0 - s)));
  return d;
}

/// g_pl(h) for any tilt: theta solves Psi0(theta) - Psi0(rho - theta) = h1 - h2.
inline double loggamma_gpl(const LogGammaModel& m, const Tilt& h) {
  m.validate();
  h.validate(2);
  const double target = h.h[0] - h.h[1];
  const double t = detail::bisect_decreasing(
      [&](double x) { return target - (digamma(x) - digamma(m.rho - x)); }, 0.0, m.rho);
  return h.h[0] - digamma(t);
}

/// Exponential corner growth: 1 + 2 sqrt(s (1 - s)) on [0, 1].
inline double rost_gpp(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("rost_gpp: s must lie in [0,1]");
  return 1.0 + 2.0 * std::sqrt(s * (1.0 - s));
}

inline double exp_alpha(double s) {
  detail::require_open_unit(s, "exp_alpha");
  return std::sqrt(s) / (std::sqrt(s) + std::sqrt(1.0 - s));
}

/// sup_s [1 + 2 sqrt(s(1 - s)) + h1 s + h2 (1 - s)]
/// = 1 + (h1 + h2)/2 + sqrt(1 + (h1 - h2)^2 / 4).
inline double rost_gpl(const Tilt& h) {
  h.validate(2);
  const double c = h.h[0] - h.h[1];
  return 1.0 + 0.5 * (h.h[0] + h.h[1]) + std::sqrt(1.0 + 0.25 * c * c);
}

/// h(xi) = -(1/alpha, 1/(1 - alpha)).
inline Tilt exp_dual_tilt(double s) {
  const double a = exp_alpha(s);
  return Tilt{{-1.0 / a, -1.0 / (1.0 - a)}};
}

/// log sum_z |R|^-1 e^{h.z}.
inline double kappa(const StepSet& steps, const Tilt& h) {
  h.validate(steps.dimension());
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& z : steps.steps()) mx = std::max(mx, h.dot(z));
  double s = 0.0;
  for (const auto& z : steps.steps()) s += std::exp(h.dot(z) - mx);
  return mx + std::log(s / static_cast<double>(steps.size()));
}

struct AnnealedValues {
  double lambda_beta = 0.0;  // log E e^{beta V0}
  double kappa = 0.0;        // kappa(beta h)
  double g_weak = 0.0;       // beta^-1 (lambda + kappa), an upper bound for g_pl
};

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace detail

/// Annealed free energy beta^-1 (log E e^{beta V0} + kappa(beta h)).
inline AnnealedValues annealed_formulas(const DistributionSpec& dist, double beta, const Tilt& h,
                                        const StepSet& steps) {
  dist.validate();
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("annealed formulas need finite positive beta");
  if (dist.transform != WeightTransform::identity)
    throw ModelError("annealed formula not available for transformed weights");
  AnnealedValues a;
  switch (dist.kind) {
    case DistributionKind::exponential:
      if (beta >= 1.0) throw ModelError("E e^{beta w} diverges for Exp(1) when beta >= 1");
      a.lambda_beta = -std::log1p(-beta);
      break;
    case DistributionKind::gamma:
      if (beta >= 1.0) throw ModelError("E e^{beta w} diverges for Gamma when beta >= 1");
      a.lambda_beta = -dist.shape * std::log1p(-beta);
      break;
    case DistributionKind::bernoulli:
      a.lambda_beta = std::log1p(dist.p * std::expm1(beta));
      break;
    case DistributionKind::normal_truncated: {
      const double mass = detail::normal_cdf(dist.hi) - detail::normal_cdf(dist.lo);
      const double shifted = detail::normal_cdf(dist.hi - beta) - detail::normal_cdf(dist.lo - beta);
      a.lambda_beta = 0.5 * beta * beta + std::log(shifted / mass);
      break;
    }
  }
  Tilt bh = h;
  for (double& v : bh.h) v *= beta;
  a.kappa = kappa(steps, bh);
  a.g_weak = (a.lambda_beta + a.kappa) / beta;
  return a;
}

/// Sampled free energy as a function of one scalar: s for xi = (s, 1 - s),
/// or h1 for tilts (h1, 0).
struct FreeEnergyCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::string provenance;  // oracle | periodic | mc

  template <class Fn>
  static FreeEnergyCurve sample(double lo, double hi, std::size_t points, Fn&& fn,
                                std::string provenance = "oracle") {
    if (points < 3 || !(lo < hi)) throw std::invalid_argument("curve needs lo < hi and >= 3 points");
    FreeEnergyCurve c;
    c.provenance = std::move(provenance);
    for (std::size_t i = 0; i < points; ++i) {
      const double x = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
      c.grid.push_back(x);
      c.values.push_back(fn(x));
    }
    return c;
  }

  /// Largest second divided difference (<= slack means concave).
  double max_second_difference() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double l = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
      const double r = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
      worst = std::max(worst, (r - l) / (0.5 * (grid[i + 1] - grid[i - 1])));
    }
    return worst;
  }
  bool is_concave(double slack = 1e-9) const { return max_second_difference() <= slack; }
  bool is_convex(double slack = 1e-9) const {
    FreeEnergyCurve neg = *this;
    for (double& v : neg.values) v = -v;
    return neg.max_second_difference() <= slack;
  }
};

struct LegendreResult {
  double value = 0.0;
  double argopt = 0.0;
};

namespace detail {

// Extremum of samples y over grid x: index of the best sample, then the
// vertex of the parabola through it and its neighbours.
inline LegendreResult refine_extremum(const std::vector<double>& x, const std::vector<double>& y,
                                      std::size_t i) {
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a == 0.0) return {y1, x1};
  const double b = d01 - a * (x0 + x1);
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  const double yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
  // Never report something worse than the best sample.
  if ((a < 0.0 && yv < y1) || (a > 0.0 && yv > y1)) return {y1, x1};
  return {yv, xv};
}

inline void check_curve(const FreeEnergyCurve& c) {
  if (c.grid.size() < 3 || c.grid.size() != c.values.size())
    throw std::invalid_argument("curve needs >= 3 matching grid points");
  for (std::size_t i = 1; i < c.grid.size(); ++i)
    if (!(c.grid[i] > c.grid[i - 1])) throw std::invalid_argument("curve grid must be increasing");
}

}  // namespace detail

/// g_pl(h) = sup_s [g_pp(s, 1 - s) + h1 s + h2 (1 - s)] over a curve in s.
/// A maximizer at the edge of the grid is accepted only when that edge is
/// s = 0 or s = 1.
inline LegendreResult legendre_pl_from_pp(const FreeEnergyCurve& pp, const Tilt& h) {
  detail::check_curve(pp);
  h.validate(2);
  std::vector<double> y(pp.grid.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = pp.values[i] + h.h[0] * pp.grid[i] + h.h[1] * (1.0 - pp.grid[i]);
  const auto best = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (best == 0 || best + 1 == y.size()) {
    const double edge = pp.grid[best];
    if (edge != 0.0 && edge != 1.0)
      throw ConfigError("maximizer sits at the grid edge s = " + std::to_string(edge) +
                        "; extend the s-grid towards " + (best == 0 ? "0" : "1"));
    return {y[best], edge};
  }
  return detail::refine_extremum(pp.grid, y, best);
}

/// g_pp(s, 1 - s) = inf_{h1} [g_pl(h1, 0) - h1 s] over a curve in h1. Tilts
/// differing by a multiple of (1, 1) are equivalent here, so h2 = 0 loses
/// nothing.
inline LegendreResult legendre_pp_from_pl(const FreeEnergyCurve& pl, double s) {
  detail::check_curve(pl);
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("s must lie in [0,1]");
  std::vector<double> y(pl.grid.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = pl.values[i] - pl.grid[i] * s;
  const auto best = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  if (best == 0 || best + 1 == y.size()) {
    const double lo = pl.grid.front(), hi = pl.grid.back();
    throw ConfigError("minimizer sits at the edge of the h1-box [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]; try [" + std::to_string(2.0 * lo) + ", " +
                      std::to_string(2.0 * hi) + "]");
  }
  return detail::refine_extremum(pl.grid, y, best);
}

}  // namespace polyvar
