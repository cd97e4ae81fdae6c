#pragma once

// Step sets, velocities, tilts, lattice approximants of n*xi and brute-force
// path enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyvar/detail/simplex.hpp"
#include "polyvar/error.hpp"

namespace polyvar {

/// A point of Z^d.
using Site = std::vector<std::int64_t>;

inline Site operator+(const Site& a, const Site& b) {
  Site out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Site operator-(const Site& a, const Site& b) {
  Site out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline std::string to_string(const Site& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

/// Unit vector e_{axis+1} in Z^dim.
inline Site unit(std::size_t dim, std::size_t axis) {
  Site e(dim, 0);
  e.at(axis) = 1;
  return e;
}

/// The admissible step set R. Immutable once built.
class StepSet {
 public:
  explicit StepSet(std::vector<Site> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw std::invalid_argument("step set must be nonempty");
    dim_ = steps_.front().size();
    if (dim_ == 0) throw std::invalid_argument("step dimension must be positive");
    bool has_nonzero = false;
    std::set<Site> seen;
    for (const auto& z : steps_) {
      if (z.size() != dim_) throw std::invalid_argument("steps have mixed dimensions");
      if (!seen.insert(z).second) throw std::invalid_argument("duplicate step " + to_string(z));
      if (std::any_of(z.begin(), z.end(), [](std::int64_t c) { return c != 0; }))
        has_nonzero = true;
    }
    if (!has_nonzero) throw std::invalid_argument("step set needs a nonzero step");
    directed_ = compute_directed();
  }

  /// R = {e_1, ..., e_d}.
  static StepSet unit_steps(std::size_t dim) {
    std::vector<Site> s;
    for (std::size_t i = 0; i < dim; ++i) s.push_back(unit(dim, i));
    return StepSet(std::move(s));
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return steps_.size(); }
  const std::vector<Site>& steps() const { return steps_; }
  const Site& operator[](std::size_t k) const { return steps_[k]; }

  /// True iff some u satisfies u.z = 1 for every step, so all admissible
  /// paths between two points have the same length.
  bool directed() const { return directed_; }

  std::optional<std::size_t> index_of(const Site& z) const {
    auto it = std::find(steps_.begin(), steps_.end(), z);
    if (it == steps_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - steps_.begin());
  }

  /// max_z |z|_inf
  std::int64_t max_abs() const {
    std::int64_t m = 0;
    for (const auto& z : steps_)
      for (auto c : z) m = std::max<std::int64_t>(m, c < 0 ? -c : c);
    return m;
  }

 private:
  bool compute_directed() const {
    // u = u_plus - u_minus, rows: z.u = 1.
    std::vector<std::vector<double>> a;
    for (const auto& z : steps_) {
      std::vector<double> row(2 * dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        row[i] = static_cast<double>(z[i]);
        row[dim_ + i] = -static_cast<double>(z[i]);
      }
      a.push_back(std::move(row));
    }
    std::vector<double> b(steps_.size(), 1.0);
    std::vector<double> c(2 * dim_, 0.0);
    return detail::maximize(a, b, c).status == detail::LpResult::Status::optimal;
  }

  std::vector<Site> steps_;
  std::size_t dim_ = 0;
  bool directed_ = false;
};

/// A tilt vector h in R^d.
struct Tilt {
  std::vector<double> h;

  double dot(const Site& z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * static_cast<double>(z[i]);
    return s;
  }

  void validate(std::size_t dim) const {
    if (h.size() != dim) throw std::invalid_argument("tilt has wrong dimension");
    for (double v : h)
      if (!std::isfinite(v)) throw std::invalid_argument("tilt entries must be finite");
  }
};

/// A velocity xi together with a convex representation xi = sum alpha_z z.
/// alphas are indexed like the steps of the StepSet they were built for.
struct Velocity {
  std::vector<double> xi;
  std::vector<double> alphas;

  void validate(const StepSet& steps, double tol = 1e-12) const {
    if (alphas.size() != steps.size())
      throw std::invalid_argument("velocity weights do not match the step set");
    if (xi.size() != steps.dimension())
      throw std::invalid_argument("velocity has wrong dimension");
    double total = 0.0;
    std::vector<double> mean(steps.dimension(), 0.0);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      if (!(alphas[k] >= 0.0)) throw std::invalid_argument("velocity weights must be nonnegative");
      total += alphas[k];
      for (std::size_t i = 0; i < mean.size(); ++i)
        mean[i] += alphas[k] * static_cast<double>(steps[k][i]);
    }
    if (std::abs(total - 1.0) > tol) throw std::invalid_argument("velocity weights must sum to 1");
    for (std::size_t i = 0; i < mean.size(); ++i)
      if (std::abs(mean[i] - xi[i]) > tol)
        throw std::invalid_argument("velocity weights do not reproduce xi");
  }

  /// Builds xi from the weights.
  static Velocity from_weights(const StepSet& steps, std::vector<double> alphas) {
    Velocity v;
    v.xi.assign(steps.dimension(), 0.0);
    for (std::size_t k = 0; k < alphas.size() && k < steps.size(); ++k)
      for (std::size_t i = 0; i < v.xi.size(); ++i)
        v.xi[i] += alphas[k] * static_cast<double>(steps[k][i]);
    v.alphas = std::move(alphas);
    v.validate(steps);
    return v;
  }

  /// Finds a representation of xi maximizing min_z alpha_z, which is
  /// strictly positive iff xi is in the relative interior of U.
  static Velocity from_xi(const StepSet& steps, const std::vector<double>& xi);
};

namespace detail {

// max t subject to alpha_z = t + s_z, sum alpha_z z = xi, sum alpha_z = 1.
struct InteriorLp {
  bool feasible = false;
  double min_weight = 0.0;
  std::vector<double> alphas;
};

inline InteriorLp interior_lp(const StepSet& steps, const std::vector<double>& xi) {
  const std::size_t r = steps.size();
  const std::size_t d = steps.dimension();
  if (xi.size() != d) throw std::invalid_argument("xi has wrong dimension");
  // Columns: s_1..s_r, t.
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(r + 1, 0.0));
  std::vector<double> b(d + 1, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double zsum = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
      a[i][k] = static_cast<double>(steps[k][i]);
      zsum += static_cast<double>(steps[k][i]);
    }
    a[i][r] = zsum;
    b[i] = xi[i];
  }
  for (std::size_t k = 0; k < r; ++k) a[d][k] = 1.0;
  a[d][r] = static_cast<double>(r);
  b[d] = 1.0;
  std::vector<double> c(r + 1, 0.0);
  c[r] = 1.0;
  const auto res = maximize(a, b, c);
  InteriorLp out;
  if (res.status != LpResult::Status::optimal) return out;
  out.feasible = true;
  out.min_weight = res.x[r];
  out.alphas.resize(r);
  for (std::size_t k = 0; k < r; ++k) out.alphas[k] = std::max(0.0, res.x[k] + res.x[r]);
  return out;
}

}  // namespace detail

inline Velocity Velocity::from_xi(const StepSet& steps, const std::vector<double>& xi) {
  const auto lp = detail::interior_lp(steps, xi);
  if (!lp.feasible) throw ModelError("velocity lies outside the convex hull of the steps");
  Velocity v;
  v.xi = xi;
  v.alphas = lp.alphas;
  const double total = std::accumulate(v.alphas.begin(), v.alphas.end(), 0.0);
  for (double& a : v.alphas) a /= total;
  return v;
}

/// Relative-interior test: xi admits a representation with every alpha_z > 1e-10.
inline bool in_relative_interior(const Velocity& v, const StepSet& steps) {
  const auto lp = detail::interior_lp(steps, v.xi);
  return lp.feasible && lp.min_weight > 1e-10;
}

enum class RoundingPolicy { largest_remainder, lexicographic };

/// Lattice point reachable in exactly n steps that stays within a constant of n*xi.
inline Site xhat(const Velocity& v, const StepSet& steps, std::int64_t n,
                 RoundingPolicy policy = RoundingPolicy::largest_remainder) {
  if (n < 0) throw std::invalid_argument("xhat: n must be nonnegative");
  v.validate(steps);
  const std::size_t r = steps.size();
  std::vector<std::int64_t> count(r, 0);
  std::vector<double> frac(r, 0.0);
  std::int64_t used = 0;
  for (std::size_t k = 0; k < r; ++k) {
    const double x = static_cast<double>(n) * v.alphas[k];
    // Absorb representation error so exact multiples are not rounded down.
    const double fl = std::floor(x + 1e-9 * std::max(1.0, x));
    count[k] = static_cast<std::int64_t>(fl);
    frac[k] = std::max(0.0, x - fl);
    used += count[k];
  }
  std::int64_t leftover = n - used;
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < r; ++k)
    if (v.alphas[k] > 0.0) order.push_back(k);
  if (policy == RoundingPolicy::largest_remainder)
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  if (leftover < 0 || leftover > static_cast<std::int64_t>(order.size()))
    throw std::logic_error("xhat: inconsistent rounding");
  for (std::size_t i = 0; i < static_cast<std::size_t>(leftover); ++i) ++count[order[i]];

  Site x(steps.dimension(), 0);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += count[k] * steps[k][i];
  return x;
}

/// A path is a sequence of step indices into its StepSet.
using StepPath = std::vector<std::size_t>;

inline constexpr std::size_t kDefaultPathCap = 12;

/// Calls fn(path) for every n-step path in lexicographic order of step indices.
template <class Fn>
void for_each_path(const StepSet& steps, std::size_t n, Fn&& fn,
                   std::size_t cap = kDefaultPathCap) {
  if (n > cap)
    throw ResourceError("path enumeration length " + std::to_string(n) + " exceeds cap " +
                        std::to_string(cap));
  StepPath path(n, 0);
  const std::size_t r = steps.size();
  while (true) {
    fn(static_cast<const StepPath&>(path));
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++path[pos] < r) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
    if (n == 0) return;
  }
}

inline Site endpoint_of(const StepSet& steps, const StepPath& path) {
  Site x(steps.dimension(), 0);
  for (auto k : path) x = x + steps[k];
  return x;
}

/// All n-step paths from the origin, optionally restricted to an endpoint.
inline std::vector<StepPath> enumerate_paths(const StepSet& steps, std::size_t n,
                                             const std::optional<Site>& endpoint = std::nullopt,
                                             std::size_t cap = kDefaultPathCap) {
  std::vector<StepPath> out;
  for_each_path(
      steps, n,
      [&](const StepPath& p) {
        if (!endpoint || endpoint_of(steps, p) == *endpoint) out.push_back(p);
      },
      cap);
  return out;
}

}  // namespace polyvar
