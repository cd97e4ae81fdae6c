#pragma once

// Monte-Carlo side for d = 2, R = {e1, e2}: i.i.d. fields on a square box,
// point-to-point and point-to-level dynamic programming at finite and
// infinite beta, replica estimators and Busemann gradient estimators.
//
// Path sums run over x_0 .. x_{n-1}: the potential at the endpoint is never
// collected.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "polyvar/detail/random.hpp"
#include "polyvar/error.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/periodic_env.hpp"

namespace polyvar {

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

enum class DistributionKind { exponential, gamma, bernoulli, normal_truncated };
enum class WeightTransform { identity, neg_log_plus_log2 };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::exponential;
  double shape = 1.0;  // Gamma(rho)
  double p = 0.5;      // Bernoulli(p)
  double lo = -1.0;    // truncated normal window
  double hi = 1.0;
  WeightTransform transform = WeightTransform::identity;

  static DistributionSpec exponential() { return {}; }
  static DistributionSpec gamma(double rho) {
    DistributionSpec d;
    d.kind = DistributionKind::gamma;
    d.shape = rho;
    return d;
  }
  /// Gamma(rho) weights with V0 = -log w + log 2.
  static DistributionSpec log_gamma(double rho) {
    auto d = gamma(rho);
    d.transform = WeightTransform::neg_log_plus_log2;
    return d;
  }
  static DistributionSpec bernoulli(double p) {
    DistributionSpec d;
    d.kind = DistributionKind::bernoulli;
    d.p = p;
    return d;
  }
  static DistributionSpec normal_truncated(double lo, double hi) {
    DistributionSpec d;
    d.kind = DistributionKind::normal_truncated;
    d.lo = lo;
    d.hi = hi;
    return d;
  }

  void validate() const {
    switch (kind) {
      case DistributionKind::exponential:
        break;
      case DistributionKind::gamma:
        if (!(shape > 0.0) || !std::isfinite(shape))
          throw std::invalid_argument("gamma shape must be positive");
        break;
      case DistributionKind::bernoulli:
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli p must lie in [0,1]");
        break;
      case DistributionKind::normal_truncated:
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
          throw std::invalid_argument("truncated normal needs finite lo < hi");
        break;
    }
    if (transform == WeightTransform::neg_log_plus_log2 && kind != DistributionKind::gamma &&
        kind != DistributionKind::exponential)
      throw std::invalid_argument("the -log w + log 2 transform needs positive weights");
  }

  double draw(detail::Engine& g) const {
    double w = 0.0;
    switch (kind) {
      case DistributionKind::exponential:
        w = detail::exponential1(g);
        break;
      case DistributionKind::gamma:
        w = detail::gamma_variate(g, shape);
        break;
      case DistributionKind::bernoulli:
        w = detail::uniform01(g) < p ? 1.0 : 0.0;
        break;
      case DistributionKind::normal_truncated:
        w = detail::truncated_normal(g, lo, hi);
        break;
    }
    if (transform == WeightTransform::neg_log_plus_log2) w = -std::log(w) + std::log(2.0);
    return w;
  }
};

inline constexpr std::int64_t kMaxBoxSide = 20000;

/// Potential table V0 on [0, L]^2, row-major with the first coordinate slowest.
struct SampledField {
  std::int64_t side = 0;  // L
  std::uint64_t seed = 0;
  DistributionSpec dist;
  std::vector<double> v;

  std::size_t width() const { return static_cast<std::size_t>(side + 1); }
  double at(std::int64_t i, std::int64_t j) const {
    return v[static_cast<std::size_t>(i) * width() + static_cast<std::size_t>(j)];
  }
  double at(const Site& x) const { return at(x[0], x[1]); }
  bool contains(const Site& x) const {
    return x.size() == 2 && x[0] >= 0 && x[1] >= 0 && x[0] <= side && x[1] <= side;
  }

  static SampledField from_values(std::int64_t side, std::vector<double> values) {
    if (side < 0) throw std::invalid_argument("box side must be nonnegative");
    if (values.size() != static_cast<std::size_t>((side + 1) * (side + 1)))
      throw std::invalid_argument("field table has wrong size");
    SampledField f;
    f.side = side;
    f.v = std::move(values);
    return f;
  }
};

inline SampledField sample_field(const DistributionSpec& dist, std::int64_t side, std::uint64_t seed) {
  dist.validate();
  if (side < 0) throw std::invalid_argument("box side must be nonnegative");
  if (side > kMaxBoxSide)
    throw ResourceError("box side " + std::to_string(side) + " exceeds cap " + std::to_string(kMaxBoxSide));
  SampledField f;
  f.side = side;
  f.seed = seed;
  f.dist = dist;
  const std::size_t cells = static_cast<std::size_t>((side + 1) * (side + 1));
  f.v.resize(cells);
  detail::Engine g(seed);
  for (auto& x : f.v) x = dist.draw(g);
  return f;
}

/// Lattice field given by a periodic environment: V0(x) = weight at x mod p.
inline SampledField periodic_field(const PeriodicEnvironment& env, std::int64_t side) {
  env.validate();
  if (env.dimension != 2) throw std::invalid_argument("lattice fields are two-dimensional");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>((side + 1) * (side + 1)));
  for (std::int64_t i = 0; i <= side; ++i)
    for (std::int64_t j = 0; j <= side; ++j) values.push_back(env.weight_at({i, j}));
  return SampledField::from_values(side, std::move(values));
}

namespace detail {

inline bool is_lpp(double beta) { return beta == kInfiniteBeta; }

inline void check_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive (or infinite)");
}

// beta^-1 [log(e^{beta a} + e^{beta b}) - log 2], or max(a, b) at beta = inf.
// Either argument may be -inf (absent).
inline double soft_max2(double a, double b, double beta) {
  if (is_lpp(beta)) return std::max(a, b);
  const double mx = std::max(a, b);
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  const double mn = std::min(a, b);
  const double s = mn == -std::numeric_limits<double>::infinity()
                       ? 0.0
                       : std::log1p(std::exp(beta * (mn - mx)));
  return mx + (s - std::log(2.0)) / beta;
}

}  // namespace detail

/// G^beta_{x,y}: beta^-1 log sum over paths x -> y of 2^-n exp(beta sum V0),
/// or the last-passage value at beta = inf.
inline double dp_point_to_point(const SampledField& f, double beta, const Site& x, const Site& y) {
  detail::check_beta(beta);
  if (!f.contains(x) || !f.contains(y)) throw std::invalid_argument("point outside the box");
  if (y[0] < x[0] || y[1] < x[1]) throw ModelError("endpoint " + to_string(y) + " is unreachable from " + to_string(x));
  const std::int64_t a = y[0] - x[0];
  const std::int64_t b = y[1] - x[1];
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> row(static_cast<std::size_t>(b + 1), ninf);
  for (std::int64_t i = 0; i <= a; ++i)
    for (std::int64_t j = 0; j <= b; ++j) {
      if (i == 0 && j == 0) {
        row[0] = 0.0;
        continue;
      }
      const double up = i > 0 ? row[static_cast<std::size_t>(j)] + f.at(x[0] + i - 1, x[1] + j) : ninf;
      const double left = j > 0 ? row[static_cast<std::size_t>(j - 1)] + f.at(x[0] + i, x[1] + j - 1) : ninf;
      row[static_cast<std::size_t>(j)] = detail::soft_max2(up, left, beta);
    }
  return row[static_cast<std::size_t>(b)];
}

/// G^beta_{u,t} for every u in [0, t] (componentwise), row-major over
/// [0, t0] x [0, t1].
struct TargetTable {
  Site target;
  std::vector<double> g;
  double at(std::int64_t i, std::int64_t j) const {
    return g[static_cast<std::size_t>(i) * static_cast<std::size_t>(target[1] + 1) +
             static_cast<std::size_t>(j)];
  }
  double at(const Site& u) const { return at(u[0], u[1]); }
};

inline TargetTable dp_to_target(const SampledField& f, double beta, const Site& t) {
  detail::check_beta(beta);
  if (!f.contains(t)) throw std::invalid_argument("target outside the box");
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  TargetTable out{t, std::vector<double>(static_cast<std::size_t>((t[0] + 1) * (t[1] + 1)), ninf)};
  const auto w = static_cast<std::size_t>(t[1] + 1);
  for (std::int64_t i = t[0]; i >= 0; --i)
    for (std::int64_t j = t[1]; j >= 0; --j) {
      const std::size_t idx = static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j);
      if (i == t[0] && j == t[1]) {
        out.g[idx] = 0.0;
        continue;
      }
      const double down = i < t[0] ? out.g[idx + w] : ninf;
      const double right = j < t[1] ? out.g[idx + 1] : ninf;
      out.g[idx] = f.at(i, j) + detail::soft_max2(down, right, beta);
    }
  return out;
}

/// W(x) = G^beta_{x,(m - |x|)}(h) + h.x on one antidiagonal |x| = level,
/// for paths ending on antidiagonal m. Entry i is the site (i, level - i).
inline std::vector<double> p2l_level_values(const SampledField& f, double beta, const Tilt& h,
                                            std::int64_t level, std::int64_t m) {
  detail::check_beta(beta);
  h.validate(2);
  if (level < 0 || m < level) throw std::invalid_argument("need 0 <= level <= terminal level");
  if (m > f.side) throw std::invalid_argument("terminal level " + std::to_string(m) + " leaves the box");
  std::vector<double> cur(static_cast<std::size_t>(m + 1));
  for (std::int64_t i = 0; i <= m; ++i)
    cur[static_cast<std::size_t>(i)] = h.h[0] * static_cast<double>(i) + h.h[1] * static_cast<double>(m - i);
  for (std::int64_t k = m - 1; k >= level; --k) {
    std::vector<double> next(static_cast<std::size_t>(k + 1));
    for (std::int64_t i = 0; i <= k; ++i) {
      // successors of (i, k - i): (i + 1, k - i) is entry i + 1, (i, k - i + 1) is entry i
      const double a = cur[static_cast<std::size_t>(i + 1)];
      const double b = cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(i)] = f.at(i, k - i) + detail::soft_max2(a, b, beta);
    }
    cur = std::move(next);
  }
  return cur;
}

/// G^beta_{0,(n)}(h).
inline double dp_point_to_level(const SampledField& f, double beta, const Tilt& h, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("n must be nonnegative");
  return p2l_level_values(f, beta, h, 0, n).front();
}

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // NaN with a single replica
  std::vector<double> samples;
};

inline Estimate summarize(std::vector<double> samples) {
  Estimate e;
  const double n = static_cast<double>(samples.size());
  if (samples.empty()) throw std::invalid_argument("no samples");
  for (double s : samples) e.mean += s;
  e.mean /= n;
  if (samples.size() < 2) {
    e.stderr_ = std::numeric_limits<double>::quiet_NaN();
  } else {
    double ss = 0.0;
    for (double s : samples) ss += (s - e.mean) * (s - e.mean);
    e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  e.samples = std::move(samples);
  return e;
}

struct McOptions {
  std::size_t replicas = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

namespace detail {

// Runs fn(r) for r in [0, count) on `threads` workers; results land in input
// order. The first exception thrown by any replica is rethrown.
template <class T, class Fn>
std::vector<T> run_replicas(std::size_t count, std::size_t threads, Fn&& fn) {
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t r = next.fetch_add(1);
        if (r >= count) return;
        try {
          out[r] = fn(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline void check_options(const McOptions& opt) {
  if (opt.replicas == 0) throw std::invalid_argument("replicas must be positive");
}

}  // namespace detail

/// Replica average of n^-1 G^beta_{0, xhat_n(xi)}.
inline Estimate estimate_gpp(const DistributionSpec& dist, double beta, const Velocity& v,
                             std::int64_t n, const McOptions& opt) {
  detail::check_options(opt);
  const auto steps = StepSet::unit_steps(2);
  const Site target = xhat(v, steps, n);
  const std::int64_t side = std::max(target[0], target[1]);
  auto values = detail::run_replicas<double>(opt.replicas, opt.threads, [&](std::size_t r) {
    const auto f = sample_field(dist, side, detail::replica_seed(opt.seed, r));
    return dp_point_to_point(f, beta, {0, 0}, target) / static_cast<double>(n);
  });
  return summarize(std::move(values));
}

/// Replica average of n^-1 G^beta_{0,(n)}(h).
inline Estimate estimate_gpl(const DistributionSpec& dist, double beta, const Tilt& h,
                             std::int64_t n, const McOptions& opt) {
  detail::check_options(opt);
  auto values = detail::run_replicas<double>(opt.replicas, opt.threads, [&](std::size_t r) {
    const auto f = sample_field(dist, n, detail::replica_seed(opt.seed, r));
    return dp_point_to_level(f, beta, h, n) / static_cast<double>(n);
  });
  return summarize(std::move(values));
}

/// x -> y pairs with y - x a step: the staircase x = (i, level - i),
/// i = 0..level, paired with x + z.
inline std::vector<std::pair<Site, Site>> staircase_pairs(std::int64_t level, const Site& z) {
  std::vector<std::pair<Site, Site>> out;
  for (std::int64_t i = 0; i <= level; ++i) {
    Site x{i, level - i};
    out.emplace_back(x, x + z);
  }
  return out;
}

struct BusemannPPReport {
  /// Perturbations of the target: 0, e1, e2.
  std::vector<Site> perturbations;
  /// per_pair[p][k]: gradient of pair p towards xhat_n + perturbation k.
  std::vector<std::vector<Estimate>> per_pair;
  /// Pair-averaged gradient per perturbation; one sample per replica.
  std::vector<Estimate> pooled;
};

/// G_{x, xhat_n(xi) + z} - G_{y, xhat_n(xi) + z} for each pair and each
/// perturbation z in {0, e1, e2}.
inline BusemannPPReport estimate_busemann_pp(const DistributionSpec& dist, double beta,
                                             const Velocity& v,
                                             const std::vector<std::pair<Site, Site>>& pairs,
                                             std::int64_t n, const McOptions& opt) {
  detail::check_options(opt);
  if (pairs.empty()) throw std::invalid_argument("no pairs given");
  const auto steps = StepSet::unit_steps(2);
  for (double a : v.alphas)
    if (!(a > 0.0)) throw std::invalid_argument("Busemann gradients need every alpha_z > 0");
  const Site base = xhat(v, steps, n);
  BusemannPPReport rep;
  rep.perturbations = {Site{0, 0}, Site{1, 0}, Site{0, 1}};
  std::int64_t side = std::max(base[0], base[1]) + 1;
  for (const auto& [x, y] : pairs)
    for (const auto& u : {x, y}) {
      if (u.size() != 2 || u[0] < 0 || u[1] < 0 || u[0] > base[0] || u[1] > base[1])
        throw std::invalid_argument("pair point " + to_string(u) + " is not below the target");
    }

  using Row = std::vector<std::vector<double>>;  // [pair][perturbation]
  auto rows = detail::run_replicas<Row>(opt.replicas, opt.threads, [&](std::size_t r) {
    const auto f = sample_field(dist, side, detail::replica_seed(opt.seed, r));
    Row out(pairs.size(), std::vector<double>(rep.perturbations.size()));
    for (std::size_t k = 0; k < rep.perturbations.size(); ++k) {
      const auto table = dp_to_target(f, beta, base + rep.perturbations[k]);
      for (std::size_t p = 0; p < pairs.size(); ++p)
        out[p][k] = table.at(pairs[p].first) - table.at(pairs[p].second);
    }
    return out;
  });

  rep.per_pair.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t k = 0; k < rep.perturbations.size(); ++k) {
      std::vector<double> s;
      for (const auto& row : rows) s.push_back(row[p][k]);
      rep.per_pair[p].push_back(summarize(std::move(s)));
    }
  for (std::size_t k = 0; k < rep.perturbations.size(); ++k) {
    std::vector<double> s;
    for (const auto& row : rows) {
      double acc = 0.0;
      for (const auto& pr : row) acc += pr[k];
      s.push_back(acc / static_cast<double>(pairs.size()));
    }
    rep.pooled.push_back(summarize(std::move(s)));
  }
  return rep;
}

struct BusemannPLReport {
  /// Per step (e1, e2): staircase-averaged gradient, one sample per replica.
  std::vector<Estimate> per_step;
  /// Samples violating B >= V0 + h.z - beta^-1 log 2 (must be zero).
  std::size_t bound_violations = 0;
  /// max over samples of |-beta^-1 log sum_z 2^-1 e^{-beta(B - h.z)} - V0|.
  double recovery_residual = 0.0;
};

/// G^beta_{x,(n)}(h) - G^beta_{x+z,(n-1)}(h) averaged over the staircase
/// x = (i, level - i).
inline BusemannPLReport estimate_busemann_pl(const DistributionSpec& dist, double beta,
                                             const Tilt& h, std::int64_t n, std::int64_t level,
                                             const McOptions& opt) {
  detail::check_options(opt);
  h.validate(2);
  if (n < 1 || level < 0) throw std::invalid_argument("need n >= 1 and level >= 0");
  const std::int64_t m = level + n;
  const double slack = detail::is_lpp(beta) ? 0.0 : std::log(2.0) / beta;
  struct Out {
    double b[2] = {0.0, 0.0};
    std::size_t violations = 0;
    double recovery = 0.0;
  };
  auto rows = detail::run_replicas<Out>(opt.replicas, opt.threads, [&](std::size_t r) {
    const auto f = sample_field(dist, m, detail::replica_seed(opt.seed, r));
    const auto w0 = p2l_level_values(f, beta, h, level, m);
    const auto w1 = p2l_level_values(f, beta, h, level + 1, m);
    Out o;
    for (std::int64_t i = 0; i <= level; ++i) {
      const double v0 = f.at(i, level - i);
      const double wx = w0[static_cast<std::size_t>(i)];
      // x + e1 is entry i + 1 of the next level, x + e2 is entry i.
      const double b1 = wx - w1[static_cast<std::size_t>(i + 1)] + h.h[0];
      const double b2 = wx - w1[static_cast<std::size_t>(i)] + h.h[1];
      o.b[0] += b1;
      o.b[1] += b2;
      const double tol = 1e-9 * std::max(1.0, std::abs(v0));
      if (b1 < v0 + h.h[0] - slack - tol) ++o.violations;
      if (b2 < v0 + h.h[1] - slack - tol) ++o.violations;
      const double rec = detail::is_lpp(beta)
                             ? std::min(b1 - h.h[0], b2 - h.h[1])
                             : -detail::soft_max2(-(b1 - h.h[0]), -(b2 - h.h[1]), beta);
      o.recovery = std::max(o.recovery, std::abs(rec - v0));
    }
    o.b[0] /= static_cast<double>(level + 1);
    o.b[1] /= static_cast<double>(level + 1);
    return o;
  });
  BusemannPLReport rep;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> s;
    for (const auto& o : rows) s.push_back(o.b[k]);
    rep.per_step.push_back(summarize(std::move(s)));
  }
  for (const auto& o : rows) {
    rep.bound_violations += o.violations;
    rep.recovery_residual = std::max(rep.recovery_residual, o.recovery);
  }
  return rep;
}

/// max over the n-th antidiagonal of |phi(x) - phi(0)| / n for a lattice
/// potential phi, i.e. the size of F(0, x) = phi(x) - phi(0) at distance n.
inline double sublinearity_check(const std::function<double(const Site&)>& phi, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const double origin = phi({0, 0});
  double worst = 0.0;
  for (std::int64_t i = 0; i <= n; ++i) worst = std::max(worst, std::abs(phi({i, n - i}) - origin));
  return worst / static_cast<double>(n);
}

/// Lattice potential x -> f(state of T_x omega) for a corrector on a quotient
/// built from a lattice environment.
inline std::function<double(const Site&)> lift_potential(const QuotientSpace& q,
                                                         const GradientCocycle& f) {
  return [&q, f](const Site& x) { return f.f.at(q.state_at(x)); };
}

}  // namespace polyvar
