#pragma once

// Zero-temperature periodic theory: the max-plus matrix over the quotient,
// its eigenvalue (Karp, circuits, difference constraints), eigenvector and
// critical graph, Busemann asymptotics and the point-to-point constant from
// the circuit hull.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyvar/detail/graph.hpp"
#include "polyvar/detail/maxplus_core.hpp"
#include "polyvar/detail/simplex.hpp"
#include "polyvar/error.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/periodic_env.hpp"

namespace polyvar {

using detail::kNegInf;

/// One step z taken from state `from`; several labels may share (from, to).
struct EdgeLabel {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t step = 0;
  double weight = 0.0;     // V0(from) + h.z
  double potential = 0.0;  // V0(from)
  bool argmax = false;     // attains the matrix entry
};

struct MaxPlusMatrix {
  std::size_t size = 0;
  detail::DenseMaxPlus a;
  /// Empty for matrices given by raw entries.
  std::vector<EdgeLabel> labels;
  std::vector<std::vector<std::size_t>> shift;
  std::vector<Site> steps;
  Tilt h;

  double operator()(std::size_t i, std::size_t j) const { return a(i, j); }
  bool has_labels() const { return !labels.empty(); }

  /// Matrix from entries (row-major, -inf for no edge). Each finite entry
  /// becomes a single unlabeled edge.
  static MaxPlusMatrix from_entries(std::size_t m, std::vector<double> entries) {
    if (entries.size() != m * m) throw std::invalid_argument("max-plus matrix must be square");
    for (double v : entries)
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw std::invalid_argument("max-plus entries must be finite or -inf");
    MaxPlusMatrix out;
    out.size = m;
    out.a = detail::DenseMaxPlus{m, std::move(entries)};
    return out;
  }
};

/// A(w, w') = V0(w) + max_{z: T_z w = w'} h.z, keeping every step as a label.
inline MaxPlusMatrix build_maxplus_matrix(const QuotientSpace& q, const Tilt& h) {
  h.validate(q.steps().dimension());
  const std::size_t m = q.size();
  MaxPlusMatrix out;
  out.size = m;
  out.a = detail::DenseMaxPlus{m, std::vector<double>(m * m, kNegInf)};
  out.shift = q.shift_table();
  out.steps = q.steps().steps();
  out.h = h;
  for (std::size_t w = 0; w < m; ++w)
    for (std::size_t k = 0; k < q.steps().size(); ++k) {
      const std::size_t t = q.shift(w, k);
      const double wt = q.v0(w) + h.dot(q.steps()[k]);
      out.labels.push_back({w, t, k, wt, q.v0(w), false});
      out.a(w, t) = std::max(out.a(w, t), wt);
    }
  for (auto& e : out.labels) e.argmax = e.weight == out.a(e.from, e.to);
  return out;
}

inline double karp_eigenvalue(const MaxPlusMatrix& a) { return detail::karp_max_cycle_mean(a.a); }

struct Circuit {
  std::vector<std::size_t> nodes;  // distinct, the circuit closes back to nodes.front()
  std::vector<std::size_t> steps;  // step index per edge; empty for unlabeled matrices
  double total = 0.0;
  std::size_t length = 0;
  double mean_weight = 0.0;
  double mean_potential = 0.0;
  std::vector<double> mean_step;
};

struct CircuitSet {
  std::vector<Circuit> circuits;
  bool complete = true;
};

inline constexpr std::size_t kDefaultCircuitCap = 1000000;

namespace detail {

// Johnson's algorithm on the simple digraph underlying the matrix. Calls
// fn(node cycle) for every elementary circuit; fn returns false to stop.
template <class Fn>
void johnson_circuits(const Adjacency& adj, Fn&& fn) {
  const std::size_t n = adj.size();
  bool stop = false;
  for (std::size_t s = 0; s < n && !stop; ++s) {
    // Subgraph induced by nodes >= s; work in the SCC containing s.
    Adjacency sub(n);
    for (std::size_t u = s; u < n; ++u)
      for (auto v : adj[u])
        if (v >= s) sub[u].push_back(v);
    const auto comps = strongly_connected_components(sub);
    const std::vector<std::size_t>* comp = nullptr;
    for (const auto& c : comps)
      if (std::binary_search(c.begin(), c.end(), s)) comp = &c;
    if (comp == nullptr) continue;
    std::vector<bool> in(n, false);
    for (auto v : *comp) in[v] = true;
    bool has_cycle = comp->size() > 1;
    for (auto v : sub[s]) has_cycle = has_cycle || v == s;
    if (!has_cycle) continue;

    std::vector<bool> blocked(n, false);
    std::vector<std::vector<std::size_t>> bset(n);
    std::vector<std::size_t> stack;
    std::function<void(std::size_t)> unblock = [&](std::size_t u) {
      blocked[u] = false;
      auto b = std::move(bset[u]);
      bset[u].clear();
      for (auto w : b)
        if (blocked[w]) unblock(w);
    };
    std::function<bool(std::size_t)> circuit = [&](std::size_t v) -> bool {
      bool found = false;
      stack.push_back(v);
      blocked[v] = true;
      for (auto w : sub[v]) {
        if (stop) break;
        if (!in[w]) continue;
        if (w == s) {
          if (!fn(static_cast<const std::vector<std::size_t>&>(stack))) stop = true;
          found = true;
        } else if (!blocked[w] && circuit(w)) {
          found = true;
        }
      }
      if (found) {
        unblock(v);
      } else {
        for (auto w : sub[v])
          if (in[w] && std::find(bset[w].begin(), bset[w].end(), v) == bset[w].end())
            bset[w].push_back(v);
      }
      stack.pop_back();
      return found;
    };
    circuit(s);
  }
}

}  // namespace detail

/// Elementary circuits of the multigraph (Omega, E). By default every step
/// label is expanded, so a node cycle with parallel edges yields one circuit
/// per label choice; argmax_only keeps just the labels attaining A.
inline CircuitSet enumerate_circuits(const MaxPlusMatrix& a, std::size_t cap = kDefaultCircuitCap,
                                     bool argmax_only = false) {
  const std::size_t m = a.size;
  const std::size_t d = a.steps.empty() ? 0 : a.steps.front().size();
  detail::Adjacency adj(m);
  // Labels grouped per (from, to).
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const EdgeLabel*>> parallel;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (a(i, j) != kNegInf) adj[i].push_back(j);
  for (const auto& e : a.labels)
    if (!argmax_only || e.argmax) parallel[{e.from, e.to}].push_back(&e);

  CircuitSet out;
  detail::johnson_circuits(adj, [&](const std::vector<std::size_t>& nodes) {
    const std::size_t len = nodes.size();
    auto edge_to = [&](std::size_t i) { return nodes[(i + 1) % len]; };
    if (!a.has_labels()) {
      if (out.circuits.size() >= cap) {
        out.complete = false;
        return false;
      }
      Circuit c;
      c.nodes = nodes;
      c.length = len;
      for (std::size_t i = 0; i < len; ++i) c.total += a(nodes[i], edge_to(i));
      c.mean_weight = c.total / static_cast<double>(len);
      out.circuits.push_back(std::move(c));
      return true;
    }
    // Odometer over the label choices on each edge.
    std::vector<const std::vector<const EdgeLabel*>*> choices(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto it = parallel.find({nodes[i], edge_to(i)});
      if (it == parallel.end()) return true;
      choices[i] = &it->second;
    }
    std::vector<std::size_t> pick(len, 0);
    while (true) {
      if (out.circuits.size() >= cap) {
        out.complete = false;
        return false;
      }
      Circuit c;
      c.nodes = nodes;
      c.length = len;
      c.mean_step.assign(d, 0.0);
      double pot = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const EdgeLabel& e = *(*choices[i])[pick[i]];
        c.steps.push_back(e.step);
        c.total += e.weight;
        pot += e.potential;
        for (std::size_t j = 0; j < d; ++j)
          c.mean_step[j] += static_cast<double>(a.steps[e.step][j]);
      }
      const double n = static_cast<double>(len);
      c.mean_weight = c.total / n;
      c.mean_potential = pot / n;
      for (double& v : c.mean_step) v /= n;
      out.circuits.push_back(std::move(c));
      std::size_t pos = len;
      while (pos > 0) {
        --pos;
        if (++pick[pos] < choices[pos]->size()) break;
        pick[pos] = 0;
        if (pos == 0) return true;
      }
    }
  });
  return out;
}

/// Largest circuit mean: the maximum of E[V] over the extreme stationary
/// measures on Omega x R.
inline double measure_variational_value(const CircuitSet& circuits) {
  if (!circuits.complete)
    throw ResourceError("circuit enumeration hit its cap; the maximum is not certified");
  if (circuits.circuits.empty()) throw ModelError("matrix has no circuits");
  double best = kNegInf;
  for (const auto& c : circuits.circuits) best = std::max(best, c.mean_weight);
  return best;
}

struct MinMaxResult {
  double value = 0.0;
  GradientCocycle f;
  std::size_t iterations = 0;
};

namespace detail {

// Feasibility of f(j) - f(i) <= t - A(i, j) by Bellman-Ford from a virtual
// source joined to every node with weight 0. Returns the potential if feasible.
inline std::optional<std::vector<double>> difference_constraints(const MaxPlusMatrix& a, double t) {
  const std::size_t m = a.size;
  std::vector<double> dist(m, 0.0);
  for (std::size_t round = 0; round <= m; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        if (a(i, j) == kNegInf) continue;
        const double cand = dist[i] + (t - a(i, j));
        if (cand < dist[j]) {
          dist[j] = cand;
          changed = true;
        }
      }
    if (!changed) return dist;
  }
  return std::nullopt;
}

}  // namespace detail

/// min over potentials f of max_{w, z} {V0(w) + h.z + f(T_z w) - f(w)}, by
/// bisection on the level t with a negative-cycle test for each t.
inline MinMaxResult minmax_via_difference_constraints(const MaxPlusMatrix& a, double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : a.a.a)
    if (v != kNegInf) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) throw ModelError("max-plus matrix has no finite entries");
  auto best = detail::difference_constraints(a, hi);
  if (!best) throw ModelError("difference constraints infeasible at the largest entry");
  MinMaxResult out;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (auto f = detail::difference_constraints(a, mid)) {
      hi = mid;
      best = std::move(f);
    } else {
      lo = mid;
    }
    ++out.iterations;
  }
  out.value = hi;
  out.f.f = std::move(*best);
  return out;
}

struct CriticalComponent {
  std::vector<std::size_t> nodes;
  std::size_t cyclicity = 0;
};

struct MaxPlusEigen {
  double lambda = 0.0;
  std::vector<double> sigma;
  std::vector<std::size_t> critical_nodes;
  std::vector<std::pair<std::size_t, std::size_t>> critical_edges;
  std::vector<CriticalComponent> components;
  bool primitive = false;
  double residual = 0.0;
  /// Nodes whose best cycle mean is within 1e-9 of lambda but not within 1e-12.
  std::vector<std::size_t> degenerate_nodes;

  std::size_t cyclicity_lcm() const {
    std::size_t l = 1;
    for (const auto& c : components) l = std::lcm(l, std::max<std::size_t>(c.cyclicity, 1));
    return l;
  }
};

inline constexpr double kCriticalTol = 1e-9;

/// Eigenvector from the Kleene star column at the smallest critical node,
/// shifted so sigma(0) = 0, plus the critical graph and its cyclicities.
inline MaxPlusEigen eigenvector_and_critical_graph(const MaxPlusMatrix& a, double lambda) {
  const std::size_t m = a.size;
  const auto an = detail::normalized(a.a, lambda);
  const auto star = detail::kleene_star(an);
  const auto excess = detail::cycle_excess(an, star);

  MaxPlusEigen e;
  e.lambda = lambda;
  std::vector<bool> crit(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (excess[i] >= -kCriticalTol) {
      crit[i] = true;
      e.critical_nodes.push_back(i);
    }
    if (std::abs(excess[i]) > 1e-12 && std::abs(excess[i]) <= kCriticalTol)
      e.degenerate_nodes.push_back(i);
  }
  if (e.critical_nodes.empty()) throw ModelError("no critical node found; is lambda correct?");

  detail::Adjacency cadj(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!crit[i] || !crit[j] || an(i, j) == kNegInf || star(j, i) == kNegInf) continue;
      if (an(i, j) + star(j, i) >= -kCriticalTol) {
        cadj[i].push_back(j);
        e.critical_edges.emplace_back(i, j);
      }
    }
  for (auto& comp : detail::strongly_connected_components(cadj)) {
    if (!crit[comp.front()]) continue;
    const std::size_t cyc = detail::cyclicity(cadj, comp);
    if (cyc == 0) continue;
    e.components.push_back({std::move(comp), cyc});
  }
  e.primitive = e.components.size() == 1 && e.components.front().cyclicity == 1;

  e.sigma = detail::star_column(star, e.critical_nodes.front());
  const double base = e.sigma[0];
  for (double& v : e.sigma) v -= base;
  for (std::size_t i = 0; i < m; ++i) {
    double best = kNegInf;
    for (std::size_t j = 0; j < m; ++j)
      if (a(i, j) != kNegInf) best = std::max(best, a(i, j) + e.sigma[j]);
    e.residual = std::max(e.residual, std::abs(best - lambda - e.sigma[i]));
  }
  return e;
}

/// x_n = A^{(x) n} (x) 0, unnormalized. Entry w is the best n-step path value
/// started from state w.
inline std::vector<double> maxplus_power_values(const MaxPlusMatrix& a, std::size_t n) {
  std::vector<double> x(a.size, 0.0), y(a.size);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < a.size; ++i) {
      y[i] = kNegInf;
      for (std::size_t j = 0; j < a.size; ++j)
        if (a(i, j) != kNegInf) y[i] = std::max(y[i], a(i, j) + x[j]);
    }
    std::swap(x, y);
  }
  return x;
}

struct BusemannMaxPlusEntry {
  std::vector<double> trace;  // n = 1..n_max
  std::optional<double> limit;
  std::size_t period = 0;        // 0 when neither a limit nor a period was detected
  std::vector<double> cycle;     // the repeating values when period > 1
  std::optional<double> formula;  // lambda + sigma(w) - sigma(T_z w)
  bool matches_formula = false;
};

struct BusemannMaxPlus {
  MaxPlusEigen eigen;
  /// entries[w][k] for state w and step index k.
  std::vector<std::vector<BusemannMaxPlusEntry>> entries;
};

inline constexpr double kBusemannTol = 1e-9;

/// Finite-n gradients x_n(w) - x_{n-1}(T_z w) and their limit or period.
inline BusemannMaxPlus busemann_maxplus(const MaxPlusMatrix& a, std::size_t n_max) {
  if (a.shift.empty()) throw std::invalid_argument("busemann_maxplus needs a matrix built from a quotient");
  const std::size_t m = a.size;
  if (n_max < 2 * m || n_max < 2) throw std::invalid_argument("busemann_maxplus: n_max must be >= 2m");
  const std::size_t r = a.steps.size();
  BusemannMaxPlus out;
  out.eigen = eigenvector_and_critical_graph(a, karp_eigenvalue(a));
  out.entries.assign(m, std::vector<BusemannMaxPlusEntry>(r));

  std::vector<double> prev(m, 0.0), cur(m);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i < m; ++i) {
      cur[i] = kNegInf;
      for (std::size_t j = 0; j < m; ++j)
        if (a(i, j) != kNegInf) cur[i] = std::max(cur[i], a(i, j) + prev[j]);
    }
    for (std::size_t w = 0; w < m; ++w)
      for (std::size_t k = 0; k < r; ++k)
        out.entries[w][k].trace.push_back(cur[w] - prev[a.shift[w][k]]);
    // Both generations are measured from the same dropped constant, so the
    // gradients above are exact; renormalize for the next step.
    const double c = *std::max_element(cur.begin(), cur.end());
    for (std::size_t i = 0; i < m; ++i) prev[i] = cur[i] - c;
  }

  const auto& eig = out.eigen;
  const std::size_t window = 2 * eig.cyclicity_lcm();
  for (std::size_t w = 0; w < m; ++w)
    for (std::size_t k = 0; k < r; ++k) {
      auto& e = out.entries[w][k];
      const auto& t = e.trace;
      const std::size_t n = t.size();
      e.formula = eig.lambda + eig.sigma[w] - eig.sigma[a.shift[w][k]];
      const std::size_t span = std::min(window, n);
      const auto [lo, hi] = std::minmax_element(t.end() - static_cast<std::ptrdiff_t>(span), t.end());
      if (*hi - *lo <= kBusemannTol) {
        e.limit = t.back();
        e.period = 1;
        e.matches_formula = std::abs(*e.limit - *e.formula) <= kBusemannTol;
        continue;
      }
      for (std::size_t p = 2; 3 * p <= n; ++p) {
        bool ok = true;
        for (std::size_t i = n - 2 * p; i < n && ok; ++i) ok = std::abs(t[i] - t[i - p]) <= kBusemannTol;
        if (ok) {
          e.period = p;
          e.cycle.assign(t.end() - static_cast<std::ptrdiff_t>(p), t.end());
          break;
        }
      }
    }
  return out;
}

/// max_w |min_z [lambda + sigma(w) - sigma(T_z w) - h.z] - V0(w)|: how far
/// the eigenvector-induced Busemann function is from recovering V0.
inline double recovery_residual_maxplus(const QuotientSpace& q, const Tilt& h,
                                        const MaxPlusEigen& e) {
  double worst = 0.0;
  for (std::size_t w = 0; w < q.size(); ++w) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.steps().size(); ++k)
      best = std::min(best, e.lambda + e.sigma[w] - e.sigma[q.shift(w, k)] - h.dot(q.steps()[k]));
    worst = std::max(worst, std::abs(best - q.v0(w)));
  }
  return worst;
}

/// Point-to-point constant at velocity xi: the best mean potential over
/// convex combinations of circuits whose mean step is xi.
inline double gpp_periodic(const CircuitSet& circuits, const Velocity& v) {
  if (!circuits.complete)
    throw ResourceError("circuit enumeration hit its cap; the hull is not certified");
  const std::size_t d = v.xi.size();
  // Distinct (mean step, mean potential) points; dominated duplicates dropped.
  std::map<std::vector<double>, double> points;
  for (const auto& c : circuits.circuits) {
    if (c.mean_step.size() != d) throw std::invalid_argument("circuits carry no step labels");
    auto [it, fresh] = points.emplace(c.mean_step, c.mean_potential);
    if (!fresh) it->second = std::max(it->second, c.mean_potential);
  }
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(points.size(), 0.0));
  std::vector<double> b(v.xi);
  b.push_back(1.0);
  std::vector<double> c;
  std::size_t col = 0;
  for (const auto& [step, pot] : points) {
    for (std::size_t i = 0; i < d; ++i) a[i][col] = step[i];
    a[d][col] = 1.0;
    c.push_back(pot);
    ++col;
  }
  const auto res = detail::maximize(a, b, c);
  if (res.status != detail::LpResult::Status::optimal)
    throw ModelError("velocity lies outside the convex hull of circuit mean steps");
  return res.value;
}

/// Upper bound min over a grid of h of [lambda(h) - h.xi], the dual side of
/// gpp_periodic. The grid is the cube [-radius, radius]^d with `points` nodes
/// per axis.
inline double gpp_dual_grid(const QuotientSpace& q, const Velocity& v, double radius,
                            std::size_t points) {
  if (points < 2) throw std::invalid_argument("gpp_dual_grid needs at least 2 points per axis");
  const std::size_t d = q.steps().dimension();
  std::vector<std::size_t> idx(d, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    Tilt h;
    h.h.resize(d);
    for (std::size_t i = 0; i < d; ++i)
      h.h[i] = -radius + 2.0 * radius * static_cast<double>(idx[i]) / static_cast<double>(points - 1);
    double hx = 0.0;
    for (std::size_t i = 0; i < d; ++i) hx += h.h[i] * v.xi[i];
    best = std::min(best, karp_eigenvalue(build_maxplus_matrix(q, h)) - hx);
    std::size_t pos = d;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < points) break;
      idx[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

}  // namespace polyvar
