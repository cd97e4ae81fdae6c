#pragma once

// Periodic environments on Z^d and their finite quotient spaces: the set of
// distinguishable environment states with the shift action of the steps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyvar/error.hpp"
#include "polyvar/model_core.hpp"

namespace polyvar {

/// A weight table on the fundamental rectangle prod [0, p_i), extended
/// periodically. Weights are stored row-major, first coordinate slowest.
struct PeriodicEnvironment {
  std::size_t dimension = 0;
  std::vector<std::int64_t> period;
  std::vector<double> weights;

  void validate() const {
    if (dimension == 0) throw std::invalid_argument("environment dimension must be positive");
    if (period.size() != dimension) throw std::invalid_argument("period has wrong dimension");
    std::int64_t cells = 1;
    for (auto p : period) {
      if (p < 1) throw std::invalid_argument("period entries must be >= 1");
      cells *= p;
    }
    if (static_cast<std::int64_t>(weights.size()) != cells)
      throw std::invalid_argument("weight table has " + std::to_string(weights.size()) +
                                  " entries, expected " + std::to_string(cells));
    for (double w : weights)
      if (!std::isfinite(w)) throw std::invalid_argument("weights must be finite");
  }

  std::size_t cell_count() const { return weights.size(); }

  /// Flat row-major index of x mod period.
  std::size_t residue(const Site& x) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dimension; ++i) {
      std::int64_t r = x[i] % period[i];
      if (r < 0) r += period[i];
      idx = idx * static_cast<std::size_t>(period[i]) + static_cast<std::size_t>(r);
    }
    return idx;
  }

  Site cell(std::size_t flat) const {
    Site x(dimension, 0);
    for (std::size_t i = dimension; i-- > 0;) {
      x[i] = static_cast<std::int64_t>(flat % static_cast<std::size_t>(period[i]));
      flat /= static_cast<std::size_t>(period[i]);
    }
    return x;
  }

  double weight_at(const Site& x) const { return weights[residue(x)]; }
};

/// Finite environment space Omega with the shift action T_z for z in R and
/// the potential V0 on states. Immutable after construction.
class QuotientSpace {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// Abstract quotient from a shift table shift[state][step]. Checks that
  /// each T_z is a bijection, that the T_z commute, and irreducibility.
  static QuotientSpace from_table(StepSet steps, std::vector<std::vector<std::size_t>> shift,
                                  std::vector<double> v0) {
    QuotientSpace q(std::move(steps), std::move(shift), std::move(v0));
    q.validate();
    return q;
  }

  std::size_t size() const { return v0_.size(); }
  const StepSet& steps() const { return steps_; }
  const std::vector<double>& potential() const { return v0_; }
  double v0(std::size_t state) const { return v0_.at(state); }
  const std::vector<std::vector<std::size_t>>& shift_table() const { return shift_; }

  /// T_{z_k} applied to a state, by step index.
  std::size_t shift(std::size_t state, std::size_t step_index) const {
    return shift_.at(state).at(step_index);
  }

  /// T_z applied to a state; z must be one of the steps.
  std::size_t shift(std::size_t state, const Site& z) const {
    const auto k = steps_.index_of(z);
    if (!k) throw std::invalid_argument("unknown step " + to_string(z));
    return shift(state, *k);
  }

  /// State of T_x omega for the base state omega. Only available for
  /// quotients built from a lattice environment.
  std::size_t state_at(const Site& x) const {
    if (!env_) throw std::logic_error("quotient has no lattice embedding");
    const auto s = residue_state_[env_->residue(x)];
    if (s == npos) throw std::invalid_argument("site " + to_string(x) + " is not in the step group");
    return s;
  }

  bool has_lattice() const { return env_.has_value(); }

  /// Residue classes (flat indices) merged into each state.
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }

 private:
  friend QuotientSpace build_quotient(const PeriodicEnvironment&, const StepSet&);

  QuotientSpace(StepSet steps, std::vector<std::vector<std::size_t>> shift, std::vector<double> v0)
      : steps_(std::move(steps)), shift_(std::move(shift)), v0_(std::move(v0)) {}

  void validate() const {
    const std::size_t m = v0_.size();
    const std::size_t r = steps_.size();
    if (m == 0) throw std::invalid_argument("quotient must have at least one state");
    if (shift_.size() != m) throw std::invalid_argument("shift table has wrong number of states");
    for (std::size_t w = 0; w < m; ++w) {
      if (shift_[w].size() != r) throw std::invalid_argument("shift table row has wrong length");
      for (auto t : shift_[w])
        if (t >= m) throw std::invalid_argument("shift table entry out of range");
      if (!std::isfinite(v0_[w])) throw std::invalid_argument("potential must be finite");
    }
    for (std::size_t k = 0; k < r; ++k) {
      std::vector<bool> hit(m, false);
      for (std::size_t w = 0; w < m; ++w) hit[shift_[w][k]] = true;
      if (std::find(hit.begin(), hit.end(), false) != hit.end())
        throw std::invalid_argument("shift by " + to_string(steps_[k]) + " is not a bijection");
    }
    for (std::size_t w = 0; w < m; ++w)
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = a + 1; b < r; ++b)
          if (shift_[shift_[w][a]][b] != shift_[shift_[w][b]][a])
            throw std::invalid_argument("shifts do not commute");
    check_irreducible();
  }

  void check_irreducible() const {
    const std::size_t m = v0_.size();
    auto reach = [&](bool forward) {
      std::vector<std::vector<std::size_t>> adj(m);
      for (std::size_t w = 0; w < m; ++w)
        for (auto t : shift_[w]) {
          if (forward)
            adj[w].push_back(t);
          else
            adj[t].push_back(w);
        }
      std::vector<bool> seen(m, false);
      std::deque<std::size_t> queue{0};
      seen[0] = true;
      while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto v : adj[u])
          if (!seen[v]) {
            seen[v] = true;
            queue.push_back(v);
          }
      }
      return seen;
    };
    const auto fwd = reach(true);
    for (std::size_t w = 0; w < m; ++w)
      if (!fwd[w]) throw NotIrreducible(0, w);
    const auto bwd = reach(false);
    for (std::size_t w = 0; w < m; ++w)
      if (!bwd[w]) throw NotIrreducible(w, 0);
  }

  StepSet steps_;
  std::vector<std::vector<std::size_t>> shift_;
  std::vector<double> v0_;
  std::optional<PeriodicEnvironment> env_;
  std::vector<std::size_t> residue_state_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Minimal quotient of a periodic environment: residues reachable from the
/// origin under the steps, merged when no sequence of shifts tells their
/// weights apart. State 0 is the environment seen from the origin.
inline QuotientSpace build_quotient(const PeriodicEnvironment& env, const StepSet& steps) {
  env.validate();
  if (steps.dimension() != env.dimension)
    throw std::invalid_argument("step dimension does not match environment dimension");
  const std::size_t cells = env.cell_count();
  const std::size_t r = steps.size();

  // Orbit of the origin residue, in BFS order.
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> cell_shift(cells, std::vector<std::size_t>(r, 0));
  std::vector<bool> seen(cells, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    order.push_back(c);
    const Site x = env.cell(c);
    for (std::size_t k = 0; k < r; ++k) {
      const auto t = env.residue(x + steps[k]);
      cell_shift[c][k] = t;
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    }
  }

  // Moore-style partition refinement, class ids assigned in BFS order.
  std::vector<std::size_t> cls(cells, QuotientSpace::npos);
  {
    std::map<double, std::size_t> ids;
    for (auto c : order) cls[c] = ids.emplace(env.weights[c], ids.size()).first->second;
  }
  std::size_t n_classes = 0;
  while (true) {
    std::map<std::vector<std::size_t>, std::size_t> ids;
    std::vector<std::size_t> next(cells, QuotientSpace::npos);
    for (auto c : order) {
      std::vector<std::size_t> sig{cls[c]};
      for (std::size_t k = 0; k < r; ++k) sig.push_back(cls[cell_shift[c][k]]);
      next[c] = ids.emplace(std::move(sig), ids.size()).first->second;
    }
    const bool stable = ids.size() == n_classes;
    n_classes = ids.size();
    cls = std::move(next);
    if (stable) break;
  }

  std::vector<std::vector<std::size_t>> shift(n_classes, std::vector<std::size_t>(r, 0));
  std::vector<double> v0(n_classes, 0.0);
  std::vector<std::vector<std::size_t>> members(n_classes);
  for (auto c : order) {
    const auto s = cls[c];
    members[s].push_back(c);
    v0[s] = env.weights[c];
    for (std::size_t k = 0; k < r; ++k) shift[s][k] = cls[cell_shift[c][k]];
  }

  QuotientSpace q(steps, std::move(shift), std::move(v0));
  q.validate();
  q.env_ = env;
  q.residue_state_ = std::move(cls);
  q.members_ = std::move(members);
  return q;
}

/// Gradient cocycle F(omega, 0, z) = f(T_z omega) - f(omega) given by a
/// potential f on the states of a quotient.
struct GradientCocycle {
  std::vector<double> f;

  double increment(const QuotientSpace& q, std::size_t state, std::size_t step_index) const {
    return f.at(q.shift(state, step_index)) - f.at(state);
  }
};

}  // namespace polyvar
