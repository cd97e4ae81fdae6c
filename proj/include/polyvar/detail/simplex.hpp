#pragma once

// Dense two-phase simplex for the small equality-form linear programs that
// show up here (convex-representation feasibility, circuit-hull evaluation).
// Sizes are a handful of rows and at most a few thousand columns.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace polyvar::detail {

struct LpResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::infeasible;
  double value = -std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

class Tableau {
 public:
  Tableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
          std::size_t n_vars)
      : rows_(a.size()), cols_(n_vars + a.size()), t_(rows_, std::vector<double>(cols_ + 1, 0.0)),
        basis_(rows_), active_(rows_, true) {
    for (std::size_t i = 0; i < rows_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_vars; ++j) t_[i][j] = sign * a[i][j];
      t_[i][n_vars + i] = 1.0;
      t_[i][cols_] = sign * b[i];
      basis_[i] = n_vars + i;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double rhs(std::size_t i) const { return t_[i][cols_]; }
  double at(std::size_t i, std::size_t j) const { return t_[i][j]; }
  std::size_t basis(std::size_t i) const { return basis_[i]; }
  bool active(std::size_t i) const { return active_[i]; }
  void deactivate(std::size_t i) { active_[i] = false; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_[r][c];
    for (double& v : t_[r]) v /= p;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r || !active_[i]) continue;
      const double f = t_[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

  // Maximizes cost·x over columns [0, allowed). Bland's rule.
  LpResult::Status optimize(const std::vector<double>& cost, std::size_t allowed, double eps) {
    for (std::size_t iter = 0; iter < 50000; ++iter) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (reduced_cost(cost, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return LpResult::Status::optimal;
      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        if (!active_[i] || t_[i][enter] <= eps) continue;
        const double ratio = t_[i][cols_] / t_[i][enter];
        if (ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && leave < rows_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == rows_) return LpResult::Status::unbounded;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration cap reached");
  }

  double objective(const std::vector<double>& cost) const {
    double v = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      if (active_[i]) v += cost[basis_[i]] * t_[i][cols_];
    return v;
  }

 private:
  double reduced_cost(const std::vector<double>& cost, std::size_t j) const {
    double z = -cost[j];
    for (std::size_t i = 0; i < rows_; ++i)
      if (active_[i]) z += cost[basis_[i]] * t_[i][j];
    return z;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
};

/// maximize c·x subject to A x = b, x >= 0.
inline LpResult maximize(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                         const std::vector<double>& c, double eps = 1e-11) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  for (const auto& row : a)
    if (row.size() != n) throw std::invalid_argument("simplex: ragged constraint matrix");
  if (b.size() != m) throw std::invalid_argument("simplex: rhs size mismatch");

  Tableau tab(a, b, n);
  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = -1.0;
  tab.optimize(phase1, n + m, eps);

  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  LpResult result;
  if (tab.objective(phase1) < -1e-9 * scale) {
    result.status = LpResult::Status::infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; rows where that is
  // impossible are linearly dependent on the others.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis(i) < n) continue;
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(tab.at(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col == n)
      tab.deactivate(i);
    else
      tab.pivot(i, col);
  }

  std::vector<double> phase2(n + m, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  const auto status = tab.optimize(phase2, n, eps);
  if (status == LpResult::Status::unbounded) {
    result.status = status;
    result.value = std::numeric_limits<double>::infinity();
    return result;
  }
  result.status = LpResult::Status::optimal;
  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.active(i) && tab.basis(i) < n) result.x[tab.basis(i)] = tab.rhs(i);
  result.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.value += c[j] * result.x[j];
  return result;
}

}  // namespace polyvar::detail
