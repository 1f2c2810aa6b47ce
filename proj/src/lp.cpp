// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/lp.hpp"

#include <algorithm>
#include <cmath>

#include "mixrate/error.hpp"

namespace mixrate::lp {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows * cols, 0.0), beta_(rows, 0.0), basis_(rows, 0),
        upper_(cols, infinity), at_upper_(cols, false), blocked_(cols, false), d_(cols, 0.0) {}

  double& at(std::size_t r, std::size_t j) { return t_[r * n_ + j]; }
  double at(std::size_t r, std::size_t j) const { return t_[r * n_ + j]; }

  std::size_t m_, n_;
  std::vector<double> t_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<bool> blocked_;
  std::vector<double> d_;
  std::vector<char> is_basic_;

  void price(const std::vector<double>& cost) {
    d_ = cost;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &t_[r * n_];
      for (std::size_t j = 0; j < n_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t r = 0; r < m_; ++r) d_[basis_[r]] = 0.0;
  }

  double value_of_nonbasic(std::size_t j) const { return at_upper_[j] ? upper_[j] : 0.0; }

  // Runs simplex iterations on the current pricing row. Returns false when unbounded.
  Status iterate(const std::vector<double>& cost, std::size_t max_iter, std::size_t& iterations) {
    is_basic_.assign(n_, 0);
    for (auto b : basis_) is_basic_[b] = 1;
    double last_obj = -infinity;
    std::size_t stall = 0;
    for (;;) {
      if (iterations >= max_iter) return Status::iteration_limit;
      const bool bland = stall > 50;
      std::size_t enter = n_;
      double best = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j] || blocked_[j]) continue;
        const double dj = d_[j];
        const bool improving = at_upper_[j] ? dj < -kCostTol : dj > kCostTol;
        if (!improving) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
        }
      }
      if (enter == n_) return Status::optimal;
      ++iterations;

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      double step = upper_[enter];  // bound flip
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      for (std::size_t r = 0; r < m_; ++r) {
        const double alpha = dir * at(r, enter);
        if (alpha > kPivotTol) {
          const double lim = std::max(0.0, beta_[r]) / alpha;
          if (lim < step || (lim == step && leave_row < m_ && bland && basis_[r] < basis_[leave_row])) {
            step = lim;
            leave_row = r;
            leave_to_upper = false;
          }
        } else if (alpha < -kPivotTol && std::isfinite(upper_[basis_[r]])) {
          const double lim = std::max(0.0, upper_[basis_[r]] - beta_[r]) / -alpha;
          if (lim < step || (lim == step && leave_row < m_ && bland && basis_[r] < basis_[leave_row])) {
            step = lim;
            leave_row = r;
            leave_to_upper = true;
          }
        }
      }
      if (!std::isfinite(step)) return Status::unbounded;

      for (std::size_t r = 0; r < m_; ++r) beta_[r] -= dir * step * at(r, enter);

      if (leave_row == m_) {
        at_upper_[enter] = !at_upper_[enter];
      } else {
        const std::size_t leave = basis_[leave_row];
        const double entering_value = value_of_nonbasic(enter) + dir * step;
        pivot(leave_row, enter);
        beta_[leave_row] = entering_value;
        basis_[leave_row] = enter;
        is_basic_[enter] = 1;
        is_basic_[leave] = 0;
        at_upper_[leave] = leave_to_upper;
        at_upper_[enter] = false;
      }

      double obj = 0.0;
      for (std::size_t r = 0; r < m_; ++r) obj += cost[basis_[r]] * beta_[r];
      for (std::size_t j = 0; j < n_; ++j)
        if (!is_basic_[j] && at_upper_[j]) obj += cost[j] * upper_[j];
      if (obj > last_obj + 1e-12) {
        last_obj = obj;
        stall = 0;
      } else {
        ++stall;
      }
    }
  }

  void pivot(std::size_t r, std::size_t j) {
    double* prow = &t_[r * n_];
    const double inv = 1.0 / prow[j];
    for (std::size_t c = 0; c < n_; ++c) prow[c] *= inv;
    prow[j] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * n_];
      const double f = row[j];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n_; ++c) row[c] -= f * prow[c];
      row[j] = 0.0;
    }
    const double f = d_[j];
    if (f != 0.0) {
      for (std::size_t c = 0; c < n_; ++c) d_[c] -= f * prow[c];
      d_[j] = 0.0;
    }
  }
};

}  // namespace

Result solve(const Problem& p, std::size_t max_iterations) {
  const std::size_t n = p.c.size();
  const std::size_t m_le = p.a_le.size();
  const std::size_t m_eq = p.a_eq.size();
  require(p.b_le.size() == m_le && p.b_eq.size() == m_eq, ErrorCode::invalid_argument,
          "lp: right-hand side size mismatch");
  require(p.upper.empty() || p.upper.size() == n, ErrorCode::invalid_argument,
          "lp: upper bound size mismatch");
  for (const auto& row : p.a_le)
    require(row.size() == n, ErrorCode::invalid_argument, "lp: constraint row size mismatch");
  for (const auto& row : p.a_eq)
    require(row.size() == n, ErrorCode::invalid_argument, "lp: constraint row size mismatch");

  // Columns: structural | slacks (one per <= row) | artificials (as needed).
  std::vector<std::size_t> needs_art;
  for (std::size_t i = 0; i < m_le; ++i)
    if (p.b_le[i] < 0) needs_art.push_back(i);
  for (std::size_t i = 0; i < m_eq; ++i) needs_art.push_back(m_le + i);
  const std::size_t m = m_le + m_eq;
  const std::size_t n_art = needs_art.size();
  const std::size_t cols = n + m_le + n_art;
  Tableau tab(m, cols);
  for (std::size_t j = 0; j < n; ++j)
    if (!p.upper.empty()) {
      require(p.upper[j] >= 0, ErrorCode::invalid_argument, "lp: negative upper bound");
      tab.upper_[j] = p.upper[j];
    }

  std::size_t art = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const bool is_le = r < m_le;
    const auto& row = is_le ? p.a_le[r] : p.a_eq[r - m_le];
    double rhs = is_le ? p.b_le[r] : p.b_eq[r - m_le];
    const double sign = rhs < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = sign * row[j];
    if (is_le) tab.at(r, n + r) = sign;
    rhs *= sign;
    tab.beta_[r] = rhs;
    if (is_le && sign > 0) {
      tab.basis_[r] = n + r;
    } else {
      const std::size_t a = n + m_le + art++;
      tab.at(r, a) = 1.0;
      tab.basis_[r] = a;
    }
  }

  Result res;
  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t a = 0; a < n_art; ++a) phase1[n + m_le + a] = -1.0;
    tab.price(phase1);
    const Status s = tab.iterate(phase1, max_iterations, res.iterations);
    if (s == Status::iteration_limit) {
      res.status = s;
      return res;
    }
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (tab.basis_[r] >= n + m_le) infeas += tab.beta_[r];
    if (infeas > 1e-9 * (1.0 + m)) {
      res.status = Status::infeasible;
      return res;
    }
    // Artificials are pinned at zero for phase II.
    for (std::size_t a = 0; a < n_art; ++a) {
      tab.upper_[n + m_le + a] = 0.0;
      tab.blocked_[n + m_le + a] = true;
      tab.at_upper_[n + m_le + a] = false;
    }
  }

  std::vector<double> cost(cols, 0.0);
  std::copy(p.c.begin(), p.c.end(), cost.begin());
  tab.price(cost);
  res.status = tab.iterate(cost, max_iterations, res.iterations);
  if (res.status != Status::optimal) return res;

  std::vector<double> all(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) all[j] = tab.value_of_nonbasic(j);
  for (std::size_t r = 0; r < m; ++r) all[tab.basis_[r]] = tab.beta_[r];
  res.x.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += p.c[j] * res.x[j];
  return res;
}

}  // namespace mixrate::lp
