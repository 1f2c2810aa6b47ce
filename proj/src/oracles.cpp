// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mixrate/error.hpp"

namespace mixrate::oracles {
namespace {

// Inequality g.phi <= h.
struct Half {
  std::vector<double> g;
  double h;
  int conflict_group;  // two members of one group cannot be active together
};

}  // namespace

std::vector<double> omega2_vertex_enumeration(const Omega2Lp& data,
                                              const std::vector<std::vector<double>>& objectives) {
  const std::size_t n = data.nodes.size();
  require(n >= 2 && n <= 10, ErrorCode::invalid_argument,
          "vertex enumeration: between 2 and 10 nodes");
  for (const auto& c : objectives)
    require(c.size() == n, ErrorCode::invalid_argument, "vertex enumeration: objective size");

  std::vector<Half> halves;
  int group = 0;
  for (std::size_t i = 0; i < n; ++i, ++group) {
    std::vector<double> g(n, 0.0);
    g[i] = 1.0;
    halves.push_back({g, 1.0, group});
    g[i] = -1.0;
    halves.push_back({g, 1.0, group});
  }
  auto pair = [&](std::size_t i, std::size_t j) {
    std::vector<double> g(n, 0.0);
    g[i] = 1.0;
    g[j] = -1.0;
    halves.push_back({g, data.delta, group});
    g[i] = -1.0;
    g[j] = 1.0;
    halves.push_back({g, data.delta, group});
    ++group;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) pair(i, i + 1);
  if (data.wrap) pair(n - 1, 0);

  const std::size_t m = halves.size();
  const std::size_t pick = n - 1;
  std::vector<double> best(objectives.size(), -std::numeric_limits<double>::infinity());

  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(j)) = data.d[j];
  rhs(static_cast<Eigen::Index>(n - 1)) = 0.0;

  std::vector<std::size_t> chosen;
  std::vector<int> used_groups;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (chosen.size() == pick) {
      for (std::size_t r = 0; r < pick; ++r) {
        for (std::size_t j = 0; j < n; ++j)
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = halves[chosen[r]].g[j];
        rhs(static_cast<Eigen::Index>(r)) = halves[chosen[r]].h;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      lu.setThreshold(1e-10);
      if (lu.rank() < static_cast<Eigen::Index>(n)) return;
      const Eigen::VectorXd phi = lu.solve(rhs);
      for (const auto& hf : halves) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += hf.g[j] * phi(static_cast<Eigen::Index>(j));
        if (s > hf.h + 1e-9) return;
      }
      for (std::size_t o = 0; o < objectives.size(); ++o) {
        double val = 0.0;
        for (std::size_t j = 0; j < n; ++j) val += objectives[o][j] * phi(static_cast<Eigen::Index>(j));
        best[o] = std::max(best[o], val);
      }
      return;
    }
    for (std::size_t k = start; k + (pick - chosen.size()) <= m; ++k) {
      const int gk = halves[k].conflict_group;
      if (std::find(used_groups.begin(), used_groups.end(), gk) != used_groups.end()) continue;
      chosen.push_back(k);
      used_groups.push_back(gk);
      self(self, k + 1);
      chosen.pop_back();
      used_groups.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

double affine_residual_bruteforce(const VelocityField& v, Interval j, std::size_t cells) {
  require(cells >= 10 && j.hi > j.lo, ErrorCode::invalid_argument, "bruteforce residual: bad input");
  const double h = j.length() / static_cast<double>(cells);
  // Primitive at cell midpoints from a running midpoint sum of V.
  std::vector<double> x(cells), p(cells);
  double acc = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double left = j.lo + static_cast<double>(i) * h;
    const double quarter = v.eval(std::min(left + 0.25 * h, j.hi));
    const double mid = left + 0.5 * h;
    x[i] = mid;
    p[i] = acc + 0.5 * h * quarter;
    acc += h * v.eval(mid);
  }
  // Least squares fit p ~ a + b (x - c) with centered abscissae.
  const double c = 0.5 * (j.lo + j.hi);
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double u = x[i] - c;
    s0 += h;
    s1 += h * u;
    s2 += h * u * u;
    t0 += h * p[i];
    t1 += h * u * p[i];
  }
  const double det = s0 * s2 - s1 * s1;
  const double a0 = (t0 * s2 - t1 * s1) / det;
  const double b0 = (s0 * t1 - s1 * t0) / det;
  double res = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double e = p[i] - a0 - b0 * (x[i] - c);
    res += h * e * e;
  }
  return res;
}

}  // namespace mixrate::oracles
