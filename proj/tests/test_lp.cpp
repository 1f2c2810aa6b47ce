// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mixrate/lp.hpp"

using namespace mixrate;

namespace {

// Best objective over the vertices of {x >= 0, x <= u, A x <= b} in two
// variables, found by intersecting every pair of constraint lines.
double brute_force_2d(const lp::Problem& p) {
  std::vector<std::array<double, 3>> lines;  // a0 x + a1 y <= b
  for (std::size_t i = 0; i < p.a_le.size(); ++i) lines.push_back({p.a_le[i][0], p.a_le[i][1], p.b_le[i]});
  lines.push_back({-1, 0, 0});
  lines.push_back({0, -1, 0});
  if (!p.upper.empty()) {
    lines.push_back({1, 0, p.upper[0]});
    lines.push_back({0, 1, p.upper[1]});
  }
  double best = -1e300;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const auto& a = lines[i];
      const auto& b = lines[j];
      const double det = a[0] * b[1] - a[1] * b[0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (a[2] * b[1] - a[1] * b[2]) / det;
      const double y = (a[0] * b[2] - a[2] * b[0]) / det;
      bool ok = true;
      for (const auto& l : lines) ok = ok && l[0] * x + l[1] * y <= l[2] + 1e-9;
      if (ok) best = std::max(best, p.c[0] * x + p.c[1] * y);
    }
  return best;
}

}  // namespace

TEST_SUITE("lp") {
  TEST_CASE("textbook maximization") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    lp::Problem p;
    p.c = {3, 5};
    p.a_le = {{1, 0}, {0, 2}, {3, 2}};
    p.b_le = {4, 12, 18};
    const auto r = lp::solve(p);
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.objective == doctest::Approx(36));
    CHECK(r.x[0] == doctest::Approx(2));
    CHECK(r.x[1] == doctest::Approx(6));
  }

  TEST_CASE("equality and upper bounds") {
    // max x + 2y + 3z, x + y + z = 1, z <= 0.25
    lp::Problem p;
    p.c = {1, 2, 3};
    p.upper = {lp::infinity, lp::infinity, 0.25};
    p.a_eq = {{1, 1, 1}};
    p.b_eq = {1};
    const auto r = lp::solve(p);
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.objective == doctest::Approx(0.75 * 2 + 0.75));
  }

  TEST_CASE("infeasible and unbounded") {
    lp::Problem inf;
    inf.c = {1};
    inf.a_eq = {{1}};
    inf.b_eq = {-1};
    CHECK(lp::solve(inf).status == lp::Status::infeasible);
    lp::Problem unb;
    unb.c = {1, 0};
    unb.a_le = {{0, 1}};
    unb.b_le = {1};
    CHECK(lp::solve(unb).status == lp::Status::unbounded);
  }

  TEST_CASE("random 2d problems match vertex enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      lp::Problem p;
      p.c = {u(rng), u(rng)};
      p.upper = {1.0 + u(rng) * 0.5 + 0.5, 2.0};
      for (int k = 0; k < 4; ++k) {
        p.a_le.push_back({u(rng), u(rng)});
        p.b_le.push_back(0.2 + std::abs(u(rng)));  // origin stays feasible
      }
      const auto r = lp::solve(p);
      REQUIRE(r.status == lp::Status::optimal);
      CHECK(r.objective == doctest::Approx(brute_force_2d(p)).epsilon(1e-9));
    }
  }
}
