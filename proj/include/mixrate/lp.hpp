// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace mixrate::lp {

// maximize c.x  subject to  0 <= x <= upper,  A_le x <= b_le,  A_eq x = b_eq
struct Problem {
  std::vector<double> c;
  std::vector<double> upper;  // empty means +inf for every variable
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

// Dense bounded-variable two-phase simplex. Dantzig pricing, switching to
// Bland's rule while the objective stalls.
Result solve(const Problem& problem, std::size_t max_iterations = 200000);

inline constexpr double infinity = std::numeric_limits<double>::infinity();

}  // namespace mixrate::lp
