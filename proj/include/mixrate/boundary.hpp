// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>

#include "mixrate/velocity.hpp"

namespace mixrate {

enum class Boundary { periodic, dirichlet };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "dirichlet"; }

// Ground state of -d^2/dx^2 on the interval, normalized in L^2.
inline double ground_state(Boundary b, Interval i, double x) {
  const double len = i.length();
  if (b == Boundary::periodic) return 1.0 / std::sqrt(len);
  return std::sqrt(2.0 / len) * std::sin(std::numbers::pi * (x - i.lo) / len);
}

inline double laplace_lambda1(Boundary b, Interval i) {
  const double k = std::numbers::pi / i.length();
  return b == Boundary::periodic ? 0.0 : k * k;
}

inline double laplace_lambda2(Boundary, Interval i) {
  const double k = 2.0 * std::numbers::pi / i.length();
  return k * k;
}

}  // namespace mixrate
