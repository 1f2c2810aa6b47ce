// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

namespace mixrate::quadrature {

// 8-point Gauss-Legendre rule on [a, b], appended to (xs, ws).
inline void gauss_legendre_8(double a, double b, std::vector<double>& xs, std::vector<double>& ws) {
  static constexpr std::array<double, 4> node = {0.1834346424956498, 0.5255324099163290,
                                                 0.7966664774136267, 0.9602898564975363};
  static constexpr std::array<double, 4> weight = {0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (std::size_t i = 0; i < 4; ++i) {
    xs.push_back(c - h * node[i]);
    ws.push_back(h * weight[i]);
    xs.push_back(c + h * node[i]);
    ws.push_back(h * weight[i]);
  }
}

}  // namespace mixrate::quadrature
