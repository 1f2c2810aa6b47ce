// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

// Test-side reference computations. They only use the public evaluation of
// V and plain quadrature, never the library's closed forms.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Midpoint-rule primitive of V from a on a fine grid.
inline double midpoint_integral(const std::function<double(double)>& v, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v(a + (i + 0.5) * h);
  return s * h;
}

// min_{p,q} int_J (P - p x - q)^2 for P sampled at m cell midpoints, with
// P built by cumulative midpoint sums of V.
inline double affine_residual(const std::function<double(double)>& v, double a, double b, int m = 40000) {
  const double h = (b - a) / m;
  std::vector<double> x(m), p(m);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double mid = a + (i + 0.5) * h;
    // primitive at the midpoint: integral up to the left edge plus half a cell
    x[i] = mid;
    p[i] = acc + 0.5 * h * v(a + (i + 0.25) * h);
    acc += 0.5 * h * (v(a + (i + 0.25) * h) + v(a + (i + 0.75) * h));
  }
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  const double c = 0.5 * (a + b);
  for (int i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i] - c;
    y(i) = p[i];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  return (A * coef - y).squaredNorm() * h;
}

}  // namespace oracle
