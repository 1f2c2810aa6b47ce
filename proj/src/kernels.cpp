// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixrate/error.hpp"

namespace mixrate::kernels {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailTarget = 1e-14;
constexpr std::size_t kMaxTerms = 1000000;

void check_t(double t) {
  require(t > 0 && std::isfinite(t), ErrorCode::invalid_argument, "kernel: t must be positive");
}

// Fourth-order central first and second derivatives.
template <class F>
double d1(F f, double h) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}
template <class F>
double d2(F f, double h) {
  return (-f(2 * h) + 16 * f(h) - 30 * f(0.0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

}  // namespace

double kappa0() { return std::sqrt(2.0 / (std::numbers::e * kPi)); }

double heat_line(double x, double t) {
  check_t(t);
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

SeriesValue heat_torus_series(double x, double xp, double t, std::size_t truncation) {
  check_t(t);
  require(truncation >= 1, ErrorCode::invalid_argument, "heat_torus: truncation must be >= 1");
  double d = x - xp;
  d -= std::round(d);  // d in [-1/2, 1/2]
  // Beyond |m| = M every image sits at distance >= M + 1/2 and consecutive
  // terms shrink by at least q.
  auto tail = [&](std::size_t m) {
    const double a = static_cast<double>(m) + 0.5;
    const double q = std::exp(-(2.0 * a + 1.0) / (4.0 * t));
    return 2.0 * heat_line(a, t) / (1.0 - q);
  };
  std::size_t m = truncation;
  while (tail(m) >= kTailTarget && m < kMaxTerms) ++m;
  SeriesValue out;
  out.terms = m;
  out.tail_bound = tail(m);
  double sum = heat_line(d, t);
  for (std::size_t j = 1; j <= m; ++j) {
    const double jd = static_cast<double>(j);
    sum += heat_line(d + jd, t) + heat_line(d - jd, t);
  }
  out.value = sum;
  return out;
}

double heat_torus(double x, double xp, double t, std::size_t truncation) {
  return heat_torus_series(x, xp, t, truncation).value;
}

double heat_torus_fourier(double x, double xp, double t) {
  check_t(t);
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    const double w = 2.0 * kPi * k;
    const double term = std::exp(-w * w * t);
    sum += 2.0 * term * std::cos(w * (x - xp));
    if (term < 1e-18) break;
  }
  return sum;
}

SeriesValue heat_dirichlet_series(double x, double xp, Interval i, double t, std::size_t truncation) {
  check_t(t);
  require(i.length() > 0, ErrorCode::invalid_argument, "heat_dirichlet: empty interval");
  require(i.contains(x) && i.contains(xp), ErrorCode::domain, "heat_dirichlet: points outside I");
  require(truncation >= 1, ErrorCode::invalid_argument, "heat_dirichlet: truncation must be >= 1");
  const double len = i.length();
  const double a = kPi * kPi * t / (len * len);
  // sum_{k > K} e^{-a k^2} <= e^{-a (K+1)^2} / (1 - e^{-2 a (K+1)})
  auto tail = [&](std::size_t k) {
    const double kp = static_cast<double>(k + 1);
    return 2.0 / len * std::exp(-a * kp * kp) / (-std::expm1(-2.0 * a * kp));
  };
  std::size_t k = truncation;
  while (tail(k) >= kTailTarget && k < kMaxTerms) ++k;
  SeriesValue out;
  out.terms = k;
  out.tail_bound = tail(k);
  const double u = kPi * (x - i.lo) / len, v = kPi * (xp - i.lo) / len;
  double sum = 0.0;
  for (std::size_t m = 1; m <= k; ++m) {
    const double md = static_cast<double>(m);
    sum += std::exp(-a * md * md) * std::sin(md * u) * std::sin(md * v);
  }
  out.value = 2.0 / len * sum;
  return out;
}

double heat_dirichlet(double x, double xp, Interval i, double t, std::size_t truncation) {
  return heat_dirichlet_series(x, xp, i, t, truncation).value;
}

double heat_dirichlet_images(double x, double xp, Interval i, double t) {
  check_t(t);
  const double len = i.length();
  const double u = x - i.lo, v = xp - i.lo;
  double sum = 0.0;
  const int reach = 5 + static_cast<int>(std::ceil(std::sqrt(4.0 * t * 40.0) / (2.0 * len)));
  for (int n = -reach; n <= reach; ++n) {
    const double shift = 2.0 * n * len;
    sum += heat_line(u - v + shift, t) - heat_line(u + v + shift, t);
  }
  return sum;
}

double dirichlet_point_solution_l2(double xp, Interval i, double t) {
  check_t(t);
  require(i.contains(xp), ErrorCode::domain, "point outside I");
  const double len = i.length();
  double sum = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double lam = std::pow(k * kPi / len, 2);
    const double c = std::exp(-lam * t) * std::sqrt(2.0 / len) * std::sin(k * kPi * (xp - i.lo) / len);
    sum += c * c;
    if (std::exp(-2.0 * lam * t) * 2.0 / len < 1e-30) break;
  }
  return std::sqrt(sum);
}

KolmogorovControl kolmogorov_control(const KolmogorovState& s) {
  check_t(s.t);
  const double t = s.t;
  const double dx = s.x - s.x0;
  const double dy = s.y - s.y0 - s.x0 * t;
  // [t, t^2; t^2/2, t^3/3] (a, b) = (dx, dy)
  KolmogorovControl c;
  c.a = -2.0 * dx / t + 6.0 * dy / (t * t);
  c.b = 3.0 * dx / (t * t) - 6.0 * dy / (t * t * t);
  c.cost = 0.25 * (c.a * c.a * t + 2.0 * c.a * c.b * t * t + 4.0 / 3.0 * c.b * c.b * t * t * t);
  return c;
}

double kolmogorov_psi(const KolmogorovState& s) {
  check_t(s.t);
  const double t = s.t;
  const double dx = s.x - s.x0;
  const double r = s.y - s.y0 - 0.5 * (s.x + s.x0) * t;
  return dx * dx / (4.0 * t) + 3.0 / (t * t * t) * r * r;
}

double kolmogorov_normalization() { return std::sqrt(3.0) / (2.0 * kPi); }

double kolmogorov_kernel(const KolmogorovState& s) {
  return kolmogorov_normalization() / (s.t * s.t) * std::exp(-kolmogorov_psi(s));
}

double kolmogorov_pde_residual(const KolmogorovState& s, double h) {
  require(s.t > 2 * h, ErrorCode::invalid_argument, "pde residual: t too small for the stencil");
  auto in_t = [&](double e) { KolmogorovState q = s; q.t += e; return kolmogorov_kernel(q); };
  auto in_x = [&](double e) { KolmogorovState q = s; q.x += e; return kolmogorov_kernel(q); };
  auto in_y = [&](double e) { KolmogorovState q = s; q.y += e; return kolmogorov_kernel(q); };
  return d1(in_t, h) - d2(in_x, h) + s.x * d1(in_y, h);
}

}  // namespace mixrate::kernels
