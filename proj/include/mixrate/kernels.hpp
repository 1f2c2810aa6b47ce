// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "mixrate/velocity.hpp"

namespace mixrate::kernels {

// G_{1/8}(1/2) = sqrt(2 / (e pi)), the torus kernel floor at t = 1/8.
double kappa0();

double heat_line(double x, double t);

struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;  // certified bound on the omitted terms
  std::size_t terms = 0;    // images per side, or sine modes
};

// Image sum over |m| <= M, with M the smallest count >= truncation whose
// tail bound is below 1e-14.
SeriesValue heat_torus_series(double x, double xp, double t, std::size_t truncation = 1);
double heat_torus(double x, double xp, double t, std::size_t truncation = 1);
// 1 + 2 sum_k exp(-4 pi^2 k^2 t) cos(2 pi k (x - x')); independent cross-check.
double heat_torus_fourier(double x, double xp, double t);

// Sine eigen-series on I, same tail policy as heat_torus_series.
SeriesValue heat_dirichlet_series(double x, double xp, Interval i, double t,
                                  std::size_t truncation = 1);
double heat_dirichlet(double x, double xp, Interval i, double t, std::size_t truncation = 1);
// Method of images with alternating signs; independent cross-check.
double heat_dirichlet_images(double x, double xp, Interval i, double t);

// L^2(I) norm of the Dirichlet heat solution at time t from a unit point
// mass at xp.
double dirichlet_point_solution_l2(double xp, Interval i, double t);

struct KolmogorovState {
  double x0 = 0.0, y0 = 0.0, x = 0.0, y = 0.0, t = 1.0;
};

struct KolmogorovControl {
  double a = 0.0, b = 0.0, cost = 0.0;
};

// Minimal-energy control w(s) = a + 2 b s steering X' = w, Y' = X from
// (x0, y0) to (x, y) in time t; cost = int_0^t w^2 / 4.
KolmogorovControl kolmogorov_control(const KolmogorovState& s);
double kolmogorov_psi(const KolmogorovState& s);
// Normalization making the kernel a probability density on the plane.
double kolmogorov_normalization();
// Transition density of dX = sqrt(2) dW, dY = X dt.
double kolmogorov_kernel(const KolmogorovState& s);
// d_t u - d_xx u + x d_y u at the state, by 4th-order central differences.
double kolmogorov_pde_residual(const KolmogorovState& s, double h = 1e-3);

}  // namespace mixrate::kernels
