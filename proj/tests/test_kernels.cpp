// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixrate/kernels.hpp"
#include "oracle_util.hpp"

using namespace mixrate;
using namespace mixrate::kernels;
using std::numbers::pi;

TEST_SUITE("kernels") {
  TEST_CASE("torus heat kernel examples") {
    CHECK(heat_line(0.0, 1 / (4 * pi)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(heat_line(0.5, 0.125) == doctest::Approx(std::sqrt(2 / (std::numbers::e * pi))).epsilon(1e-14));
    CHECK(heat_torus(0.5, 0.0, 0.125) >= kappa0());
    CHECK(kappa0() == doctest::Approx(0.48394).epsilon(1e-4));
    for (double x : {0.0, 0.3, 0.77}) CHECK(heat_torus(x, 0.1, 5.0) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("torus images agree with the Fourier series") {
    for (double t : {0.001, 0.02, 0.3, 2.0})
      for (double x : {0.0, 0.13, 0.5, 0.92})
        CHECK(heat_torus(x, 0.2, t) == doctest::Approx(heat_torus_fourier(x, 0.2, t)).epsilon(1e-10));
    const auto s = heat_torus_series(0.4, 0.1, 0.05);
    CHECK(s.tail_bound < 1e-14);
  }

  TEST_CASE("torus kernel has unit mass and Chapman-Kolmogorov") {
    const double m = oracle::simpson([](double x) { return heat_torus(x, 0.3, 0.01); }, 0.0, 1.0, 4000);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
    const double s = 0.02, t = 0.05;
    const double ck = oracle::simpson(
        [&](double z) { return heat_torus(0.7, z, t) * heat_torus(z, 0.1, s); }, 0.0, 1.0, 4000);
    CHECK(ck == doctest::Approx(heat_torus(0.7, 0.1, s + t)).epsilon(1e-9));
  }

  TEST_CASE("Dirichlet kernel") {
    const Interval i{0.2, 0.9};
    CHECK(heat_dirichlet(0.2, 0.5, i, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(heat_dirichlet(0.9, 0.5, i, 0.1) == doctest::Approx(0.0).epsilon(1e-14));
    for (double t : {0.001, 0.01, 0.2})
      for (double x : {0.25, 0.5, 0.8})
        CHECK(std::abs(heat_dirichlet(x, 0.4, i, t) - heat_dirichlet_images(x, 0.4, i, t)) < 1e-10);
    CHECK(heat_dirichlet(0.6, 0.4, i, 0.01) == doctest::Approx(heat_dirichlet(0.4, 0.6, i, 0.01)));
    CHECK(heat_dirichlet(0.6, 0.4, i, 0.01) <= heat_torus(0.6, 0.4, 0.01));
    const double l2 = std::sqrt(oracle::simpson(
        [&](double x) { return std::pow(heat_dirichlet(x, 0.4, i, 0.05), 2); }, i.lo, i.hi, 4000));
    CHECK(dirichlet_point_solution_l2(0.4, i, 0.05) == doctest::Approx(l2).epsilon(1e-8));
  }

  TEST_CASE("Kolmogorov control") {
    const auto free = kolmogorov_control({0.5, 0.0, 0.5, 0.5, 1.0});
    CHECK(free.a == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(free.b == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(free.cost == doctest::Approx(0.0).epsilon(1e-14));
    const auto c = kolmogorov_control({0, 0, 0, 1, 1});
    CHECK(c.a == doctest::Approx(6.0));
    CHECK(c.b == doctest::Approx(-6.0));
    CHECK(c.cost == doctest::Approx(3.0));
    CHECK(kolmogorov_psi({0, 0, 0, 1, 1}) == doctest::Approx(3.0));
  }

  TEST_CASE("Kolmogorov control reaches the target") {
    const KolmogorovState s{0.3, -0.2, -0.7, 0.9, 0.8};
    const auto c = kolmogorov_control(s);
    const double w_int = c.a * s.t + c.b * s.t * s.t;  // int w
    CHECK(s.x0 + w_int == doctest::Approx(s.x).epsilon(1e-12));
    // Y(t) = y0 + x0 t + int_0^t (t - u) w(u) du
    const double y = s.y0 + s.x0 * s.t + c.a * s.t * s.t / 2 + c.b * std::pow(s.t, 3) / 3;
    CHECK(y == doctest::Approx(s.y).epsilon(1e-12));
    const double cost = oracle::simpson([&](double u) { return std::pow(c.a + 2 * c.b * u, 2) / 4; }, 0, s.t, 200);
    CHECK(c.cost == doctest::Approx(cost).epsilon(1e-12));
  }

  TEST_CASE("Kolmogorov kernel is a density solving the forward equation") {
    CHECK(kolmogorov_normalization() == doctest::Approx(std::sqrt(3.0) / (2 * pi)).epsilon(1e-14));
    const double t = 0.7;
    double mass = 0.0;
    const int n = 400;
    const double sx = std::sqrt(2 * t), sy = std::sqrt(2 * t * t * t / 3);
    const double hx = 20 * sx / n, hy = 20 * sy / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        mass += kolmogorov_kernel({0.0, 0.0, -10 * sx + (i + 0.5) * hx, -10 * sy + (j + 0.5) * hy, t});
    CHECK(mass * hx * hy == doctest::Approx(1.0).epsilon(1e-6));
    for (auto s : {KolmogorovState{0, 0, 0.4, 0.1, 1.0}, KolmogorovState{0.2, -0.3, -0.5, 0.2, 0.6}})
      CHECK(std::abs(kolmogorov_pde_residual(s)) < 1e-5);
  }
}
