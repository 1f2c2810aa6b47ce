// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "mixrate/error.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/spectral1d.hpp"

using namespace mixrate;
using std::numbers::pi;

TEST_SUITE("spectral1d") {
  TEST_CASE("laplace eigenvalues") {
    const auto d = laplace_eigs(Boundary::dirichlet, {0.0, 1.0}, 64);
    CHECK(d.lambda1 == doctest::Approx(pi * pi));
    CHECK(d.lambda2 == doctest::Approx(4 * pi * pi));
    const auto p = laplace_eigs(Boundary::periodic, {0.0, 1.0}, 64);
    CHECK(p.lambda1 == 0.0);
    CHECK(p.lambda2 == doctest::Approx(4 * pi * pi));
    CHECK(laplace_eigs(Boundary::dirichlet, {0.0, 0.5}, 64).lambda1 == doctest::Approx(4 * pi * pi));
    // sampled ground state is normalized by the grid quadrature
    const double h = 1.0 / 65;
    CHECK(h * d.e1.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("constant V has r = 0 at s = 2 pi k c") {
    const double c = 0.7;
    for (int k : {1, 2}) {
      ModeOperator op(VelocityField::constant(c), Boundary::periodic, {0.0, 1.0}, 64, k);
      CHECK(sigma_min(op, 2 * pi * k * c) < 1e-10);
      CHECK(sigma_min(op, 2 * pi * k * c + 1.0) == doctest::Approx(1.0).epsilon(1e-8));
      const auto r = r_lambda1(op);
      CHECK(r.r_lambda1 < 1e-8);
    }
  }

  TEST_CASE("cos beats the improved lower bound") {
    const auto v = VelocityField::cosine();
    ModeOperator op(v, Boundary::periodic, {0.0, 1.0}, 128, 1);
    const auto r = r_lambda1(op);
    const auto scaled = v.scaled(2 * pi);
    const double w2 = omega2(Omega2Problem::torus(scaled), 256);
    CHECK(r.r_lambda1 >= prop31_bound(w2, scaled.osc(), 1.0, true));
    CHECK(r.converged);
  }

  TEST_CASE("sigma_min at least the distance to the shifted spectrum") {
    // For normal operators sigma_min is the distance; in general it is bounded by it.
    ModeOperator op(VelocityField::sawtooth(), Boundary::periodic, {0.0, 1.0}, 64, 1,
                    Discretization::finite_difference);
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix());
    for (double s : {-3.0, 0.0, 2.5}) {
      double dist = 1e300;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        dist = std::min(dist, std::abs(es.eigenvalues()(i) - std::complex<double>(op.lambda1_discrete(), s)));
      CHECK(sigma_min(op, s) <= dist * (1 + 1e-9) + 1e-12);
    }
  }

  TEST_CASE("V shift changes only the argmin") {
    const auto v = VelocityField::cosine();
    ModeOperator a(v, Boundary::periodic, {0.0, 1.0}, 64, 1);
    ModeOperator b(v.shifted(0.4), Boundary::periodic, {0.0, 1.0}, 64, 1);
    const auto ra = r_lambda1(a);
    const auto rb = r_lambda1(b);
    CHECK(rb.r_lambda1 == doctest::Approx(ra.r_lambda1).epsilon(1e-6));
    CHECK(rb.s_argmin - ra.s_argmin == doctest::Approx(2 * pi * 0.4).epsilon(1e-4));
  }

  TEST_CASE("grid convergence for smooth V") {
    const auto v = VelocityField::sine(1.0, 2.0);
    const double r128 = r_lambda1(ModeOperator(v, Boundary::periodic, {0.0, 1.0}, 128, 1)).r_lambda1;
    const double r256 = r_lambda1(ModeOperator(v, Boundary::periodic, {0.0, 1.0}, 256, 1)).r_lambda1;
    CHECK(std::abs(r128 - r256) <= 0.01 * r256);
  }

  TEST_CASE("semigroup norm") {
    ModeOperator op(VelocityField::cosine(), Boundary::periodic, {0.0, 1.0}, 64, 1);
    const auto n = semigroup_norm(op, {0.0, 0.1, 1.0});
    CHECK(n[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : n) CHECK(x <= 1.0 + 1e-10);  // lambda1 = 0 on the torus

    ModeOperator heat(VelocityField::constant(0.0), Boundary::dirichlet, {0.0, 1.0}, 256, 1,
                      Discretization::spectral);
    for (double t : {0.01, 0.1, 0.5}) {
      CHECK(semigroup_norm(heat, {t})[0] == doctest::Approx(std::exp(-pi * pi * t)).epsilon(1e-6));
    }
    ModeOperator dir(VelocityField::sawtooth(), Boundary::dirichlet, {0.0, 1.0}, 128, 2);
    for (double t : {0.05, 0.3}) {
      CHECK(semigroup_norm(dir, {t})[0] <= std::exp(-dir.lambda1_discrete() * t) * (1 + 128 * 2.3e-16) + 1e-14);
    }
  }

  TEST_CASE("propagator") {
    ModeOperator zero(VelocityField::cosine(), Boundary::periodic, {0.0, 1.0}, 32, 0);
    const auto p = mode_propagator(zero, 0.3);
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(32);
    CHECK(((*p) * ones - ones).norm() < 1e-10);

    ModeOperator op(VelocityField::sine(1.0, 1.0, 0.3), Boundary::periodic, {0.0, 1.0}, 32, 1);
    const auto half = mode_propagator(op, 0.05);
    const auto full = mode_propagator(op, 0.1);
    CHECK(((*half) * (*half) - *full).norm() < 1e-10);
    CHECK(mode_propagator(op, 0.1) == full);  // cached

    // constant V: the mode only picks up a phase e^{-2 pi i k c t}
    ModeOperator c(VelocityField::constant(0.5), Boundary::periodic, {0.0, 1.0}, 16, 1);
    const auto pc = mode_propagator(c, 0.2);
    const std::complex<double> phase = std::exp(std::complex<double>(0, -2 * pi * 0.5 * 0.2));
    const Eigen::VectorXcd ones16 = Eigen::VectorXcd::Ones(16);
    CHECK(((*pc) * ones16 - phase * ones16).norm() < 1e-10);
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(ModeOperator(VelocityField::cosine(), Boundary::periodic, {0.0, 1.0}, 2, 1), Error);
    CHECK_THROWS_AS(ModeOperator(VelocityField::cosine(), Boundary::dirichlet, {0.5, 1.5}, 32, 1), Error);
  }
}
