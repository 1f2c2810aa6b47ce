// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixrate/error.hpp"
#include "mixrate/functionals.hpp"

using namespace mixrate;
using std::numbers::pi;

TEST_SUITE("functionals") {
  TEST_CASE("rho_V") {
    CHECK(rho_V(0.0, 3.0) == 0.0);
    CHECK(rho_V(0.5, 2.0) == doctest::Approx(7.036e-4).epsilon(1e-3));
    CHECK(rho_V(0.5, 2.0) == doctest::Approx(std::pow(0.5 / (6 * pi), 2)).epsilon(1e-14));
    CHECK(rho_V(0.6, 2.0) > rho_V(0.5, 2.0));
    CHECK(rho_V(0.5, 2.5) < rho_V(0.5, 2.0));
  }

  TEST_CASE("rho_wei and phi inverses") {
    CHECK(rho_wei(0.0) == 0.0);
    CHECK(phi_wei(pi / 8) == doctest::Approx(18 * pi).epsilon(1e-14));
    CHECK(rho_wei(18 * pi) == doctest::Approx(pi * pi / 64).epsilon(1e-11));
    CHECK(rho_wei(1.0) < rho_wei(2.0));
    CHECK(phi_small(pi / 4) == doctest::Approx(9 * pi).epsilon(1e-14));
    CHECK(phi_small_inverse(9 * pi) == doctest::Approx(pi / 4).epsilon(1e-12));
    CHECK(phi_small_inverse(1e12) < pi / 2);
    CHECK(phi_wei_inverse(1e12) < pi / 4);
  }

  TEST_CASE("prop31 bound") {
    CHECK(prop31_bound(0.0, 1.0, 1.0, false) == 0.0);
    CHECK(prop31_bound(0.5, 2.0, 1.0, true) == doctest::Approx(7.036e-4).epsilon(1e-3));
    const double plain = (0.25 / 18) / (pi * pi + 4 / (pi * pi));
    CHECK(prop31_bound(0.5, 2.0, 1.0, false) == doctest::Approx(plain).epsilon(1e-14));
    CHECK(plain == doctest::Approx(1.352e-3).epsilon(1e-3));
  }

  TEST_CASE("prop32 bound") {
    CHECK(prop32_bound(0.0, 0.1, 0.0) == 0.0);
    CHECK(prop32_bound(0.0, 0.1, 4.0) == 0.0);
    const double eps = 0.2;
    CHECK(prop32_bound(9 * pi / eps, eps, 1.5) ==
          doctest::Approx(pi * pi / (16 * eps * eps) - 1.5).epsilon(1e-11));
    CHECK(prop32_bound(1e9, eps, 0.0) <= pi * pi / (4 * eps * eps));
  }

  TEST_CASE("thm12 constants") {
    CHECK(thm12_constants(0.25, 1.0).t_P == doctest::Approx(1.390625).epsilon(1e-15));
    CHECK(thm12_constants(0.5, 1.0).t_P == doctest::Approx(1.4375).epsilon(1e-15));
    const auto c = thm12_constants(0.5, 2.0);
    const double pieces = std::pow(8 * pi * std::numbers::e, -1.5) * std::exp(-pi * pi / 4) * 0.25 *
                          std::exp(-2 * pi * pi);
    CHECK(c.alpha_P == doctest::Approx(pieces).epsilon(1e-12));
    CHECK(c.alpha_P == doctest::Approx(1.0e-13).epsilon(0.05));
    CHECK(c.log_alpha_P == doctest::Approx(std::log(pieces)).epsilon(1e-13));
    CHECK(thm12_constants(0.5, 1e-3).log_alpha_P < thm12_constants(0.5, 1e-2).log_alpha_P);
    CHECK(thm12_constants(0.5, 1e-3).t_P > thm12_constants(0.5, 1e-2).t_P);
  }

  TEST_CASE("thm13 constants") {
    const auto c = thm13_constants(1.0, 1.0, 0.25, 1.0);
    const double beta = 1 + 2 * pi;
    CHECK(c.beta == doctest::Approx(beta).epsilon(1e-15));
    const double t_h = std::pow(10 * beta / 0.25, 2) * (1 + std::log(beta) + 1);
    CHECK(c.t_H == doctest::Approx(t_h).epsilon(1e-14));
    CHECK(c.t_H == doctest::Approx(3.383e5).epsilon(1e-3));
    CHECK(c.alpha_H == 0.0);
    CHECK(c.log_alpha_H == doctest::Approx(std::log(1.0 / 3) - pi * pi * t_h).epsilon(1e-14));
    CHECK(thm13_constants(1.0, 1.0, 0.25, 2.0).t_H > c.t_H);
    CHECK(thm13_constants(1.0, 1.5, 0.25, 1.0).t_H > c.t_H);
    try {
      thm13_constants(1.0, 0.0, 0.0, 1.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::undefined_bound);
    }
  }

  TEST_CASE("doeblin constants") {
    const auto a = doeblin_constants(1.0, 0.5);
    CHECK(a.C == 2.0);
    CHECK(a.rho == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const auto b = doeblin_constants(2.0, 0.5);
    CHECK(b.rho == doctest::Approx(std::log(2.0) / 2).epsilon(1e-15));
    const auto tiny = doeblin_constants(1.0, 1e-20);
    CHECK(tiny.C >= 1.0);
    CHECK(tiny.C_minus_one == doctest::Approx(1e-20).epsilon(1e-12));
    CHECK(tiny.rho > 0.0);
    CHECK(tiny.rho == doctest::Approx(1e-20).epsilon(1e-12));
    const auto log_form = doeblin_constants_log(1.4375, -49.67);
    CHECK(log_form.rho > 0.0);
    CHECK(log_form.log_rho == doctest::Approx(-49.67 - std::log(1.4375)).epsilon(1e-9));
    CHECK_THROWS_AS(doeblin_constants(1.0, 0.0), Error);
    CHECK_THROWS_AS(doeblin_constants(1.0, 1.0), Error);
  }

  TEST_CASE("doeblin iterate") {
    Eigen::MatrixXd chain(2, 2);
    chain << 0.75, 0.25, 0.25, 0.75;
    const auto r = doeblin_iterate(chain, 1, 0.5, 10);
    REQUIRE(r.precondition_ok);
    CHECK_FALSE(r.first_violation);
    for (std::size_t n = 0; n <= 10; ++n) {
      CHECK(r.tv[n] == doctest::Approx(0.5 * std::pow(0.5, n)).epsilon(1e-12));
      CHECK(r.tv[n] <= r.envelope[n] * (1 + 1e-12));
    }

    const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
    const auto u = doeblin_iterate(uniform, 1, 0.9, 3);
    REQUIRE(u.precondition_ok);
    CHECK(u.tv[1] == doctest::Approx(0.0).epsilon(1e-15));

    const auto id = doeblin_iterate(Eigen::MatrixXd::Identity(3, 3), 1, 0.5, 3);
    CHECK_FALSE(id.precondition_ok);
    REQUIRE(id.failing_entry);
    CHECK(id.failing_entry->first != id.failing_entry->second);
  }

  TEST_CASE("omega2 examples") {
    for (auto b : {Boundary::periodic, Boundary::dirichlet}) {
      Omega2Problem p{VelocityField::constant(2.0), b, {0.0, 1.0}};
      CHECK(std::abs(omega2(p, 64)) < 1e-12);
    }
    const double cos512 = omega2(Omega2Problem::torus(VelocityField::cosine()), 512);
    CHECK(cos512 >= 0.5 - 1e-3);
    CHECK(cos512 <= 1.0);
    const auto w = VelocityField::sawtooth(1.0, 2.0);
    const double base = omega2(Omega2Problem::torus(w), 64);
    CHECK(omega2(Omega2Problem::torus(w.scaled(-2.5)), 64) == doctest::Approx(2.5 * base).epsilon(1e-9));
    CHECK_THROWS_AS(omega2(Omega2Problem::torus(w), 8), Error);
  }

  TEST_CASE("omega1 examples") {
    const auto lin = VelocityField::piecewise_linear({0.0, 1.0}, {0.0, 1.0}, DomainKind::interval);
    CHECK(omega1(lin, {0.0, 1.0}, 0.5) == doctest::Approx(1.0 / 720).epsilon(1e-10));
    CHECK(omega1(VelocityField::cosine(), {0.0, 1.0}, 0.5) ==
          doctest::Approx(1 / (8 * pi * pi) - 3 / (4 * std::pow(pi, 4))).epsilon(1e-9));
    CHECK(omega1(VelocityField::constant(4.0), {0.0, 1.0}, 0.2) == doctest::Approx(0.0).epsilon(1e-14));
    // larger eps means fewer admissible windows
    const auto v = VelocityField::binary_cascade(0.5);
    CHECK(omega1(v, {0.0, 1.0}, 0.1) <= omega1(v, {0.0, 1.0}, 0.3));
  }

  TEST_CASE("compute_bounds on two plateaus") {
    const auto v = VelocityField::piecewise_constant({0.5}, {0.0, 1.0});
    const auto r = compute_bounds(v);
    REQUIRE(r.thm12);
    CHECK(r.thm12->t_P == 1.4375);
    CHECK(r.osc == 1.0);
    CHECK(r.omega2 >= 0.0);
    CHECK(r.omega2 <= 0.5 + 1e-12);
    REQUIRE(r.doeblin);
    CHECK(r.doeblin->rho > 0);
    const auto j = r.to_json();
    CHECK(j.contains("provenance"));
  }
}
