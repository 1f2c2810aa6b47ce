// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

// Randomized invariant checks. Each generator draws from a fixed-seed
// mt19937_64 so failures reproduce; the failing case index is reported.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mixrate/evolve2d.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/kernels.hpp"
#include "mixrate/mcsim.hpp"
#include "mixrate/spectral1d.hpp"
#include "oracle_util.hpp"

using namespace mixrate;
using std::numbers::pi;

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::vector<double> sorted_breaks(std::size_t n) {
    std::vector<double> b;
    while (b.size() < n) {
      const double x = uniform(0.02, 0.98);
      if (std::all_of(b.begin(), b.end(), [&](double y) { return std::abs(x - y) > 0.01; })) b.push_back(x);
    }
    std::sort(b.begin(), b.end());
    return b;
  }

  std::vector<double> values(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(-2, 2);
    return v;
  }

  // Any torus representation, wrapped in a random affine map.
  VelocityField field() {
    VelocityField v = [&] {
      switch (index(7)) {
        case 0: {
          const std::size_t n = 1 + index(5);
          return VelocityField::piecewise_constant(sorted_breaks(n), values(n + 1));
        }
        case 1: {
          auto k = sorted_breaks(1 + index(4));
          k.insert(k.begin(), 0.0);
          k.push_back(1.0);
          auto vals = values(k.size());
          vals.back() = vals.front();
          return VelocityField::piecewise_linear(k, vals);
        }
        case 2: return VelocityField::grid(values(3 + index(20)));
        case 3: return VelocityField::sine(uniform(0.1, 2), 1 + index(3), uniform(0, 6));
        case 4: return VelocityField::sawtooth(uniform(0.1, 2), 1 + index(3));
        case 5: return VelocityField::heaviside(uniform(0.1, 0.9), uniform(-1, 1), uniform(-1, 1));
        default: return VelocityField::binary_cascade(uniform(0.3, 2));
      }
    }();
    if (index(2)) v = v.scaled(uniform(-2, 2));
    if (index(2)) v = v.shifted(uniform(-1, 1));
    return v;
  }

  // Doubly stochastic (uniform is invariant): a random convex combination
  // of permutation matrices mixed with the uniform kernel.
  Eigen::MatrixXd doubly_stochastic(std::size_t n, double uniform_weight) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, uniform_weight / n);
    std::vector<double> w(3);
    for (auto& x : w) x = uniform(0.1, 1);
    const double total = w[0] + w[1] + w[2];
    std::vector<std::size_t> perm(n);
    for (double x : w) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng_);
      for (std::size_t i = 0; i < n; ++i) m(i, perm[i]) += (1 - uniform_weight) * x / total;
    }
    return m;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("osc is shift invariant and scales by |lambda|") {
    Gen g(1);
    for (int i = 0; i < 200; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      const double c = g.uniform(-3, 3), l = g.uniform(-3, 3);
      CHECK(v.shifted(c).osc() == doctest::Approx(v.osc()).epsilon(1e-12));
      CHECK(v.scaled(l).osc() == doctest::Approx(std::abs(l) * v.osc()).epsilon(1e-12));
    }
  }

  TEST_CASE("primitive differences match the midpoint rule") {
    Gen g(2);
    for (int i = 0; i < 60; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      double a = g.uniform(0, 1), b = g.uniform(0, 1);
      if (a > b) std::swap(a, b);
      const auto p = primitive(v, 0.0);
      const double want = oracle::midpoint_integral([&](double x) { return v(x); }, a, b, 20000);
      // midpoint error on a jump is at most osc * h per break
      CHECK(std::abs(p(b) - p(a) - want) <= 1e-9 + 10 * v.osc() * (b - a) / 20000);
    }
  }

  TEST_CASE("check_P is absent iff there are no two distinct plateau values") {
    Gen g(3);
    for (int i = 0; i < 200; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      const auto pl = plateaus(v, 1e-12);
      bool distinct = false;
      for (const auto& a : pl)
        for (const auto& b : pl) distinct = distinct || a.value != b.value;
      CHECK(check_P(v).has_value() == distinct);
    }
  }

  TEST_CASE("affine residual grows under inclusion") {
    Gen g(4);
    for (int i = 0; i < 100; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      double a = g.uniform(0, 0.5), b = g.uniform(0.5, 1);
      const double a2 = g.uniform(a, 0.5), b2 = g.uniform(0.5, b);
      CHECK(affine_residual(v, {a2, b2}) <= affine_residual(v, {a, b}) * (1 + 1e-9) + 1e-18);
    }
  }

  TEST_CASE("omega2 bounds, shift invariance and dyadic monotonicity") {
    Gen g(5);
    for (int i = 0; i < 12; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      const auto b = i % 3 == 0 ? Boundary::dirichlet : Boundary::periodic;
      const Omega2Problem p{v, b, {0.0, 1.0}};
      const double w32 = omega2(p, 32), w64 = omega2(p, 64);
      CHECK(w32 >= -1e-12);
      CHECK(w64 <= v.osc() / 2 + 1e-9);
      CHECK(w64 >= w32 - 1e-9);
      const Omega2Problem q{v.shifted(g.uniform(-2, 2)), b, {0.0, 1.0}};
      CHECK(omega2(q, 32) == doctest::Approx(w32).epsilon(1e-8));
    }
  }

  TEST_CASE("omega1 is nondecreasing in eps") {
    Gen g(6);
    for (int i = 0; i < 20; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      double prev = 0.0;
      for (double eps : {0.05, 0.1, 0.2, 0.35, 0.5}) {
        const double w = omega1(v, {0.0, 1.0}, eps, 64);
        CHECK(w >= prev * (1 - 1e-12));
        prev = w;
      }
    }
  }

  TEST_CASE("formula bounds") {
    Gen g(7);
    for (int i = 0; i < 500; ++i) {
      const double eps = g.uniform(0.01, 1), w = std::exp(g.uniform(-10, 15)), l1 = g.uniform(0, 50);
      CHECK(prop32_bound(w, eps, l1) <= pi * pi / (4 * eps * eps));
      CHECK(prop32_bound(w, eps, l1) >= 0.0);
      const double ell = g.uniform(0.01, 0.5), dv = g.uniform(0.01, 5);
      const auto t = thm12_constants(ell, dv);
      CHECK(t.log_alpha_P < 0);
      CHECK(std::isfinite(t.log_alpha_P));
      const auto d = doeblin_constants_log(t.t_P, t.log_alpha_P);
      CHECK(d.C >= 1.0);
      CHECK(d.C_minus_one >= 0.0);  // underflows for very small alpha; log_rho stays exact
      CHECK(std::isfinite(d.log_rho));
    }
  }

  TEST_CASE("doeblin_iterate never violates its envelope") {
    Gen g(8);
    for (int i = 0; i < 100; ++i) {
      CAPTURE(i);
      const std::size_t n = 2 + g.index(6);
      const auto k = g.doubly_stochastic(n, g.uniform(0.05, 0.9));
      const double alpha = n * k.minCoeff() * 0.999;
      if (alpha <= 0.0 || alpha >= 1.0) continue;
      const auto r = doeblin_iterate(k, 1, alpha, 30);
      REQUIRE(r.precondition_ok);
      CHECK_FALSE(r.first_violation);
    }
  }

  TEST_CASE("r(lambda1) is shift covariant") {
    Gen g(9);
    for (int i = 0; i < 4; ++i) {
      CAPTURE(i);
      const auto v = VelocityField::sine(g.uniform(0.5, 1.5), 1, g.uniform(0, 6));
      const double c = g.uniform(-1, 1);
      ModeOperator a(v, Boundary::periodic, {0.0, 1.0}, 48, 1);
      ModeOperator b(v.shifted(c), Boundary::periodic, {0.0, 1.0}, 48, 1);
      const auto ra = r_lambda1(a), rb = r_lambda1(b);
      CHECK(rb.r_lambda1 == doctest::Approx(ra.r_lambda1).epsilon(1e-6));
      for (double s : {-2.0, 0.5, 3.0})
        CHECK(sigma_min(b, s + 2 * pi * c) == doctest::Approx(sigma_min(a, s)).epsilon(1e-9));
    }
  }

  TEST_CASE("sigma_min dominates the distance to the numerical range") {
    Gen g(10);
    for (int i = 0; i < 10; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      ModeOperator op(v, Boundary::periodic, {0.0, 1.0}, 48, 1, Discretization::finite_difference);
      const double lo = 2 * pi * v.inf(), hi = 2 * pi * v.sup();
      for (double s : {lo - g.uniform(0.1, 5), hi + g.uniform(0.1, 5)}) {
        const double dist = s < lo ? lo - s : s - hi;
        CHECK(sigma_min(op, s) >= dist * (1 - 1e-9));
      }
    }
  }

  TEST_CASE("kernels are nonnegative and symmetric") {
    Gen g(11);
    for (int i = 0; i < 300; ++i) {
      const double x = g.uniform(0, 1), y = g.uniform(0, 1), t = std::exp(g.uniform(-7, 1));
      CHECK(kernels::heat_torus(x, y, t) >= 0.0);
      CHECK(kernels::heat_torus(x, y, t) == doctest::Approx(kernels::heat_torus(y, x, t)).epsilon(1e-12));
      const Interval iv{0.0, 1.0};
      const double d = kernels::heat_dirichlet(x, y, iv, t);
      CHECK(d >= -1e-14);
      CHECK(d == doctest::Approx(kernels::heat_dirichlet(y, x, iv, t)).epsilon(1e-10));
      const kernels::KolmogorovState s{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1), t};
      CHECK(kernels::kolmogorov_kernel(s) >= 0.0);
    }
  }

  TEST_CASE("Dirichlet smoothing at t = 1 from point masses") {
    Gen g(12);
    for (int i = 0; i < 50; ++i) {
      const double xp = g.uniform(0, 1);
      CHECK(kernels::dirichlet_point_solution_l2(xp, {0.0, 1.0}, 1.0) <= std::pow(8 * pi, -0.5) + 1e-6);
    }
  }

  TEST_CASE("evolution preserves mass, Parseval and stays nearly positive") {
    Gen g(13);
    for (int i = 0; i < 5; ++i) {
      CAPTURE(i);
      const auto v = g.field();
      const XGrid grid{Boundary::periodic, {0.0, 1.0}, 24};
      const double cx = g.uniform(0, 1), cy = g.uniform(0, 1);
      const auto u0 = sample_field([&](double x, double y) {
        return 1.0 + std::cos(2 * pi * (x - cx)) * std::cos(2 * pi * (y - cy));
      }, grid, 3);
      Evolver ev(v, grid, 3);
      const auto u = ev.step(u0, g.uniform(0.01, 0.3));
      CHECK(u.mass() == doctest::Approx(u0.mass()).epsilon(1e-11));
      const auto s = u.to_samples(7);
      CHECK(u.l2_norm() == doctest::Approx(std::sqrt(s.squaredNorm() / s.size())).epsilon(1e-10));
      CHECK(s.minCoeff() >= -1e-8 * 2.0);
      // evolving one mode alone matches the joint evolution
      ModeField single(grid, 3);
      single.mode(2) = u0.mode(2);
      single.mode(-2) = u0.mode(-2);
      const auto us = ev.step(single, 0.1);
      const auto uj = ev.step(u0, 0.1);
      CHECK((us.mode(2) - uj.mode(2)).norm() < 1e-12);
    }
  }

  TEST_CASE("histograms conserve mass for random starts and fields") {
    Gen g(14);
    for (int i = 0; i < 5; ++i) {
      mc::PathConfig cfg;
      cfg.dt = 0.02;
      cfg.n_paths = 2000;
      cfg.t_end = g.uniform(0.1, 1.0);
      cfg.cells = 2 + g.index(7);
      cfg.seed = i;
      const auto h = mc::simulate(g.uniform(0, 1), g.uniform(0, 1), mc::SimVelocity::periodic(g.field()), cfg);
      CHECK(h.total() == cfg.n_paths);
    }
  }
}
