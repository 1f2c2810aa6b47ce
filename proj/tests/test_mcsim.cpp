// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "mixrate/kernels.hpp"
#include "mixrate/mcsim.hpp"
#include "mixrate/parallel.hpp"
#include "oracle_util.hpp"

using namespace mixrate;
using namespace mixrate::mc;

namespace {

PathConfig cfg_of(double dt, std::size_t n, double t, std::size_t cells, std::uint64_t seed = 11) {
  PathConfig c;
  c.dt = dt;
  c.n_paths = n;
  c.t_end = t;
  c.cells = cells;
  c.seed = seed;
  return c;
}

const auto two_plateau = VelocityField::piecewise_constant({0.5}, {0.0, 1.0});

}  // namespace

TEST_SUITE("mcsim") {
  TEST_CASE("V = 0 leaves Y fixed and X follows the torus heat kernel") {
    const auto e = simulate_endpoints(0.3, 0.6, SimVelocity::zero(), cfg_of(0.01, 1000, 0.2, 8));
    for (double y : e.y) CHECK(y == 0.6);

    const double t = 0.05;
    const std::size_t m = 32;
    const auto h = simulate(0.3, 0.6, SimVelocity::zero(), cfg_of(0.01, 100000, t, m));
    std::vector<std::uint64_t> xc(m, 0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) xc[r] += h.count(r, c);
    std::vector<double> probs(m);
    for (std::size_t r = 0; r < m; ++r)
      probs[r] = oracle::simpson([&](double x) { return kernels::heat_torus(x, 0.3, t); },
                                 static_cast<double>(r) / m, static_cast<double>(r + 1) / m, 200);
    CHECK(chi_square_p(xc, probs) > 1e-3);
  }

  TEST_CASE("V = c moves Y at speed c") {
    const auto v = SimVelocity::periodic(VelocityField::constant(0.4));
    const auto e = simulate_endpoints(0.1, 0.2, v, cfg_of(0.01, 500, 1.0, 8));
    for (double y : e.y) CHECK(y == doctest::Approx(0.2 + 0.4).epsilon(1e-12));
  }

  TEST_CASE("histograms conserve paths") {
    const auto h = simulate(0.2, 0.1, SimVelocity::periodic(two_plateau), cfg_of(0.01, 5000, 0.5, 8));
    CHECK(h.total() == 5000);
    CHECK(h.killed == 0);
    auto cfg = cfg_of(0.01, 5000, 0.5, 8);
    cfg.kill_outside = Interval{0.0, 0.5};
    const auto k = simulate(0.25, 0.1, SimVelocity::periodic(two_plateau), cfg);
    CHECK(k.total() == 5000);  // killed paths stay in the total
    CHECK(k.killed > 0);
  }

  TEST_CASE("long-time histogram is uniform") {
    const std::size_t m = 4;
    const std::size_t n = 20000;
    // y mixes slowly for this field (TV decays roughly like e^{-0.2 t}), so go well past t = 5
    const auto h = simulate(0.25, 0.0, SimVelocity::periodic(two_plateau), cfg_of(0.02, n, 40.0, m));
    const double p = 1.0 / (m * m);
    const double sigma = std::sqrt(n * p * (1 - p));
    for (auto c : h.counts) CHECK(std::abs(static_cast<double>(c) - n * p) <= 3 * sigma);
  }

  TEST_CASE("Doeblin estimate edge cases") {
    const auto run = doeblin_estimate(SimVelocity::periodic(two_plateau), {0.0}, {{0.3, 0.3}},
                                      cfg_of(0.01, 1000, 0.0, 4));
    CHECK(run.estimates[0].alpha_hat == 0.0);
    CHECK(run.estimates[0].empty_cell);

    // uniform synthetic sampler: only sampling noise separates alpha_hat from 1
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> cell(0, 15);
    TransitionHistogram h;
    h.M = 4;
    h.counts.assign(16, 0);
    h.n_paths = 100000;
    for (std::size_t i = 0; i < h.n_paths; ++i) ++h.counts[cell(rng)];
    CHECK(h.alpha_hat() >= 0.9);
    const auto est = doeblin_from_histograms({h}, 0.99);
    CHECK(est.alpha_lower <= est.alpha_hat);
    CHECK(est.alpha_upper >= est.alpha_hat);
    CHECK_FALSE(est.empty_cell);
  }

  TEST_CASE("TV distance cases") {
    const auto v = SimVelocity::periodic(two_plateau);
    const auto cfg = cfg_of(0.01, 20000, 0.5, 4);
    CHECK(tv_distance(simulate(0.3, 0.3, v, cfg), simulate(0.3, 0.3, v, cfg)) == 0.0);

    // V = 0: no mixing in y
    const auto z = SimVelocity::zero();
    const auto same = tv_decay(z, {0.3, 0.1}, {0.3, 0.15}, {0.5, 1.0, 2.0}, cfg);
    for (std::size_t i = 0; i < same.tv.size(); ++i) CHECK(same.tv[i] <= 3 * same.bias_floor[i]);
    const auto far = tv_decay(z, {0.3, 0.1}, {0.3, 0.6}, {0.5, 1.0, 2.0}, cfg);
    for (double d : far.tv) CHECK(d > 0.95);

    const auto mix = tv_decay(SimVelocity::periodic(VelocityField::cosine()), {0.25, 0.0}, {0.75, 0.5},
                              {0.25, 0.5, 1.0, 1.5}, cfg);
    CHECK(mix.tv.front() > mix.tv.back());
  }

  TEST_CASE("arcsine law") {
    CHECK(arcsine_cdf(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(arcsine_cdf(0.0) == 0.0);
    CHECK(arcsine_cdf(1.0) == doctest::Approx(1.0));
    auto cfg = cfg_of(1e-3, 20000, 1.0, 8);
    const auto r = arcsine_experiment(cfg);
    CHECK(r.n == 20000);
    CHECK(r.ks < 0.04);
  }

  TEST_CASE("Clopper-Pearson") {
    const auto a = clopper_pearson(5, 10, 0.95);
    CHECK(a.first == doctest::Approx(0.187086).epsilon(1e-5));
    CHECK(a.second == doctest::Approx(0.812914).epsilon(1e-5));
    const auto z = clopper_pearson(0, 20, 0.95);
    CHECK(z.first == 0.0);
    CHECK(z.second == doctest::Approx(1 - std::pow(0.025, 1.0 / 20)).epsilon(1e-10));
    CHECK(clopper_pearson(20, 20, 0.95).second == 1.0);
  }

  TEST_CASE("results do not depend on the worker count") {
    const auto before = parallel::workers();
    const auto cfg = cfg_of(0.01, 9000, 0.3, 8, 99);
    const auto v = SimVelocity::periodic(VelocityField::cosine());
    parallel::set_workers(1);
    const auto a = simulate(0.1, 0.2, v, cfg);
    const auto ea = simulate_endpoints(0.1, 0.2, v, cfg);
    parallel::set_workers(3);
    const auto b = simulate(0.1, 0.2, v, cfg);
    const auto eb = simulate_endpoints(0.1, 0.2, v, cfg);
    parallel::set_workers(before);
    CHECK(a.counts == b.counts);
    CHECK(ea.x == eb.x);
    CHECK(ea.y == eb.y);
    // distinct streams give distinct ensembles
    auto other = cfg;
    other.stream = 1;
    CHECK(simulate(0.1, 0.2, v, other).counts != a.counts);
  }

  TEST_CASE("Kolmogorov experiment at reduced size") {
    auto cfg = cfg_of(1e-2, 100000, 1.0, 12);
    cfg.geometry = Geometry::plane;
    cfg.y_integrator = YIntegrator::trapezoid;
    const auto r = kolmogorov_experiment(cfg);
    CHECK(r.var_x == doctest::Approx(2.0).epsilon(0.03));
    CHECK(r.var_y == doctest::Approx(2.0 / 3).epsilon(0.05));
    CHECK(r.max_rel_error < 0.15);
  }
}
