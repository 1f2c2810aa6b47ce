// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixrate/velocity.hpp"

namespace mixrate::mc {

enum class YIntegrator { left_endpoint, trapezoid };
enum class Geometry { torus, plane };

const char* to_string(YIntegrator y);
const char* to_string(Geometry g);

// Velocity as seen by the simulator: a plain function of the (possibly
// unwrapped) x coordinate.
struct SimVelocity {
  std::function<double(double)> f;
  std::string name;

  static SimVelocity periodic(const VelocityField& v);  // V(x mod 1)
  static SimVelocity linear();                           // V(x) = x on the plane
  static SimVelocity positive_indicator();               // 1 if x > 0 else 0
  static SimVelocity zero();
};

struct PlaneBox {
  double x_lo = -1.0, x_hi = 1.0, y_lo = -1.0, y_hi = 1.0;
};

struct PathConfig {
  double dt = 1e-3;
  std::size_t n_paths = 10000;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  std::uint32_t stream = 0;  // independent ensembles share a seed via distinct streams
  YIntegrator y_integrator = YIntegrator::left_endpoint;
  Geometry geometry = Geometry::torus;
  std::size_t cells = 8;  // M, cells per axis
  PlaneBox box;           // plane histograms only
  std::optional<Interval> kill_outside;  // absorb paths whose X leaves this interval
};

struct TransitionHistogram {
  std::size_t M = 0;
  std::vector<std::uint64_t> counts;  // row-major, row = x cell, col = y cell
  std::uint64_t n_paths = 0;
  std::uint64_t killed = 0;
  std::uint64_t overflow = 0;  // plane paths outside the box
  double x0 = 0.0, y0 = 0.0, t = 0.0;

  std::uint64_t count(std::size_t row, std::size_t col) const { return counts[row * M + col]; }
  std::uint64_t total() const;
  // M^2 * min count / n_paths
  double alpha_hat() const;
  std::string to_csv() const;
};

// Simulates cfg.n_paths paths from `start` and returns one histogram per
// snapshot time (sorted ascending, each <= cfg.t_end is not required; the
// run extends to the largest snapshot). Bit-identical for any worker count.
std::vector<TransitionHistogram> simulate_snapshots(double x0, double y0, const SimVelocity& v,
                                                    const PathConfig& cfg,
                                                    const std::vector<double>& times);
TransitionHistogram simulate(double x0, double y0, const SimVelocity& v, const PathConfig& cfg);

// Final (X, Y) of every path at time cfg.t_end, unwrapped. Killed paths get NaN.
struct PathEndpoints {
  std::vector<double> x, y;
};
PathEndpoints simulate_endpoints(double x0, double y0, const SimVelocity& v, const PathConfig& cfg);

// Exact two-sided Clopper-Pearson interval for k successes in n trials.
std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence);

struct DoeblinEstimate {
  double alpha_hat = 0.0;
  double alpha_lower = 0.0;  // min over cells/starts of M^2 * one-sided lower bound
  double alpha_upper = 0.0;  // M^2 * upper bound for the minimizing cell
  std::size_t argmin_start = 0;
  std::size_t argmin_cell = 0;
  std::optional<std::size_t> empty_cell;  // first empty cell, if any
  std::optional<std::size_t> empty_start;
};

DoeblinEstimate doeblin_from_histograms(const std::vector<TransitionHistogram>& hists,
                                        double confidence = 0.99);

struct DoeblinRun {
  std::vector<double> times;
  std::vector<DoeblinEstimate> estimates;  // one per time
  std::vector<std::vector<TransitionHistogram>> histograms;  // [time][start]
};

DoeblinRun doeblin_estimate(const SimVelocity& v, const std::vector<double>& t_stars,
                            const std::vector<std::pair<double, double>>& starts,
                            const PathConfig& cfg);

struct TvDecay {
  std::vector<double> times;
  std::vector<double> tv;
  std::vector<double> bias_floor;  // expected TV of two samples of the pooled law
  double slope = 0.0;              // fitted d log(tv - floor) / dt
  std::size_t fit_points = 0;
};

// Independent ensembles: start1 uses stream cfg.stream, start2 uses cfg.stream + 1.
TvDecay tv_decay(const SimVelocity& v, std::pair<double, double> start1,
                 std::pair<double, double> start2, const std::vector<double>& times,
                 const PathConfig& cfg);
double tv_distance(const TransitionHistogram& a, const TransitionHistogram& b);

double arcsine_cdf(double a);
struct ArcsineResult {
  double ks = 0.0;
  std::size_t n = 0;
};
ArcsineResult arcsine_experiment(const PathConfig& cfg);

struct KolmogorovResult {
  double max_rel_error = 0.0;  // over cells with >= 1% of the mass
  std::size_t cells_compared = 0;
  double mean_y = 0.0, var_y = 0.0, mean_x = 0.0, var_x = 0.0;
  double x_marginal_chi2_p = 0.0;
  TransitionHistogram hist;
};
// Plane, V(x) = x, start at the origin; box is +-4 standard deviations.
KolmogorovResult kolmogorov_experiment(const PathConfig& cfg);

// Chi-square goodness of fit p-value of counts against probabilities.
double chi_square_p(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs);

nlohmann::json histogram_metadata(const TransitionHistogram& h, const PathConfig& cfg);

}  // namespace mixrate::mc
