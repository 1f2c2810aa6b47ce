// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mixrate/error.hpp"
#include "mixrate/kernels.hpp"
#include "mixrate/parallel.hpp"
#include "mixrate/rng.hpp"

namespace mixrate::mc {
namespace {

constexpr std::size_t kBlock = 4096;
constexpr std::int32_t kKilled = -1;
constexpr std::int32_t kOverflow = -2;

double wrap_unit(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

void validate(const PathConfig& cfg) {
  require(cfg.dt > 0 && std::isfinite(cfg.dt), ErrorCode::invalid_argument, "mc: dt must be positive");
  require(cfg.n_paths >= 1, ErrorCode::invalid_argument, "mc: n_paths must be at least 1");
  require(cfg.n_paths < (std::size_t{1} << 62), ErrorCode::invalid_argument, "mc: too many paths");
  require(cfg.cells >= 1, ErrorCode::invalid_argument, "mc: cells must be at least 1");
  if (cfg.geometry == Geometry::plane)
    require(cfg.box.x_hi > cfg.box.x_lo && cfg.box.y_hi > cfg.box.y_lo, ErrorCode::invalid_argument,
            "mc: plane box must be nonempty");
}

// Runs every path to the largest time and calls sink(path, snapshot, x, y,
// alive) at each snapshot. Paths own their random streams, so the output
// does not depend on how blocks are scheduled.
template <class Sink>
void run_paths(double x0, double y0, const SimVelocity& v, const PathConfig& cfg,
               const std::vector<double>& times, Sink&& sink) {
  validate(cfg);
  require(!times.empty() && std::is_sorted(times.begin(), times.end()) && times.front() >= 0,
          ErrorCode::invalid_argument, "mc: snapshot times must be sorted and nonnegative");
  if (cfg.geometry == Geometry::torus)
    require(x0 >= 0 && x0 < 1 && y0 >= 0 && y0 < 1, ErrorCode::domain,
            "mc: torus start must lie in [0, 1)^2");
  if (cfg.kill_outside)
    require(cfg.kill_outside->contains(x0), ErrorCode::domain, "mc: start outside the killing interval");

  const rng::Key key = rng::key_from_seed(cfg.seed);
  const bool torus = cfg.geometry == Geometry::torus;
  const bool trap = cfg.y_integrator == YIntegrator::trapezoid;
  const std::size_t n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;

  parallel::for_each_index(n_blocks, [&](std::size_t b) {
    const std::size_t p_end = std::min(cfg.n_paths, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < p_end; ++p) {
      const auto plo = static_cast<std::uint32_t>(p);
      const auto phi = static_cast<std::uint32_t>(p >> 32);
      double x = x0, y = y0, t = 0.0;
      double vx = v.f(x);
      bool alive = true;
      std::uint64_t step = 0;
      std::pair<double, double> pair{0.0, 0.0};
      for (std::size_t s = 0; s < times.size(); ++s) {
        const double target = times[s];
        while (alive && t < target) {
          const double h = std::min(cfg.dt, target - t);
          if (h <= 1e-15 * std::max(1.0, target)) {
            t = target;
            break;
          }
          if ((step & 1u) == 0)
            pair = rng::normal_pair({static_cast<std::uint32_t>(step >> 1), plo, phi, cfg.stream}, key);
          const double z = (step & 1u) == 0 ? pair.first : pair.second;
          ++step;
          double xn = x + std::sqrt(2.0 * h) * z;
          if (cfg.kill_outside && !cfg.kill_outside->contains(xn)) {
            alive = false;
            break;
          }
          if (torus) xn = wrap_unit(xn);
          const double vn = v.f(xn);
          y += trap ? 0.5 * h * (vx + vn) : h * vx;
          x = xn;
          vx = vn;
          t += h;
        }
        sink(p, s, x, y, alive);
      }
    }
  });
}

std::int32_t cell_of(const PathConfig& cfg, double x, double y) {
  const auto m = static_cast<double>(cfg.cells);
  const auto last = static_cast<std::int32_t>(cfg.cells - 1);
  if (cfg.geometry == Geometry::torus) {
    const auto r = std::min(last, static_cast<std::int32_t>(wrap_unit(x) * m));
    const auto c = std::min(last, static_cast<std::int32_t>(wrap_unit(y) * m));
    return r * static_cast<std::int32_t>(cfg.cells) + c;
  }
  const PlaneBox& bx = cfg.box;
  if (!(x >= bx.x_lo && x < bx.x_hi && y >= bx.y_lo && y < bx.y_hi)) return kOverflow;
  const auto r = std::min(last, static_cast<std::int32_t>((x - bx.x_lo) / (bx.x_hi - bx.x_lo) * m));
  const auto c = std::min(last, static_cast<std::int32_t>((y - bx.y_lo) / (bx.y_hi - bx.y_lo) * m));
  return r * static_cast<std::int32_t>(cfg.cells) + c;
}

}  // namespace

const char* to_string(YIntegrator y) {
  return y == YIntegrator::left_endpoint ? "left_endpoint" : "trapezoid";
}
const char* to_string(Geometry g) { return g == Geometry::torus ? "torus" : "plane"; }

SimVelocity SimVelocity::periodic(const VelocityField& v) {
  return {[v](double x) { return v.eval_periodic(x); }, v.kind_name()};
}
SimVelocity SimVelocity::linear() { return {[](double x) { return x; }, "linear"}; }
SimVelocity SimVelocity::positive_indicator() {
  return {[](double x) { return x > 0.0 ? 1.0 : 0.0; }, "positive_indicator"};
}
SimVelocity SimVelocity::zero() { return {[](double) { return 0.0; }, "zero"}; }

std::uint64_t TransitionHistogram::total() const {
  std::uint64_t s = killed + overflow;
  for (auto c : counts) s += c;
  return s;
}

double TransitionHistogram::alpha_hat() const {
  if (counts.empty() || n_paths == 0) return 0.0;
  const auto mn = *std::min_element(counts.begin(), counts.end());
  return static_cast<double>(M * M) * static_cast<double>(mn) / static_cast<double>(n_paths);
}

std::string TransitionHistogram::to_csv() const {
  std::ostringstream os;
  os << "row,col,count\n";
  for (std::size_t r = 0; r < M; ++r)
    for (std::size_t c = 0; c < M; ++c) os << r << ',' << c << ',' << count(r, c) << '\n';
  return os.str();
}

std::vector<TransitionHistogram> simulate_snapshots(double x0, double y0, const SimVelocity& v,
                                                    const PathConfig& cfg,
                                                    const std::vector<double>& times) {
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<std::int32_t>> cell(sorted.size(), std::vector<std::int32_t>(cfg.n_paths));
  run_paths(x0, y0, v, cfg, sorted, [&](std::size_t p, std::size_t s, double x, double y, bool alive) {
    cell[s][p] = alive ? cell_of(cfg, x, y) : kKilled;
  });
  std::vector<TransitionHistogram> out;
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    TransitionHistogram h;
    h.M = cfg.cells;
    h.counts.assign(cfg.cells * cfg.cells, 0);
    h.n_paths = cfg.n_paths;
    h.x0 = x0;
    h.y0 = y0;
    h.t = sorted[s];
    for (auto c : cell[s]) {
      if (c == kKilled) ++h.killed;
      else if (c == kOverflow) ++h.overflow;
      else ++h.counts[static_cast<std::size_t>(c)];
    }
    out.push_back(std::move(h));
  }
  return out;
}

TransitionHistogram simulate(double x0, double y0, const SimVelocity& v, const PathConfig& cfg) {
  return simulate_snapshots(x0, y0, v, cfg, {cfg.t_end}).front();
}

PathEndpoints simulate_endpoints(double x0, double y0, const SimVelocity& v, const PathConfig& cfg) {
  PathEndpoints e;
  e.x.resize(cfg.n_paths);
  e.y.resize(cfg.n_paths);
  run_paths(x0, y0, v, cfg, {cfg.t_end}, [&](std::size_t p, std::size_t, double x, double y, bool alive) {
    e.x[p] = alive ? x : std::numeric_limits<double>::quiet_NaN();
    e.y[p] = alive ? y : std::numeric_limits<double>::quiet_NaN();
  });
  return e;
}

std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence) {
  require(n > 0 && k <= n, ErrorCode::invalid_argument, "clopper_pearson: need 0 <= k <= n, n > 0");
  require(confidence > 0 && confidence < 1, ErrorCode::invalid_argument,
          "clopper_pearson: confidence must lie in (0, 1)");
  using boost::math::binomial_distribution;
  const double a = 1.0 - confidence;
  const auto nd = static_cast<double>(n), kd = static_cast<double>(k);
  const double lo = k == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(nd, kd, a / 2);
  const double hi = k == n ? 1.0 : binomial_distribution<>::find_upper_bound_on_p(nd, kd, a / 2);
  return {lo, hi};
}

DoeblinEstimate doeblin_from_histograms(const std::vector<TransitionHistogram>& hists,
                                        double confidence) {
  require(!hists.empty(), ErrorCode::invalid_argument, "doeblin: need at least one histogram");
  using boost::math::binomial_distribution;
  const double a = 1.0 - confidence;
  DoeblinEstimate est;
  est.alpha_hat = std::numeric_limits<double>::infinity();
  est.alpha_lower = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < hists.size(); ++s) {
    const auto& h = hists[s];
    const double m2 = static_cast<double>(h.M * h.M);
    const auto nd = static_cast<double>(h.n_paths);
    for (std::size_t c = 0; c < h.counts.size(); ++c) {
      const std::uint64_t k = h.counts[c];
      if (k == 0 && !est.empty_cell) {
        est.empty_cell = c;
        est.empty_start = s;
      }
      const double ahat = m2 * static_cast<double>(k) / nd;
      if (ahat < est.alpha_hat) {
        est.alpha_hat = ahat;
        est.argmin_start = s;
        est.argmin_cell = c;
        const double up =
            k == h.n_paths ? 1.0
                           : binomial_distribution<>::find_upper_bound_on_p(nd, static_cast<double>(k), a);
        est.alpha_upper = m2 * up;
      }
      const double lo =
          k == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(nd, static_cast<double>(k), a);
      est.alpha_lower = std::min(est.alpha_lower, m2 * lo);
    }
  }
  return est;
}

DoeblinRun doeblin_estimate(const SimVelocity& v, const std::vector<double>& t_stars,
                            const std::vector<std::pair<double, double>>& starts,
                            const PathConfig& cfg) {
  require(!starts.empty(), ErrorCode::invalid_argument, "doeblin_estimate: starts must be nonempty");
  DoeblinRun run;
  run.times = t_stars;
  std::sort(run.times.begin(), run.times.end());
  run.histograms.assign(run.times.size(), {});
  for (std::size_t s = 0; s < starts.size(); ++s) {
    PathConfig c = cfg;
    c.stream = cfg.stream + static_cast<std::uint32_t>(s);
    auto hs = simulate_snapshots(starts[s].first, starts[s].second, v, c, run.times);
    for (std::size_t i = 0; i < hs.size(); ++i) run.histograms[i].push_back(std::move(hs[i]));
  }
  for (const auto& hs : run.histograms) run.estimates.push_back(doeblin_from_histograms(hs));
  return run;
}

double tv_distance(const TransitionHistogram& a, const TransitionHistogram& b) {
  require(a.M == b.M, ErrorCode::invalid_argument, "tv_distance: histogram sizes differ");
  double s = 0.0;
  for (std::size_t c = 0; c < a.counts.size(); ++c)
    s += std::abs(static_cast<double>(a.counts[c]) / static_cast<double>(a.n_paths) -
                  static_cast<double>(b.counts[c]) / static_cast<double>(b.n_paths));
  return 0.5 * s;
}

TvDecay tv_decay(const SimVelocity& v, std::pair<double, double> start1,
                 std::pair<double, double> start2, const std::vector<double>& times,
                 const PathConfig& cfg) {
  PathConfig c1 = cfg, c2 = cfg;
  c2.stream = cfg.stream + 1;
  const auto h1 = simulate_snapshots(start1.first, start1.second, v, c1, times);
  const auto h2 = simulate_snapshots(start2.first, start2.second, v, c2, times);
  TvDecay out;
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    out.times.push_back(h1[i].t);
    const double tv = tv_distance(h1[i], h2[i]);
    out.tv.push_back(tv);
    double floor = 0.0;
    const auto n = static_cast<double>(cfg.n_paths);
    for (std::size_t c = 0; c < h1[i].counts.size(); ++c) {
      const double p = 0.5 * static_cast<double>(h1[i].counts[c] + h2[i].counts[c]) / n;
      floor += std::sqrt(p * (1.0 - p) / (std::numbers::pi * n));
    }
    out.bias_floor.push_back(floor);
    // Only points clearly above the noise floor carry slope information.
    if (tv > 2.0 * floor) {
      ts.push_back(h1[i].t);
      ls.push_back(std::log(tv - floor));
    }
  }
  out.fit_points = ts.size();
  if (ts.size() >= 2) {
    double mt = 0, ml = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i];
      ml += ls[i];
    }
    mt /= static_cast<double>(ts.size());
    ml /= static_cast<double>(ts.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sxy += (ts[i] - mt) * (ls[i] - ml);
      sxx += (ts[i] - mt) * (ts[i] - mt);
    }
    out.slope = sxy / sxx;
  } else {
    out.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double arcsine_cdf(double a) {
  if (a <= 0) return 0.0;
  if (a >= 1) return 1.0;
  return 2.0 / std::numbers::pi * std::asin(std::sqrt(a));
}

ArcsineResult arcsine_experiment(const PathConfig& cfg) {
  PathConfig c = cfg;
  c.geometry = Geometry::plane;
  c.box = {-1e300, 1e300, -1e300, 1e300};
  const PathEndpoints e = simulate_endpoints(0.0, 0.0, SimVelocity::positive_indicator(), c);
  std::vector<double> z(e.y.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = e.y[i] / c.t_end;
  std::sort(z.begin(), z.end());
  const auto n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = arcsine_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, z.size()};
}

double chi_square_p(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs) {
  require(counts.size() == probs.size() && counts.size() >= 2, ErrorCode::invalid_argument,
          "chi_square_p: size mismatch");
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  double stat = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    if (e <= 0) continue;
    const double d = static_cast<double>(counts[i]) - e;
    stat += d * d / e;
    ++used;
  }
  if (used < 2) return 1.0;
  boost::math::chi_squared_distribution<> dist(static_cast<double>(used - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

KolmogorovResult kolmogorov_experiment(const PathConfig& cfg) {
  PathConfig c = cfg;
  c.geometry = Geometry::plane;
  const double t = c.t_end;
  const double sx = std::sqrt(2.0 * t), sy = std::sqrt(2.0 * t * t * t / 3.0);
  c.box = {-4 * sx, 4 * sx, -4 * sy, 4 * sy};
  const PathEndpoints e = simulate_endpoints(0.0, 0.0, SimVelocity::linear(), c);

  KolmogorovResult r;
  TransitionHistogram& h = r.hist;
  h.M = c.cells;
  h.counts.assign(c.cells * c.cells, 0);
  h.n_paths = c.n_paths;
  h.t = t;
  const auto n = static_cast<double>(c.n_paths);
  std::vector<std::uint64_t> xbins(c.cells + 1, 0);  // last bin: outside the box in x
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    r.mean_x += e.x[i];
    r.mean_y += e.y[i];
    const std::int32_t cell = cell_of(c, e.x[i], e.y[i]);
    if (cell == kOverflow) ++h.overflow;
    else ++h.counts[static_cast<std::size_t>(cell)];
    const double u = (e.x[i] - c.box.x_lo) / (c.box.x_hi - c.box.x_lo);
    if (u >= 0 && u < 1) ++xbins[std::min(c.cells - 1, static_cast<std::size_t>(u * static_cast<double>(c.cells)))];
    else ++xbins[c.cells];
  }
  r.mean_x /= n;
  r.mean_y /= n;
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    r.var_x += (e.x[i] - r.mean_x) * (e.x[i] - r.mean_x);
    r.var_y += (e.y[i] - r.mean_y) * (e.y[i] - r.mean_y);
  }
  r.var_x /= n - 1;
  r.var_y /= n - 1;

  // X_t ~ N(0, 2t) exactly.
  boost::math::normal_distribution<> gx(0.0, sx);
  std::vector<double> px(c.cells + 1);
  const double wx = (c.box.x_hi - c.box.x_lo) / static_cast<double>(c.cells);
  double inside = 0.0;
  for (std::size_t i = 0; i < c.cells; ++i) {
    const double a = c.box.x_lo + static_cast<double>(i) * wx;
    px[i] = boost::math::cdf(gx, a + wx) - boost::math::cdf(gx, a);
    inside += px[i];
  }
  px[c.cells] = 1.0 - inside;
  r.x_marginal_chi2_p = chi_square_p(xbins, px);

  // Cell-averaged kernel by 8x8 Gauss-Legendre.
  static constexpr double gn[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                   0.9602898564975363};
  static constexpr double gw[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                   0.1012285362903763};
  std::vector<double> node, weight;
  for (int i = 0; i < 4; ++i) {
    node.push_back(-gn[i]);
    weight.push_back(gw[i]);
    node.push_back(gn[i]);
    weight.push_back(gw[i]);
  }
  const double wy = (c.box.y_hi - c.box.y_lo) / static_cast<double>(c.cells);
  for (std::size_t i = 0; i < c.cells; ++i) {
    for (std::size_t j = 0; j < c.cells; ++j) {
      const double cx = c.box.x_lo + (static_cast<double>(i) + 0.5) * wx;
      const double cy = c.box.y_lo + (static_cast<double>(j) + 0.5) * wy;
      double p = 0.0;
      for (std::size_t a = 0; a < node.size(); ++a)
        for (std::size_t b = 0; b < node.size(); ++b)
          p += weight[a] * weight[b] *
               kernels::kolmogorov_kernel({0, 0, cx + 0.5 * wx * node[a], cy + 0.5 * wy * node[b], t});
      p *= 0.25 * wx * wy;
      if (p < 0.01) continue;
      const double emp = static_cast<double>(h.count(i, j)) / n;
      r.max_rel_error = std::max(r.max_rel_error, std::abs(emp - p) / p);
      ++r.cells_compared;
    }
  }
  return r;
}

nlohmann::json histogram_metadata(const TransitionHistogram& h, const PathConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["stream"] = cfg.stream;
  j["dt"] = cfg.dt;
  j["t"] = h.t;
  j["M"] = h.M;
  j["start"] = {h.x0, h.y0};
  j["n_paths"] = h.n_paths;
  j["killed"] = h.killed;
  j["overflow"] = h.overflow;
  j["y_integrator"] = to_string(cfg.y_integrator);
  j["geometry"] = to_string(cfg.geometry);
  if (cfg.geometry == Geometry::plane)
    j["box"] = {cfg.box.x_lo, cfg.box.x_hi, cfg.box.y_lo, cfg.box.y_hi};
  if (cfg.kill_outside) j["kill_outside"] = {cfg.kill_outside->lo, cfg.kill_outside->hi};
  return j;
}

}  // namespace mixrate::mc
