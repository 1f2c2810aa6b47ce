// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixrate/error.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kFineCells = 16384;

// Bisection for an increasing f on [0, hi) with f(0) = 0.
double invert_increasing(double y, double hi, double (*f)(double)) {
  require(y >= 0.0 && !std::isnan(y), ErrorCode::invalid_argument,
          "inverse: argument must be nonnegative");
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return hi;
  double lo = 0.0, up = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + up);
    if (f(mid) < y) lo = mid;
    else up = mid;
    if (up - lo <= 1e-12 * up) break;
  }
  return 0.5 * (lo + up);
}

}  // namespace

// ---------------------------------------------------------------------------
// omega2

Omega2Lp omega2_lp_data(const Omega2Problem& p, std::size_t grid_n) {
  require(grid_n >= 2, ErrorCode::invalid_argument, "omega2: grid_n must be at least 2");
  const Interval dom = p.v.domain();
  require(dom.contains(p.interval) && p.interval.length() > 0, ErrorCode::domain,
          "omega2: interval must lie inside the velocity domain");
  const Interval I = p.interval;
  const double len = I.length();
  const bool wrap = p.boundary == Boundary::periodic;
  const std::size_t n_nodes = wrap ? grid_n : grid_n + 1;
  const std::size_t r = (kFineCells + grid_n - 1) / grid_n;
  const std::size_t q_total = r * grid_n;
  const double h = len / static_cast<double>(grid_n);

  Omega2Lp lp;
  lp.wrap = wrap;
  lp.delta = 2.0 * kPi / len * h;
  lp.nodes.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) lp.nodes[i] = I.lo + static_cast<double>(i) * h;
  lp.c.assign(n_nodes, 0.0);
  lp.d.assign(n_nodes, 0.0);

  const double wq = len / static_cast<double>(q_total);
  for (std::size_t q = 0; q < q_total; ++q) {
    const std::size_t cell = q / r;
    const double t = (static_cast<double>(q % r) + 0.5) / static_cast<double>(r);
    const double x = I.lo + (static_cast<double>(q) + 0.5) * wq;
    const double e = ground_state(p.boundary, I, x);
    const double w = wq * e * e;
    const double vx = p.v.eval(x);
    const std::size_t right = (wrap && cell + 1 == grid_n) ? 0 : cell + 1;
    lp.c[cell] += w * vx * (1.0 - t);
    lp.d[cell] += w * (1.0 - t);
    lp.c[right] += w * vx * t;
    lp.d[right] += w * t;
  }
  return lp;
}

Omega2Result omega2_solve(const Omega2Problem& problem, std::size_t grid_n) {
  require(grid_n >= 16, ErrorCode::invalid_argument, "omega2: grid_n must be at least 16");
  return omega2_solve_lp(omega2_lp_data(problem, grid_n));
}

Omega2Result omega2_solve_lp(const Omega2Lp& data) {
  const std::size_t n = data.nodes.size();

  // Variables x = phi + 1 in [0, 2].
  lp::Problem lp;
  lp.c = data.c;
  lp.upper.assign(n, 2.0);
  auto lipschitz = [&](std::size_t i, std::size_t j) {
    std::vector<double> row(n, 0.0);
    row[i] = 1.0;
    row[j] = -1.0;
    lp.a_le.push_back(row);
    lp.b_le.push_back(data.delta);
    row[i] = -1.0;
    row[j] = 1.0;
    lp.a_le.push_back(std::move(row));
    lp.b_le.push_back(data.delta);
  };
  for (std::size_t i = 0; i + 1 < n; ++i) lipschitz(i, i + 1);
  if (data.wrap) lipschitz(n - 1, 0);
  double dsum = 0.0, csum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dsum += data.d[i];
    csum += data.c[i];
  }
  lp.a_eq.push_back(data.d);
  lp.b_eq.push_back(dsum);

  const lp::Result res = lp::solve(lp);
  if (res.status != lp::Status::optimal)
    fail(ErrorCode::numeric, "omega2: LP solver did not reach an optimum");

  Omega2Result out;
  out.nodes = data.nodes;
  out.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.phi[i] = res.x[i] - 1.0;
  out.value = std::max(0.0, res.objective - csum);
  out.iterations = res.iterations;
  return out;
}

double omega2(const Omega2Problem& problem, std::size_t grid_n) {
  return omega2_solve(problem, grid_n).value;
}

// ---------------------------------------------------------------------------
// omega1

double omega1(const VelocityField& v, Interval i, double eps, std::size_t j_grid) {
  require(v.domain().contains(i) && i.length() > 0, ErrorCode::domain,
          "omega1: I must be a subinterval of the domain");
  require(eps > 0 && eps <= 0.5 * i.length() * (1 + 1e-12), ErrorCode::invalid_argument,
          "omega1: eps must lie in (0, |I|/2]");
  require(j_grid >= 2, ErrorCode::invalid_argument, "omega1: j_grid must be >= 2");
  const double step = i.length() / static_cast<double>(j_grid);
  const auto span = std::min<std::size_t>(
      j_grid, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2 * eps / step - 1e-9))));
  // Residuals grow under inclusion, so only the shortest windows matter.
  const std::size_t count = j_grid - span + 1;
  std::vector<double> res(count);
  parallel::for_each_index(count, [&](std::size_t a) {
    const double lo = i.lo + static_cast<double>(a) * step;
    const double hi = a + span == j_grid ? i.hi : i.lo + static_cast<double>(a + span) * step;
    res[a] = affine_residual(v, {lo, hi});
  });
  return *std::min_element(res.begin(), res.end());
}

// ---------------------------------------------------------------------------
// Scalar formulas

double phi_small(double s) { return 36.0 * s * std::tan(s); }
double phi_small_inverse(double y) { return invert_increasing(y, kPi / 2, phi_small); }
double phi_wei(double s) { return 144.0 * s * std::tan(2.0 * s); }
double phi_wei_inverse(double y) { return invert_increasing(y, kPi / 4, phi_wei); }

double rho_V(double omega2, double osc) {
  require(omega2 >= 0 && osc >= 0, ErrorCode::invalid_argument, "rho_V: inputs must be nonnegative");
  const double r = omega2 / (2.0 * kPi * (1.0 + osc));
  return r * r;
}

double rho_wei(double omega1_full) {
  const double s = phi_wei_inverse(omega1_full);
  return s * s;
}

double prop31_bound(double omega2, double osc, double interval_len, bool periodic_improved) {
  require(omega2 >= 0 && osc >= 0 && interval_len > 0, ErrorCode::invalid_argument,
          "prop31_bound: inputs must be nonnegative with |I| > 0");
  if (periodic_improved && interval_len == 1.0) return rho_V(omega2, osc);
  const double l2 = interval_len * interval_len;
  return omega2 * omega2 / 18.0 / (kPi * kPi / l2 + l2 * osc * osc / (kPi * kPi));
}

double prop32_bound(double omega1_eps, double eps, double lambda1) {
  require(eps > 0 && omega1_eps >= 0, ErrorCode::invalid_argument,
          "prop32_bound: eps > 0 and omega1 >= 0 required");
  const double s = phi_small_inverse(eps * omega1_eps);
  return std::max(0.0, s * s / (eps * eps) - lambda1);
}

Thm12Constants thm12_constants(double ell, double dv) {
  require(ell > 0 && ell <= 0.5, ErrorCode::domain, "thm12: ell must lie in (0, 1/2]");
  require(dv > 0, ErrorCode::domain, "thm12: plateau values must differ");
  Thm12Constants out;
  out.t_P = 1.0 / dv + (3.0 + 2.0 * ell * ell) / 8.0;
  out.log_alpha_P = -1.5 * std::log(8.0 * kPi * std::numbers::e) - kPi * kPi / 4.0 +
                    2.0 * std::log(ell) - kPi * kPi / (ell * ell * dv);
  out.alpha_P = std::exp(out.log_alpha_P);
  return out;
}

Thm13Constants thm13_constants(double interval_len, double osc, double omega2_dirichlet, double K) {
  require(interval_len > 0 && interval_len <= 1, ErrorCode::domain, "thm13: |I| must lie in (0, 1]");
  require(osc >= 0, ErrorCode::invalid_argument, "thm13: osc must be nonnegative");
  require(K >= 1, ErrorCode::domain, "thm13: K must be at least 1");
  if (!(omega2_dirichlet > 0))
    fail(ErrorCode::undefined_bound, "thm13: omega2 vanishes, the bound is undefined");
  Thm13Constants out;
  const double l2 = interval_len * interval_len;
  out.beta = 1.0 + 2.0 * kPi * osc * l2;
  const double f = 10.0 * out.beta / (interval_len * omega2_dirichlet);
  out.t_H = f * f * (1.0 + std::log(out.beta) + K / l2);
  out.log_alpha_H = std::log(interval_len / 3.0) - kPi * kPi / l2 * out.t_H;
  out.alpha_H = std::exp(out.log_alpha_H);
  return out;
}

DoeblinConstants doeblin_constants(double t_star, double alpha_star) {
  require(t_star > 0, ErrorCode::domain, "doeblin: t_star must be positive");
  require(alpha_star > 0 && alpha_star < 1, ErrorCode::domain, "doeblin: alpha must lie in (0, 1)");
  return doeblin_constants_log(t_star, std::log(alpha_star));
}

DoeblinConstants doeblin_constants_log(double t_star, double log_alpha) {
  require(t_star > 0, ErrorCode::domain, "doeblin: t_star must be positive");
  require(log_alpha < 0 && std::isfinite(log_alpha), ErrorCode::domain,
          "doeblin: alpha must lie in (0, 1)");
  DoeblinConstants out;
  const double alpha = std::exp(log_alpha);
  out.C = 1.0 / (1.0 - alpha);
  // log C = -log(1 - alpha); for tiny alpha this is alpha to first order.
  const double log_c = -std::log1p(-alpha);
  out.C_minus_one = alpha / (1.0 - alpha);
  out.rho = log_c / t_star;
  out.log_rho = alpha > 1e-8 ? std::log(log_c) - std::log(t_star) : log_alpha - std::log(t_star);
  return out;
}

DoeblinCheck doeblin_iterate(const Eigen::MatrixXd& kernel, std::size_t t_star_steps,
                             double alpha_star, std::size_t horizon) {
  require(kernel.rows() == kernel.cols() && kernel.rows() > 0, ErrorCode::invalid_argument,
          "doeblin_iterate: kernel must be square");
  require(t_star_steps >= 1, ErrorCode::invalid_argument, "doeblin_iterate: t_star_steps >= 1");
  const auto n = static_cast<std::size_t>(kernel.rows());
  const double nd = static_cast<double>(n);
  DoeblinCheck out;
  auto reject = [&](std::string msg, std::size_t i, std::size_t j) {
    out.precondition_ok = false;
    out.precondition_message = std::move(msg);
    out.failing_entry = std::make_pair(i, j);
    return out;
  };
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (kernel(i, j) < 0) return reject("negative entry", i, j);
    if (std::abs(kernel.row(i).sum() - 1.0) > 1e-10) return reject("row does not sum to 1", i, 0);
    if (std::abs(kernel.col(i).sum() - 1.0) > 1e-10)
      return reject("column does not sum to 1 (uniform is not invariant)", 0, i);
  }
  if (!(alpha_star > 0 && alpha_star < 1)) return reject("alpha_star outside (0, 1)", 0, 0);

  Eigen::MatrixXd pt = Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols());
  for (std::size_t s = 0; s < t_star_steps; ++s) pt = pt * kernel;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pt(i, j) < alpha_star / nd - tol)
        return reject("kernel^t_star entry below alpha_star / N", i, j);

  const DoeblinConstants dc = doeblin_constants(static_cast<double>(t_star_steps), alpha_star);
  out.C = dc.C;
  out.rho = dc.rho;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols());
  for (std::size_t step = 0; step <= horizon; ++step) {
    if (step > 0) p = p * kernel;
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row_tv = 0.0;
      for (std::size_t j = 0; j < n; ++j) row_tv += std::abs(p(i, j) - 1.0 / nd);
      tv = std::max(tv, 0.5 * row_tv);
    }
    const double env = dc.C * std::exp(-dc.rho * static_cast<double>(step));
    const double min_entry = nd * p.minCoeff();
    out.tv.push_back(tv);
    out.envelope.push_back(env);
    out.min_entry.push_back(min_entry);
    if (!out.first_violation && min_entry < 1.0 - env - 1e-12) out.first_violation = step;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounds report

BoundsReport compute_bounds(const VelocityField& v, const BoundsOptions& opt) {
  BoundsReport r;
  const Interval dom = v.domain();
  const bool torus = v.domain_kind() == DomainKind::torus;
  const Boundary bc = torus ? Boundary::periodic : Boundary::dirichlet;

  r.osc = v.osc();
  r.provenance["osc"] = "exact";
  r.omega2 = omega2(Omega2Problem{v, bc, dom}, opt.omega2_grid);
  r.provenance["omega2"] = "lp_lower_approximation";

  for (double eps : opt.eps_list) {
    if (!(eps > 0 && eps <= dom.length() / 2)) continue;
    r.omega1_table.emplace_back(eps, omega1(v, dom, eps, opt.j_grid));
  }
  r.provenance["omega1_table"] = "lattice_scan";
  r.omega1_full = affine_residual(v, dom);
  r.provenance["omega1_full"] = "exact_projection";

  r.rho_V = rho_V(r.omega2, r.osc);
  r.provenance["rho_V"] = "formula_of_lp_omega2";
  r.rho_wei = rho_wei(r.omega1_full);
  r.provenance["rho_wei"] = "formula";

  r.r_lower_prop31 = prop31_bound(r.omega2, r.osc, dom.length(), false);
  r.provenance["r_lower_prop31"] = "formula_of_lp_omega2";
  if (torus) {
    r.r_lower_prop31_periodic_improved = prop31_bound(r.omega2, r.osc, 1.0, true);
    r.provenance["r_lower_prop31_periodic_improved"] = "formula_of_lp_omega2";
  }
  const double lambda1 = laplace_lambda1(bc, dom);
  for (const auto& [eps, w1] : r.omega1_table) {
    if (eps >= dom.length() / 2) continue;
    r.r_lower_prop32.emplace_back(eps, prop32_bound(w1, eps, lambda1));
  }
  r.provenance["r_lower_prop32"] = "formula_of_lattice_omega1";

  r.plateau_pair = check_P(v);
  if (r.plateau_pair && r.plateau_pair->ell <= 0.5) {
    r.thm12 = thm12_constants(r.plateau_pair->ell, r.plateau_pair->dv);
    r.provenance["t_P"] = "formula";
    r.provenance["alpha_P"] = "formula";
  }

  const Interval hi = opt.h_interval.value_or(dom);
  if (hi.length() <= 1.0 && r.osc > 0) {
    HEstimate h;
    if (opt.K) {
      h.k_hat = std::max(1.0, *opt.K);
      h.feasible = std::isfinite(h.k_hat);
    } else {
      std::vector<double> eps_grid;
      for (double e : opt.h_eps_grid)
        if (e < hi.length()) eps_grid.push_back(e);
      h = estimate_H_constant(v, hi, eps_grid, opt.j_grid);
    }
    r.h_estimate = h;
    if (h.feasible) {
      const double w2d = omega2(Omega2Problem::dirichlet(v, hi), opt.omega2_grid);
      r.omega2_dirichlet = w2d;
      r.provenance["omega2_dirichlet"] = "lp_lower_approximation";
      if (w2d > 0) {
        r.thm13 = thm13_constants(hi.length(), r.osc, w2d, h.k_hat);
        r.provenance["t_H"] = opt.K ? "formula" : "formula_of_estimated_K";
        r.provenance["alpha_H"] = r.provenance["t_H"];
      }
    }
  }

  if (r.thm12) {
    r.doeblin = doeblin_constants_log(r.thm12->t_P, r.thm12->log_alpha_P);
    r.doeblin_source = "t_P,alpha_P";
  } else if (r.thm13) {
    r.doeblin = doeblin_constants_log(r.thm13->t_H, r.thm13->log_alpha_H);
    r.doeblin_source = "t_H,alpha_H";
  }
  if (r.doeblin) {
    r.provenance["doeblin_C"] = "formula";
    r.provenance["doeblin_rho"] = "formula";
  }
  return r;
}

nlohmann::json BoundsReport::to_json() const {
  using nlohmann::json;
  json j;
  auto pairs = [](const std::vector<std::pair<double, double>>& xs) {
    json arr = json::array();
    for (const auto& [a, b] : xs) arr.push_back({{"eps", a}, {"value", b}});
    return arr;
  };
  j["osc"] = osc;
  j["omega2"] = omega2;
  j["omega1_table"] = pairs(omega1_table);
  j["omega1_full"] = omega1_full;
  j["rho_V"] = rho_V;
  j["rho_wei"] = rho_wei;
  j["r_lower_prop31"] = r_lower_prop31;
  j["r_lower_prop31_periodic_improved"] =
      r_lower_prop31_periodic_improved ? json(*r_lower_prop31_periodic_improved) : json(nullptr);
  j["r_lower_prop32"] = pairs(r_lower_prop32);
  if (plateau_pair) {
    j["plateau_I"] = {plateau_pair->first.left, plateau_pair->first.right};
    j["plateau_J"] = {plateau_pair->second.left, plateau_pair->second.right};
    j["ell"] = plateau_pair->ell;
    j["dv"] = plateau_pair->dv;
  }
  j["t_P"] = thm12 ? json(thm12->t_P) : json(nullptr);
  j["alpha_P"] = thm12 ? json(thm12->alpha_P) : json(nullptr);
  j["log_alpha_P"] = thm12 ? json(thm12->log_alpha_P) : json(nullptr);
  if (h_estimate) {
    j["K_hat"] = std::isfinite(h_estimate->k_hat) ? json(h_estimate->k_hat) : json(nullptr);
    j["H_feasible"] = h_estimate->feasible;
    if (h_estimate->witness) j["H_witness"] = {h_estimate->witness->lo, h_estimate->witness->hi};
  }
  j["omega2_dirichlet"] = omega2_dirichlet ? json(*omega2_dirichlet) : json(nullptr);
  j["beta"] = thm13 ? json(thm13->beta) : json(nullptr);
  j["t_H"] = thm13 ? json(thm13->t_H) : json(nullptr);
  j["alpha_H"] = thm13 ? json(thm13->alpha_H) : json(nullptr);
  j["log_alpha_H"] = thm13 ? json(thm13->log_alpha_H) : json(nullptr);
  j["doeblin_C"] = doeblin ? json(doeblin->C) : json(nullptr);
  j["doeblin_C_minus_one"] = doeblin ? json(doeblin->C_minus_one) : json(nullptr);
  j["doeblin_rho"] = doeblin ? json(doeblin->rho) : json(nullptr);
  j["log_doeblin_rho"] = doeblin ? json(doeblin->log_rho) : json(nullptr);
  if (doeblin) j["doeblin_source"] = doeblin_source;
  j["provenance"] = provenance;
  return j;
}

}  // namespace mixrate
