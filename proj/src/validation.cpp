// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "mixrate/error.hpp"
#include "mixrate/evolve2d.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/kernels.hpp"
#include "mixrate/mcsim.hpp"
#include "mixrate/oracles.hpp"
#include "mixrate/parallel.hpp"
#include "mixrate/spectral1d.hpp"
#include "mixrate/tasks.hpp"
#include "mixrate/velocity.hpp"

namespace mixrate::validation {
namespace {

constexpr double kPi = std::numbers::pi;
using json = nlohmann::json;

struct Member {
  std::string name;
  VelocityField v;
};

std::vector<Member> battery() {
  return {{"cos", VelocityField::cosine(1.0, 1.0)},
          {"sawtooth", VelocityField::sawtooth()},
          {"two_plateau", VelocityField::piecewise_constant({0.5}, {0.0, 1.0})},
          {"binary_cascade", VelocityField::binary_cascade(1.0)}};
}

VelocityField two_plateau() { return VelocityField::piecewise_constant({0.5}, {0.0, 1.0}); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Results shared between the resolvent and semigroup criteria.
struct Shared {
  std::map<std::string, SpectralSummary> r256;
  const SpectralSummary& summary(const Member& m) {
    auto it = r256.find(m.name);
    if (it == r256.end()) {
      ModeOperator op(m.v, Boundary::periodic, {0.0, 1.0}, 256, 1);
      it = r256.emplace(m.name, r_lambda1(op)).first;
    }
    return it->second;
  }
};

struct Context {
  std::uint64_t seed;
  io::ArtifactSet* artifacts;
  Shared shared;
  void add_csv(const std::string& name, std::string bytes) {
    if (artifacts) artifacts->add("validation/" + name, "csv", std::move(bytes));
  }
};

CriterionResult c1_constants(Context&) {
  CriterionResult r;
  const double tp = thm12_constants(0.25, 1.0).t_P;
  const auto d = doeblin_constants(1.0, 0.5);
  const double s = phi_small_inverse(9.0 * kPi);
  const double e_tp = std::abs(tp - 1.390625);
  const double e_c = std::abs(d.C - 2.0), e_rho = std::abs(d.rho - std::log(2.0));
  const double e_phi = std::abs(s - kPi / 4);
  r.metrics = {{"t_P", tp}, {"C", d.C}, {"rho", d.rho}, {"phi_inverse_9pi", s}, {"phi_error", e_phi}};
  r.passed = e_tp <= 1e-15 && e_c <= 1e-15 && e_rho <= 1e-15 && e_phi <= 1e-10;
  r.detail = "t_P=" + fmt("%.10g", tp) + " C=" + fmt("%.10g", d.C) + " rho=" + fmt("%.12g", d.rho) +
             " |phi^-1(9pi)-pi/4|=" + fmt("%.2e", e_phi);
  return r;
}

CriterionResult c2_omega1(Context&) {
  CriterionResult r;
  const auto lin = VelocityField::piecewise_linear({0.0, 1.0}, {0.0, 1.0}, DomainKind::interval);
  const auto cosv = VelocityField::cosine(1.0, 1.0);
  const double w_lin = omega1(lin, {0.0, 1.0}, 0.5);
  const double w_cos = omega1(cosv, {0.0, 1.0}, 0.5);
  const double want_cos = 1.0 / (8 * kPi * kPi) - 3.0 / (4 * std::pow(kPi, 4));
  // Independent cross-check by dense cumulative sums.
  const double bf_cos = oracles::affine_residual_bruteforce(cosv, {0.0, 1.0});
  const double e_lin = std::abs(w_lin - 1.0 / 720), e_cos = std::abs(w_cos - want_cos);
  r.metrics = {{"omega1_linear", w_lin}, {"omega1_cos", w_cos}, {"bruteforce_cos", bf_cos},
               {"error_linear", e_lin}, {"error_cos", e_cos}};
  r.passed = e_lin <= 1e-9 && e_cos <= 1e-6 && std::abs(bf_cos - want_cos) <= 1e-6;
  r.detail = "linear err " + fmt("%.2e", e_lin) + ", cos err " + fmt("%.2e", e_cos) +
             ", brute-force cos err " + fmt("%.2e", std::abs(bf_cos - want_cos));
  return r;
}

CriterionResult c3_omega2(Context& ctx) {
  CriterionResult r;
  std::mt19937_64 gen(ctx.seed ^ 0x03u);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> pieces(2, 6);
  double worst = 0.0;
  json cases = json::array();
  for (int c = 0; c < 5; ++c) {
    const int np = pieces(gen);
    std::vector<double> breaks, values;
    for (int i = 1; i < np; ++i) breaks.push_back(static_cast<double>(i) / np + 0.03 * val(gen));
    for (int i = 0; i < np; ++i) values.push_back(val(gen));
    const auto v = VelocityField::piecewise_constant(breaks, values);
    // Alternate torus and Dirichlet subinterval problems.
    const Omega2Problem prob =
        c % 2 == 0 ? Omega2Problem::torus(v) : Omega2Problem::dirichlet(v, {0.1, 0.85});
    const auto data = omega2_lp_data(prob, 8);
    const double lp = omega2_solve_lp(data).value;
    const double ve = oracles::omega2_vertex_enumeration(data, {data.c}).front();
    worst = std::max(worst, std::abs(lp - ve));
    cases.push_back({{"boundary", to_string(prob.boundary)}, {"lp", lp}, {"vertex", ve}});
  }
  const double cos512 = omega2(Omega2Problem::torus(VelocityField::cosine(1.0, 1.0)), 512);
  r.metrics = {{"cases", cases}, {"max_abs_diff", worst}, {"omega2_cos_512", cos512}};
  r.passed = worst <= 1e-9 && cos512 >= 0.5 - 1e-3;
  r.detail = "max |LP - vertices| " + fmt("%.2e", worst) + " over 5 cases, omega2(cos, 512) = " +
             fmt("%.8f", cos512);
  return r;
}

CriterionResult c4_resolvent(Context& ctx) {
  CriterionResult r;
  r.passed = true;
  std::ostringstream detail;
  for (const auto& m : battery()) {
    const auto& s = ctx.shared.summary(m);
    // A_1 carries the skew part 2 pi V, so the bounds are those of 2 pi V.
    BoundsOptions bo;
    const auto rep = compute_bounds(m.v.scaled(2 * kPi), bo);
    double lb32 = 0.0;
    for (const auto& [eps, b] : rep.r_lower_prop32) lb32 = std::max(lb32, b);
    const double lb31 = std::max(rep.r_lower_prop31, rep.r_lower_prop31_periodic_improved.value_or(0.0));
    const bool ok = s.r_lambda1 >= lb31 - 1e-8 && s.r_lambda1 >= lb32 - 1e-8;
    json mj = {{"r_lambda1", s.r_lambda1}, {"prop31", rep.r_lower_prop31},
               {"prop31_improved", rep.r_lower_prop31_periodic_improved.value_or(0.0)},
               {"prop32_max", lb32}, {"converged", s.converged}};
    bool dbl_ok = true;
    if (m.v.is_smooth()) {
      const auto s512 = r_lambda1(ModeOperator(m.v, Boundary::periodic, {0.0, 1.0}, 512, 1));
      const double rel = std::abs(s512.r_lambda1 - s.r_lambda1) / s.r_lambda1;
      mj["r_lambda1_512"] = s512.r_lambda1;
      mj["doubling_rel_change"] = rel;
      dbl_ok = rel < 0.01;
    }
    r.metrics[m.name] = mj;
    r.passed = r.passed && ok && dbl_ok;
    detail << m.name << " r=" << fmt("%.5g", s.r_lambda1) << " >= max(" << fmt("%.3g", lb31) << ", "
           << fmt("%.3g", lb32) << ")" << (ok && dbl_ok ? "" : " FAIL") << "; ";
    std::vector<double> ss, sv;
    for (const auto& [a, b] : s.trace) {
      ss.push_back(a);
      sv.push_back(b);
    }
    ctx.add_csv("sigma_min_" + m.name + ".csv", io::csv({"s", "sigma_min"}, {ss, sv}));
  }
  r.detail = detail.str();
  return r;
}

CriterionResult c5_semigroup(Context& ctx) {
  CriterionResult r;
  r.passed = true;
  const double lambda2 = 4 * kPi * kPi;
  std::vector<double> times(40);
  const double lo = 1e-3, hi = 50.0 / lambda2;
  for (std::size_t i = 0; i < times.size(); ++i)
    times[i] = lo * std::pow(hi / lo, static_cast<double>(i) / 39.0);
  const double cap = std::exp(kPi / 2) * (1.0 + 1e-4);
  std::ostringstream detail;
  for (const auto& m : battery()) {
    const auto& s = ctx.shared.summary(m);
    ModeOperator op(m.v, Boundary::periodic, {0.0, 1.0}, 256, 1);
    const auto norms = semigroup_norm(op, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      worst = std::max(worst, norms[i] * std::exp((s.lambda1_discrete + s.r_lambda1) * times[i]));
    r.metrics[m.name] = {{"max_scaled_norm", worst}, {"cap", cap}};
    r.passed = r.passed && worst <= cap;
    detail << m.name << " " << fmt("%.4f", worst) << "; ";
  }
  r.detail = "max ||e^{-tA}|| e^{(l1+r)t} vs e^{pi/2}=" + fmt("%.4f", std::exp(kPi / 2)) + ": " +
             detail.str();
  return r;
}

CriterionResult c6_envelope(Context& ctx) {
  CriterionResult r;
  r.passed = true;
  const XGrid grid{Boundary::periodic, {0.0, 1.0}, 128};
  const int k_max = 16;
  const double sigma = 0.03;  // about 4 grid cells
  struct Init {
    std::string name;
    std::function<double(double, double)> f;
    bool r_hat;
  };
  const std::vector<Init> inits = {
      {"y_wave", [](double, double y) { return 1.0 + std::cos(2 * kPi * y); }, true},
      {"oblique", [](double x, double y) {
         return 1.0 + std::cos(2 * kPi * (x + y)) + 0.5 * std::sin(4 * kPi * y);
       }, true},
      {"gaussian", [sigma](double x, double y) {
         double s = 0.0;
         for (int a = -1; a <= 1; ++a)
           for (int b = -1; b <= 1; ++b) {
             const double dx = x - 0.3 + a, dy = y - 0.6 + b;
             s += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
           }
         return s;
       }, false}};
  const std::vector<Member> fields = {{"cos", VelocityField::cosine(1.0, 1.0)},
                                      {"two_plateau", two_plateau()}};
  std::ostringstream detail;
  std::size_t violations = 0, r_violations = 0;
  for (const auto& m : fields) {
    for (const auto& in : inits) {
      const auto u0 = sample_field(in.f, grid, k_max);
      RelaxOptions ro;
      ro.check_r_hat = in.r_hat;
      const auto tr = relax_trace(u0, m.v, 20.0, 40, ro);
      const auto nv = static_cast<std::size_t>(std::count(tr.violated.begin(), tr.violated.end(), true));
      violations += nv;
      if (tr.first_r_hat_violation) ++r_violations;
      r.metrics[m.name + "/" + in.name] = {{"violations", nv},
                                           {"rho", tr.rho},
                                           {"deviation_end", tr.deviation.back()},
                                           {"r_hat", tr.r_hat ? json(*tr.r_hat) : json(nullptr)},
                                           {"r_hat_violation", tr.first_r_hat_violation.has_value()}};
      ctx.add_csv("decay_" + m.name + "_" + in.name + ".csv", tasks::decay_csv(tr));
    }
  }
  // V = c: transport at speed c composed with heat flow in x.
  const double c = 0.7;
  const XGrid g2{Boundary::periodic, {0.0, 1.0}, 64};
  const auto f0 = [](double x, double y) {
    return 1.0 + std::cos(2 * kPi * (x + y)) + 0.5 * std::sin(4 * kPi * y);
  };
  Evolver ev(VelocityField::constant(c), g2, 4);
  const auto u0 = sample_field(f0, g2, 4);
  double worst = 0.0;
  const std::size_t ny = 16;
  const auto xs = g2.nodes();
  for (double t : {0.05, 0.5, 2.0}) {
    const auto ut = ev.step(u0, t).to_samples(ny);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        const double y = static_cast<double>(j) / static_cast<double>(ny);
        const double exact = 1.0 + std::exp(-4 * kPi * kPi * t) * std::cos(2 * kPi * (xs[i] + y - c * t)) +
                             0.5 * std::sin(4 * kPi * (y - c * t));
        worst = std::max(worst, std::abs(ut(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - exact));
      }
  }
  r.metrics["constant_v_max_error"] = worst;
  r.passed = violations == 0 && r_violations == 0 && worst <= 1e-8;
  r.detail = std::to_string(violations) + " envelope violations in 6 runs, " + std::to_string(r_violations) +
             " r_hat violations, V=c error " + fmt("%.2e", worst);
  return r;
}

CriterionResult c7_heat(Context&) {
  CriterionResult r;
  const double t = 0.125;
  double tmin = 1e300;
  for (int i = 0; i <= 2000; ++i) tmin = std::min(tmin, kernels::heat_torus(0.0, i / 2000.0, t));
  const double bound = std::sqrt(2.0 / (std::numbers::e * kPi));
  bool ok = tmin >= bound - 1e-8;
  r.metrics["torus_min"] = tmin;
  r.metrics["torus_bound"] = bound;
  std::ostringstream detail;
  detail << "torus min " << fmt("%.8f", tmin) << " >= " << fmt("%.8f", bound);
  for (const Interval I : {Interval{0.0, 1.0}, Interval{0.2, 0.7}}) {
    const double L = I.length(), td = L * L / 8;
    double cmin = 1e300, img = 0.0;
    const int n = 40;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        const double x = I.lo + L / 4 + (L / 2) * a / n, xp = I.lo + L / 4 + (L / 2) * b / n;
        const double g = kernels::heat_dirichlet(x, xp, I, td);
        img = std::max(img, std::abs(g - kernels::heat_dirichlet_images(x, xp, I, td)));
        cmin = std::min(cmin, g * L * std::exp(kPi * kPi * td / (L * L)));
      }
    ok = ok && cmin >= 0.5 && img <= 1e-10;
    r.metrics["dirichlet_" + fmt("%g", I.lo) + "_" + fmt("%g", I.hi)] = {{"c_min", cmin},
                                                                         {"series_vs_images", img}};
    detail << "; Dirichlet [" << I.lo << "," << I.hi << "] c_min " << fmt("%.4f", cmin);
  }
  r.passed = ok;
  r.detail = detail.str();
  return r;
}

CriterionResult c8_arcsine(Context& ctx) {
  CriterionResult r;
  mc::PathConfig cfg;
  cfg.dt = 1e-4;
  cfg.n_paths = 200000;
  cfg.t_end = 1.0;
  cfg.seed = ctx.seed + 8;
  const auto a = mc::arcsine_experiment(cfg);
  r.metrics = {{"ks", a.ks}, {"n", a.n}, {"dt", cfg.dt}};
  r.passed = a.ks <= 0.02;
  r.detail = "KS " + fmt("%.4f", a.ks) + " (n = 2e5, dt = 1e-4)";
  return r;
}

CriterionResult c9_kolmogorov(Context& ctx) {
  CriterionResult r;
  std::mt19937_64 gen(ctx.seed ^ 0x09u);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), tim(0.5, 3.0);
  double cost_err = 0.0, pde = 0.0;
  for (int i = 0; i < 100; ++i) {
    kernels::KolmogorovState s{pos(gen), pos(gen), pos(gen), pos(gen), tim(gen)};
    const double psi = kernels::kolmogorov_psi(s);
    const double cost = kernels::kolmogorov_control(s).cost;
    cost_err = std::max(cost_err, std::abs(cost - psi) / std::max(1.0, std::abs(psi)));
    pde = std::max(pde, std::abs(kernels::kolmogorov_pde_residual(s)));
  }
  mc::PathConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = 1000000;
  cfg.t_end = 1.0;
  cfg.cells = 24;
  cfg.seed = ctx.seed + 9;
  cfg.y_integrator = mc::YIntegrator::trapezoid;
  const auto k = mc::kolmogorov_experiment(cfg);
  ctx.add_csv("kolmogorov_histogram.csv", k.hist.to_csv());

  // Moments of the kernel by midpoint quadrature over +-10 standard deviations.
  const double t = cfg.t_end, sx = std::sqrt(2 * t), sy = std::sqrt(2 * t * t * t / 3);
  const int q = 400;
  double m0 = 0.0, m2 = 0.0;
  const double hx = 20 * sx / q, hy = 20 * sy / q;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double x = -10 * sx + (i + 0.5) * hx, y = -10 * sy + (j + 0.5) * hy;
      const double w = kernels::kolmogorov_kernel({0, 0, x, y, t}) * hx * hy;
      m0 += w;
      m2 += w * y * y;
    }
  const double var_int = m2 / m0;
  const auto n = static_cast<double>(cfg.n_paths);
  const bool mean_ok = std::abs(k.mean_y) <= 3 * std::sqrt(var_int / n);
  const bool var_ok = std::abs(k.var_y - var_int) <= 3 * var_int * std::sqrt(2 / (n - 1));
  r.metrics = {{"cost_psi_rel_error", cost_err}, {"pde_residual", pde},
               {"max_rel_error", k.max_rel_error}, {"cells_compared", k.cells_compared},
               {"x_marginal_chi2_p", k.x_marginal_chi2_p}, {"mean_y", k.mean_y},
               {"var_y", k.var_y}, {"var_y_kernel_integral", var_int}, {"kernel_mass", m0}};
  r.passed = cost_err <= 1e-12 && pde <= 1e-4 && k.max_rel_error <= 0.05 && k.x_marginal_chi2_p > 1e-3 &&
             mean_ok && var_ok;
  r.detail = "cost-psi " + fmt("%.1e", cost_err) + ", PDE residual " + fmt("%.1e", pde) + ", max rel err " +
             fmt("%.4f", k.max_rel_error) + " on " + std::to_string(k.cells_compared) + " cells, x chi2 p " +
             fmt("%.3f", k.x_marginal_chi2_p) + ", Var Y " + fmt("%.5f", k.var_y) + " vs " +
             fmt("%.5f", var_int);
  return r;
}

CriterionResult c10_doeblin(Context& ctx) {
  CriterionResult r;
  const auto v = two_plateau();
  const auto pp = check_P(v);
  require(pp.has_value(), ErrorCode::numeric, "two-plateau field lost its plateaus");
  const auto th = thm12_constants(pp->ell, pp->dv);
  const double tp = th.t_P;
  std::vector<std::pair<double, double>> starts;
  for (int i = 0; i < 8; ++i) starts.emplace_back((i + 0.5) / 8, i / 8.0);
  mc::PathConfig cfg;
  cfg.dt = 1.0 / 32;
  cfg.n_paths = 1000000;
  cfg.cells = 8;
  cfg.seed = ctx.seed + 10;
  const auto run = mc::doeblin_estimate(mc::SimVelocity::periodic(v), {tp, 2 * tp, 4 * tp}, starts, cfg);
  const auto& e0 = run.estimates.front();
  const bool nonempty = !e0.empty_cell && e0.alpha_hat > 0;
  // alpha_P underflows in double; compare logs.
  const bool above = e0.alpha_hat > 0 && std::log(e0.alpha_hat) >= th.log_alpha_P;
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < run.estimates.size(); ++i)
    monotone = monotone && run.estimates[i + 1].alpha_upper >= run.estimates[i].alpha_lower;
  json est = json::array();
  for (std::size_t i = 0; i < run.times.size(); ++i)
    est.push_back({{"t", run.times[i]}, {"alpha_hat", run.estimates[i].alpha_hat},
                   {"alpha_lower", run.estimates[i].alpha_lower},
                   {"alpha_upper", run.estimates[i].alpha_upper}});
  for (std::size_t s = 0; s < starts.size(); ++s)
    ctx.add_csv("doeblin_tP_start" + std::to_string(s) + ".csv", run.histograms[0][s].to_csv());

  mc::PathConfig tcfg = cfg;
  tcfg.n_paths = 200000;
  tcfg.seed = ctx.seed + 11;
  const auto tv = mc::tv_decay(mc::SimVelocity::periodic(v), {0.25, 0.0}, {0.75, 0.5}, {1, 2, 4, 8}, tcfg);
  ctx.add_csv("tv_decay.csv", io::csv({"t", "tv", "bias_floor"}, {tv.times, tv.tv, tv.bias_floor}));
  const double rho = e0.alpha_hat > 0 ? -std::log1p(-e0.alpha_hat) / tp : 0.0;
  const bool slope_ok = std::isfinite(tv.slope) && tv.slope < 0 && -tv.slope >= rho;
  r.metrics = {{"t_P", tp}, {"log_alpha_P", th.log_alpha_P}, {"estimates", est},
               {"tv", tv.tv}, {"tv_bias_floor", tv.bias_floor}, {"tv_slope", tv.slope},
               {"tv_fit_points", tv.fit_points}, {"rho_from_alpha_hat", rho}, {"dt", cfg.dt}};
  r.passed = nonempty && above && monotone && slope_ok;
  r.detail = "alpha_hat(t_P) " + fmt("%.5f", e0.alpha_hat) + (nonempty ? "" : " (empty cell)") +
             ", log alpha_P " + fmt("%.1f", th.log_alpha_P) + (monotone ? ", monotone" : ", NOT monotone") +
             ", TV slope " + fmt("%.4f", tv.slope) + " vs -rho " + fmt("%.5f", -rho);
  return r;
}

CriterionResult c11_determinism(Context& ctx) {
  CriterionResult r;
  const unsigned saved = parallel::workers();
  std::vector<unsigned> counts = {1, 3, 8};
  std::vector<io::ArtifactSet> sets;
  try {
    for (unsigned w : counts) {
      parallel::set_workers(w);
      sets.push_back(determinism_bundle(ctx.seed));
    }
  } catch (...) {
    parallel::set_workers(saved);
    throw;
  }
  parallel::set_workers(saved);
  std::size_t mismatched = 0;
  json hashes = json::object();
  const auto& ref = sets.front().artifacts();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const std::string h = io::sha256_hex(ref[i].bytes);
    hashes[ref[i].name] = h;
    for (std::size_t s = 1; s < sets.size(); ++s) {
      const auto* other = sets[s].find(ref[i].name);
      if (!other || other->bytes != ref[i].bytes) ++mismatched;
    }
  }
  r.metrics = {{"worker_counts", counts}, {"artifacts", ref.size()}, {"mismatched", mismatched},
               {"sha256", hashes}};
  r.passed = mismatched == 0 && !ref.empty();
  r.detail = std::to_string(ref.size()) + " artifacts compared across workers {1,3,8}, " +
             std::to_string(mismatched) + " mismatches";
  return r;
}

using Runner = CriterionResult (*)(Context&);

const std::vector<std::pair<int, Runner>>& runners() {
  static const std::vector<std::pair<int, Runner>> v = {
      {1, c1_constants}, {2, c2_omega1},     {3, c3_omega2},     {4, c4_resolvent},
      {5, c5_semigroup}, {6, c6_envelope},   {7, c7_heat},       {8, c8_arcsine},
      {9, c9_kolmogorov}, {10, c10_doeblin}, {11, c11_determinism}};
  return v;
}

}  // namespace

const std::vector<std::pair<int, std::string>>& criteria() {
  static const std::vector<std::pair<int, std::string>> v = {
      {1, "constant golden values"},
      {2, "omega1 closed forms"},
      {3, "omega2 LP vs vertex enumeration"},
      {4, "resolvent ordering"},
      {5, "semigroup bound"},
      {6, "relaxation envelope"},
      {7, "heat kernel constants"},
      {8, "arcsine law"},
      {9, "Kolmogorov kernel"},
      {10, "Doeblin empirics"},
      {11, "determinism across worker counts"}};
  return v;
}

std::vector<CriterionResult> run_suite(const SuiteOptions& options) {
  for (int id : options.criteria)
    require(id >= 1 && id <= 11, ErrorCode::config, "validate: criteria must lie in 1..11");
  Context ctx{options.seed, options.artifacts, {}};
  std::vector<CriterionResult> out;
  for (const auto& [id, run] : runners()) {
    if (!options.criteria.empty() &&
        std::find(options.criteria.begin(), options.criteria.end(), id) == options.criteria.end())
      continue;
    const std::string title = criteria()[static_cast<std::size_t>(id - 1)].second;
    if (options.on_start) options.on_start(id, title);
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = run(ctx);
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = std::string("error: ") + e.what();
    }
    res.id = id;
    res.title = title;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.on_result) options.on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d  %-34s (%7.1f s): ", r.passed ? "PASS" : "FAIL", r.id,
                r.title.c_str(), r.seconds);
  return head + r.detail;
}

json to_json(const std::vector<CriterionResult>& results) {
  json j = json::array();
  for (const auto& r : results)
    j.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail},
                 {"metrics", r.metrics}, {"seconds", r.seconds}});
  return j;
}

io::ArtifactSet determinism_bundle(std::uint64_t seed) {
  io::ArtifactSet set;
  const auto cosv = VelocityField::cosine(1.0, 1.0);
  const auto tpl = two_plateau();

  BoundsOptions bo;
  bo.omega2_grid = 64;
  bo.j_grid = 32;
  set.add_json("bounds_cos.json", compute_bounds(cosv, bo).to_json());

  const auto s = r_lambda1(ModeOperator(cosv, Boundary::periodic, {0.0, 1.0}, 32, 1));
  set.add("sigma_min_cos.csv", "csv", tasks::sweep_csv(s));

  const XGrid grid{Boundary::periodic, {0.0, 1.0}, 32};
  const auto u0 = sample_field(
      [](double x, double y) { return 1.0 + std::cos(2 * kPi * (x + y)) + 0.5 * std::sin(4 * kPi * y); },
      grid, 3);
  set.add("decay_two_plateau.csv", "csv", tasks::decay_csv(relax_trace(u0, tpl, 2.0, 10)));

  mc::PathConfig cfg;
  cfg.dt = 1.0 / 32;
  cfg.n_paths = 20000;
  cfg.cells = 8;
  cfg.seed = seed + 10;
  const auto run = mc::doeblin_estimate(mc::SimVelocity::periodic(tpl), {1.4375, 2.875},
                                        {{0.0625, 0.0}, {0.5625, 0.5}}, cfg);
  for (std::size_t t = 0; t < run.histograms.size(); ++t)
    for (std::size_t k = 0; k < run.histograms[t].size(); ++k)
      set.add("histogram_t" + std::to_string(t) + "_start" + std::to_string(k) + ".csv", "csv",
              run.histograms[t][k].to_csv());

  mc::PathConfig tcfg = cfg;
  tcfg.n_paths = 10000;
  const auto tv = mc::tv_decay(mc::SimVelocity::periodic(tpl), {0.25, 0.0}, {0.75, 0.5}, {1, 2}, tcfg);
  set.add_csv("tv_decay.csv", {"t", "tv", "bias_floor"}, {tv.times, tv.tv, tv.bias_floor});

  mc::PathConfig kcfg;
  kcfg.dt = 1e-2;
  kcfg.n_paths = 20000;
  kcfg.cells = 12;
  kcfg.seed = seed + 9;
  kcfg.y_integrator = mc::YIntegrator::trapezoid;
  set.add("kolmogorov_histogram.csv", "csv", mc::kolmogorov_experiment(kcfg).hist.to_csv());

  mc::PathConfig acfg;
  acfg.dt = 1e-3;
  acfg.n_paths = 5000;
  acfg.seed = seed + 8;
  set.add_json("arcsine.json", {{"ks", mc::arcsine_experiment(acfg).ks}});
  return set;
}

}  // namespace mixrate::validation
