// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "mixrate/functionals.hpp"
#include "mixrate/io.hpp"
#include "mixrate/mcsim.hpp"
#include "mixrate/velocity.hpp"

namespace mixrate::tasks {
namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;
constexpr int kManifestVersion = 1;

enum class Ty { number, integer, string, boolean, number_list, point_list, interval, point, box, object,
                opt_number, opt_interval, opt_string, opt_number_list, opt_point_list, opt_box, int_list };

struct Param {
  std::string name;
  json def;
  Ty type;
};

const char* type_name(Ty t) {
  switch (t) {
    case Ty::number: return "number";
    case Ty::integer: return "integer";
    case Ty::string: return "string";
    case Ty::boolean: return "boolean";
    case Ty::number_list: return "array of numbers";
    case Ty::point_list: return "array of [x, y] pairs";
    case Ty::interval: return "[lo, hi]";
    case Ty::point: return "[x, y]";
    case Ty::box: return "[x_lo, x_hi, y_lo, y_hi]";
    case Ty::object: return "object";
    case Ty::opt_number: return "number or null";
    case Ty::opt_interval: return "[lo, hi] or null";
    case Ty::opt_string: return "string or null";
    case Ty::opt_number_list: return "array of numbers or null";
    case Ty::opt_point_list: return "array of [x, y] pairs or null";
    case Ty::opt_box: return "[x_lo, x_hi, y_lo, y_hi] or null";
    case Ty::int_list: return "array of integers";
  }
  return "?";
}

bool numbers(const json& v, std::size_t n = 0) {
  if (!v.is_array() || (n && v.size() != n)) return false;
  return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
}

bool type_ok(const json& v, Ty t) {
  switch (t) {
    case Ty::number: return v.is_number();
    case Ty::integer: return v.is_number_integer();
    case Ty::string: return v.is_string();
    case Ty::boolean: return v.is_boolean();
    case Ty::number_list: return numbers(v);
    case Ty::point_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return numbers(e, 2); });
    case Ty::interval:
    case Ty::point: return numbers(v, 2);
    case Ty::box: return numbers(v, 4);
    case Ty::object: return v.is_object();
    case Ty::opt_number: return v.is_null() || v.is_number();
    case Ty::opt_interval: return v.is_null() || numbers(v, 2);
    case Ty::opt_string: return v.is_null() || v.is_string();
    case Ty::opt_number_list: return v.is_null() || numbers(v);
    case Ty::opt_point_list: return v.is_null() || type_ok(v, Ty::point_list);
    case Ty::opt_box: return v.is_null() || numbers(v, 4);
    case Ty::int_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
  }
  return false;
}

const std::map<Task, std::vector<Param>>& table() {
  static const std::map<Task, std::vector<Param>> t = {
      {Task::bounds,
       {{"omega2_grid", 256, Ty::integer},
        {"j_grid", 128, Ty::integer},
        {"eps_list", {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}, Ty::number_list},
        {"h_eps_grid", {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}, Ty::number_list},
        {"h_interval", nullptr, Ty::opt_interval},
        {"K", nullptr, Ty::opt_number}}},
      {Task::spectrum,
       {{"boundary", "periodic", Ty::string},
        {"interval", {0.0, 1.0}, Ty::interval},
        {"n", 256, Ty::integer},
        {"k", 1, Ty::integer},
        {"discretization", "automatic", Ty::string},
        {"s_window", nullptr, Ty::opt_interval},
        {"s_points", 65, Ty::integer},
        {"semigroup_points", 40, Ty::integer},
        {"semigroup_t_max", nullptr, Ty::opt_number},
        {"omega2_grid", 256, Ty::integer},
        {"eps_list", {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}, Ty::number_list}}},
      {Task::evolve,
       {{"boundary", "periodic", Ty::string},
        {"interval", {0.0, 1.0}, Ty::interval},
        {"grid_n", 128, Ty::integer},
        {"k_max", 32, Ty::integer},
        {"t_end", 20.0, Ty::number},
        {"samples", 40, Ty::integer},
        {"discretization", "automatic", Ty::string},
        {"initial", {{"kind", "gaussian"}, {"x0", 0.3}, {"y0", 0.6}, {"width", 0.03}}, Ty::object},
        {"check_r_hat", false, Ty::boolean},
        {"omega2_grid", 256, Ty::integer},
        {"snapshot_ny", nullptr, Ty::opt_number}}},
      {Task::simulate,
       {{"experiment", "histogram", Ty::string},
        {"dt", 1e-4, Ty::number},
        {"n_paths", 10000, Ty::integer},
        {"t_end", 1.0, Ty::number},
        {"cells", 8, Ty::integer},
        {"y_integrator", "left_endpoint", Ty::string},
        {"geometry", "torus", Ty::string},
        {"start", {0.0, 0.0}, Ty::point},
        {"starts", nullptr, Ty::opt_point_list},
        {"times", nullptr, Ty::opt_number_list},
        {"kill_outside", nullptr, Ty::opt_interval},
        {"box", nullptr, Ty::opt_box},
        {"confidence", 0.99, Ty::number}}},
      {Task::validate, {{"criteria", json::array(), Ty::int_list}}},
      {Task::report,
       {{"bounds", nullptr, Ty::opt_string},
        {"spectrum", nullptr, Ty::opt_string},
        {"decay", nullptr, Ty::opt_string}}},
  };
  return t;
}

json normalize_params(Task task, const json& given) {
  if (!given.is_object()) fail(ErrorCode::config, "params must be a JSON object");
  const auto& spec = table().at(task);
  json out = json::object();
  for (const auto& p : spec) out[p.name] = p.def;
  for (const auto& [key, val] : given.items()) {
    const auto it = std::find_if(spec.begin(), spec.end(), [&](const Param& p) { return p.name == key; });
    if (it == spec.end())
      fail(ErrorCode::config, std::string("params: unknown key '") + key + "' for task " + to_string(task));
    if (!type_ok(val, it->type))
      fail(ErrorCode::config, "params." + key + ": expected " + type_name(it->type));
    out[key] = val;
  }
  return out;
}

Interval interval_of(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

Boundary boundary_of(const json& p) {
  const auto s = p.at("boundary").get<std::string>();
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet") return Boundary::dirichlet;
  fail(ErrorCode::config, "boundary must be 'periodic' or 'dirichlet'");
}

Discretization discretization_of(const json& p) {
  const auto s = p.at("discretization").get<std::string>();
  if (s == "automatic") return Discretization::automatic;
  if (s == "finite_difference") return Discretization::finite_difference;
  if (s == "spectral") return Discretization::spectral;
  fail(ErrorCode::config, "discretization must be automatic, finite_difference or spectral");
}

std::size_t positive_size(const json& p, const char* key, std::size_t min) {
  const auto v = p.at(key).get<long long>();
  if (v < static_cast<long long>(min))
    fail(ErrorCode::config, std::string(key) + " must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

double positive(const json& p, const char* key) {
  const double v = p.at(key).get<double>();
  if (!(v > 0) || !std::isfinite(v)) fail(ErrorCode::config, std::string(key) + " must be positive");
  return v;
}

void check_interval(Interval i, const char* what) {
  if (!(i.hi > i.lo) || !std::isfinite(i.lo) || !std::isfinite(i.hi))
    fail(ErrorCode::config, std::string(what) + " must satisfy lo < hi");
}

// ---------------------------------------------------------------------------
// Typed plans. Built once during parsing (to reject bad configs before any
// artifact exists) and again when running.

BoundsOptions bounds_plan(const json& p) {
  BoundsOptions o;
  o.omega2_grid = positive_size(p, "omega2_grid", 16);
  o.j_grid = positive_size(p, "j_grid", 2);
  o.eps_list = p.at("eps_list").get<std::vector<double>>();
  o.h_eps_grid = p.at("h_eps_grid").get<std::vector<double>>();
  for (double e : o.eps_list)
    if (!(e > 0)) fail(ErrorCode::config, "eps_list entries must be positive");
  for (double e : o.h_eps_grid)
    if (!(e > 0)) fail(ErrorCode::config, "h_eps_grid entries must be positive");
  if (!p.at("h_interval").is_null()) {
    o.h_interval = interval_of(p.at("h_interval"));
    check_interval(*o.h_interval, "h_interval");
  }
  if (!p.at("K").is_null()) o.K = p.at("K").get<double>();
  return o;
}

struct SpectrumPlan {
  Boundary boundary;
  Interval interval;
  std::size_t n;
  int k;
  Discretization disc;
  std::optional<std::pair<double, double>> window;
  std::size_t s_points;
  std::size_t semigroup_points;
  std::optional<double> t_max;
  std::size_t omega2_grid;
  std::vector<double> eps_list;
};

SpectrumPlan spectrum_plan(const json& p) {
  SpectrumPlan s;
  s.boundary = boundary_of(p);
  s.interval = interval_of(p.at("interval"));
  check_interval(s.interval, "interval");
  s.n = positive_size(p, "n", 16);
  s.k = p.at("k").get<int>();
  s.disc = discretization_of(p);
  if (!p.at("s_window").is_null()) {
    const auto w = interval_of(p.at("s_window"));
    check_interval(w, "s_window");
    s.window = std::make_pair(w.lo, w.hi);
  }
  s.s_points = positive_size(p, "s_points", 64);
  s.semigroup_points = positive_size(p, "semigroup_points", 0);
  if (!p.at("semigroup_t_max").is_null()) s.t_max = positive(p, "semigroup_t_max");
  s.omega2_grid = positive_size(p, "omega2_grid", 16);
  s.eps_list = p.at("eps_list").get<std::vector<double>>();
  return s;
}

struct EvolvePlan {
  XGrid grid;
  int k_max;
  double t_end;
  std::size_t samples;
  Discretization disc;
  std::function<double(double, double)> initial;
  json initial_json;
  bool check_r_hat;
  std::size_t omega2_grid;
  std::size_t ny;
};

double num(const json& o, const char* key, double def) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_number()) fail(ErrorCode::config, std::string("initial.") + key + " must be a number");
  return o.at(key).get<double>();
}

std::function<double(double, double)> initial_field(const json& o, const XGrid& g) {
  const auto kind = o.value("kind", std::string());
  const Interval I = g.interval;
  const double L = I.length();
  auto allow = [&](std::set<std::string> keys) {
    for (const auto& [k, v] : o.items())
      if (!keys.count(k)) fail(ErrorCode::config, "initial: unknown key '" + k + "' for kind " + kind);
  };
  if (kind == "gaussian") {
    allow({"kind", "x0", "y0", "width", "amplitude"});
    const double x0 = num(o, "x0", I.lo + 0.3 * L), y0 = num(o, "y0", 0.6);
    const double w = num(o, "width", 0.03), a = num(o, "amplitude", 1.0);
    if (w < 2 * g.h())
      fail(ErrorCode::config, "initial.width must be at least two grid cells (" + io::format_double(2 * g.h()) + ")");
    const bool wrap_x = g.boundary == Boundary::periodic;
    return [=](double x, double y) {
      double s = 0.0;
      for (int mx = wrap_x ? -1 : 0; mx <= (wrap_x ? 1 : 0); ++mx)
        for (int my = -1; my <= 1; ++my) {
          const double dx = x - x0 + mx * L, dy = y - y0 + my;
          s += std::exp(-(dx * dx + dy * dy) / (2 * w * w));
        }
      return a * s;
    };
  }
  if (kind == "plane_wave") {
    allow({"kind", "kx", "ky", "amplitude", "offset"});
    const double kx = num(o, "kx", 1.0), ky = num(o, "ky", 1.0);
    const double a = num(o, "amplitude", 1.0), c = num(o, "offset", 1.0);
    if (ky != std::round(ky)) fail(ErrorCode::config, "initial.ky must be an integer");
    return [=](double x, double y) { return c + a * std::cos(2 * kPi * (kx * (x - I.lo) / L + ky * y)); };
  }
  fail(ErrorCode::config, "initial.kind must be 'gaussian' or 'plane_wave'");
}

EvolvePlan evolve_plan(const json& p) {
  EvolvePlan e;
  e.grid.boundary = boundary_of(p);
  e.grid.interval = interval_of(p.at("interval"));
  check_interval(e.grid.interval, "interval");
  e.grid.n = positive_size(p, "grid_n", 16);
  e.k_max = static_cast<int>(positive_size(p, "k_max", 0));
  e.t_end = positive(p, "t_end");
  e.samples = positive_size(p, "samples", 1);
  e.disc = discretization_of(p);
  e.initial_json = p.at("initial");
  e.initial = initial_field(e.initial_json, e.grid);
  e.check_r_hat = p.at("check_r_hat").get<bool>();
  e.omega2_grid = positive_size(p, "omega2_grid", 16);
  const auto min_ny = static_cast<std::size_t>(2 * e.k_max + 1);
  e.ny = std::max<std::size_t>(64, min_ny);
  if (!p.at("snapshot_ny").is_null()) {
    const double v = p.at("snapshot_ny").get<double>();
    if (v != std::round(v) || v < static_cast<double>(min_ny))
      fail(ErrorCode::config, "snapshot_ny must be an integer >= 2 k_max + 1");
    e.ny = static_cast<std::size_t>(v);
  }
  return e;
}

struct SimulatePlan {
  std::string experiment;
  mc::PathConfig cfg;
  std::vector<std::pair<double, double>> starts;
  std::vector<double> times;
  double confidence;
};

SimulatePlan simulate_plan(const json& p, std::uint64_t seed) {
  SimulatePlan s;
  s.experiment = p.at("experiment").get<std::string>();
  static const std::set<std::string> known = {"histogram", "doeblin", "tv", "arcsine", "kolmogorov"};
  if (!known.count(s.experiment))
    fail(ErrorCode::config, "experiment must be histogram, doeblin, tv, arcsine or kolmogorov");
  auto& c = s.cfg;
  c.dt = positive(p, "dt");
  c.n_paths = positive_size(p, "n_paths", 1);
  c.t_end = p.at("t_end").get<double>();
  if (!(c.t_end >= 0)) fail(ErrorCode::config, "t_end must be nonnegative");
  c.cells = positive_size(p, "cells", 1);
  c.seed = seed;
  const auto yi = p.at("y_integrator").get<std::string>();
  if (yi == "left_endpoint") c.y_integrator = mc::YIntegrator::left_endpoint;
  else if (yi == "trapezoid") c.y_integrator = mc::YIntegrator::trapezoid;
  else fail(ErrorCode::config, "y_integrator must be left_endpoint or trapezoid");
  const auto geo = p.at("geometry").get<std::string>();
  if (geo == "torus") c.geometry = mc::Geometry::torus;
  else if (geo == "plane") c.geometry = mc::Geometry::plane;
  else fail(ErrorCode::config, "geometry must be torus or plane");
  if (!p.at("box").is_null()) {
    const auto b = p.at("box").get<std::vector<double>>();
    c.box = {b[0], b[1], b[2], b[3]};
    if (!(c.box.x_hi > c.box.x_lo && c.box.y_hi > c.box.y_lo)) fail(ErrorCode::config, "box must be nonempty");
  }
  if (!p.at("kill_outside").is_null()) {
    c.kill_outside = interval_of(p.at("kill_outside"));
    check_interval(*c.kill_outside, "kill_outside");
  }
  s.confidence = p.at("confidence").get<double>();
  if (!(s.confidence > 0 && s.confidence < 1)) fail(ErrorCode::config, "confidence must lie in (0, 1)");
  if (p.at("starts").is_null()) {
    const auto st = p.at("start").get<std::vector<double>>();
    s.starts = {{st[0], st[1]}};
  } else {
    for (const auto& e : p.at("starts")) s.starts.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  if (s.starts.empty()) fail(ErrorCode::config, "starts must be nonempty");
  if (c.geometry == mc::Geometry::torus)
    for (const auto& [x, y] : s.starts)
      if (!(x >= 0 && x < 1 && y >= 0 && y < 1)) fail(ErrorCode::config, "torus starts must lie in [0, 1)^2");
  if (c.kill_outside)
    for (const auto& st : s.starts)
      if (!c.kill_outside->contains(st.first)) fail(ErrorCode::config, "start lies outside kill_outside");
  s.times = p.at("times").is_null() ? std::vector<double>{c.t_end} : p.at("times").get<std::vector<double>>();
  if (s.times.empty()) fail(ErrorCode::config, "times must be nonempty");
  for (double t : s.times)
    if (!(t >= 0) || !std::isfinite(t)) fail(ErrorCode::config, "times must be nonnegative");
  if (s.experiment == "tv") {
    if (s.starts.size() != 2) fail(ErrorCode::config, "tv needs exactly two starts");
    if (p.at("times").is_null()) fail(ErrorCode::config, "tv needs times");
  }
  if ((s.experiment == "arcsine" || s.experiment == "kolmogorov") && !(c.t_end > 0))
    fail(ErrorCode::config, "t_end must be positive");
  return s;
}

bool needs_velocity(const ExperimentConfig& c) {
  switch (c.task) {
    case Task::bounds:
    case Task::spectrum:
    case Task::evolve: return true;
    case Task::simulate: {
      const auto e = c.params.at("experiment").get<std::string>();
      return e == "histogram" || e == "doeblin" || e == "tv";
    }
    default: return false;
  }
}

void check_plans(const ExperimentConfig& c) {
  switch (c.task) {
    case Task::bounds: bounds_plan(c.params); break;
    case Task::spectrum: spectrum_plan(c.params); break;
    case Task::evolve: evolve_plan(c.params); break;
    case Task::simulate: simulate_plan(c.params, c.seed); break;
    case Task::validate:
      for (const auto& id : c.params.at("criteria"))
        if (id.get<int>() < 1 || id.get<int>() > 11) fail(ErrorCode::config, "criteria must lie in 1..11");
      break;
    case Task::report: break;
  }
  if (needs_velocity(c) && !c.velocity)
    fail(ErrorCode::config, std::string("task ") + to_string(c.task) + " needs a velocity");
  if (c.velocity) VelocityField::from_json(*c.velocity);
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = n == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return t;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Task bodies.

void run_bounds(const ExperimentConfig& c, io::ArtifactSet& out, RunResult& res) {
  const auto v = VelocityField::from_json(*c.velocity);
  const auto rep = compute_bounds(v, bounds_plan(c.params));
  out.add_json("bounds.json", rep.to_json());
  std::ostringstream s;
  s << "osc " << rep.osc << ", omega2 " << rep.omega2 << ", rho_V " << rep.rho_V;
  if (rep.thm12) s << ", t_P " << rep.thm12->t_P << ", log alpha_P " << rep.thm12->log_alpha_P;
  if (rep.thm13) s << ", t_H " << rep.thm13->t_H;
  res.summary = s.str();
}

void run_spectrum(const ExperimentConfig& c, io::ArtifactSet& out, RunResult& res) {
  const auto v = VelocityField::from_json(*c.velocity);
  const auto p = spectrum_plan(c.params);
  ModeOperator op(v, p.boundary, p.interval, p.n, p.k, p.disc);
  const auto sum = r_lambda1(op, p.window, p.s_points);
  json j = sum.to_json();
  j["boundary"] = to_string(p.boundary);
  j["interval"] = {p.interval.lo, p.interval.hi};
  j["n"] = p.n;
  j["k"] = p.k;
  j["discretization"] = to_string(op.discretization());
  std::vector<double> ts, ss;
  for (const auto& [s, sig] : sum.trace) {
    ts.push_back(s);
    ss.push_back(sig);
  }
  j["trace"] = {{"s", ts}, {"sigma_min", ss}};

  // Reference lower bounds for the skew part 2 pi k V actually discretized.
  json refs = json::object();
  if (p.k != 0) {
    const auto vs = v.scaled(2 * kPi * p.k);
    const double L = p.interval.length();
    const double w2 = omega2(Omega2Problem{vs, p.boundary, p.interval}, p.omega2_grid);
    refs["omega2"] = w2;
    refs["osc"] = vs.osc();
    refs["prop31"] = prop31_bound(w2, vs.osc(), L, false);
    if (p.boundary == Boundary::periodic && L == 1.0) refs["prop31_periodic_improved"] = prop31_bound(w2, vs.osc(), L, true);
    const double lam1 = laplace_lambda1(p.boundary, p.interval);
    json p32 = json::array();
    double best = 0.0;
    for (double eps : p.eps_list) {
      if (!(eps > 0 && eps <= L / 2)) continue;
      const double b = prop32_bound(omega1(vs, p.interval, eps), eps, lam1);
      best = std::max(best, b);
      p32.push_back({{"eps", eps}, {"bound", b}});
    }
    refs["prop32"] = p32;
    refs["prop32_max"] = best;
    const double lb = std::max({refs["prop31"].get<double>(), refs.value("prop31_periodic_improved", 0.0), best});
    refs["ordering_ok"] = sum.r_lambda1 >= lb - 1e-8;
  }
  j["references"] = refs;

  if (p.semigroup_points > 0) {
    const double lam2 = laplace_lambda2(p.boundary, p.interval);
    const double tmax = p.t_max.value_or(50.0 / lam2);
    const auto times = log_grid(std::min(1e-3, tmax), tmax, p.semigroup_points);
    const auto norms = semigroup_norm(op, times);
    std::vector<double> bound(times.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      bound[i] = std::exp(kPi / 2 - (sum.lambda1_discrete + sum.r_lambda1) * times[i]);
      worst = std::max(worst, norms[i] / bound[i] * std::exp(kPi / 2));
    }
    j["semigroup_max_scaled_norm"] = worst;
    out.add_csv("semigroup.csv", {"t", "norm", "bound"}, {times, norms, bound});
  }
  out.add_json("spectrum.json", j);
  out.add("sigma_min.csv", "csv", sweep_csv(sum));
  res.summary = "r_lambda1 " + io::format_double(sum.r_lambda1) + " at s = " + io::format_double(sum.s_argmin) +
                (sum.converged ? "" : " (refinement did not converge)");
  if (!sum.converged) res.warnings.push_back("r_lambda1 refinement did not converge; see bracket");
}

json grid_meta(const XGrid& g, std::size_t ny) {
  return {{"boundary", to_string(g.boundary)}, {"interval", {g.interval.lo, g.interval.hi}},
          {"nx", g.n}, {"ny", ny}, {"rows", "x nodes"}, {"cols", "y = j / ny"}};
}

void run_evolve(const ExperimentConfig& c, io::ArtifactSet& out, RunResult& res) {
  const auto v = VelocityField::from_json(*c.velocity);
  const auto p = evolve_plan(c.params);
  const auto u0 = sample_field(p.initial, p.grid, p.k_max);
  out.add_grid("snapshot_initial", u0.to_samples(p.ny), 0.0, grid_meta(p.grid, p.ny));
  if (p.grid.boundary == Boundary::periodic) {
    RelaxOptions ro;
    ro.omega2_grid = p.omega2_grid;
    ro.check_r_hat = p.check_r_hat;
    ro.disc = p.disc;
    const auto tr = relax_trace(u0, v, p.t_end, p.samples, ro);
    const auto nv = std::count(tr.violated.begin(), tr.violated.end(), true);
    out.add("decay.csv", "csv", decay_csv(tr));
    out.add_json("decay.json",
                 {{"rho", tr.rho}, {"omega2", tr.omega2}, {"violations", nv},
                  {"first_violation", tr.first_violation ? json(*tr.first_violation) : json(nullptr)},
                  {"r_hat", opt(tr.r_hat)},
                  {"first_r_hat_violation",
                   tr.first_r_hat_violation ? json(*tr.first_r_hat_violation) : json(nullptr)}});
    res.summary = "deviation " + io::format_double(tr.deviation.front()) + " -> " +
                  io::format_double(tr.deviation.back()) + ", " + std::to_string(nv) + " envelope violations";
    if (nv > 0) res.warnings.push_back("decay envelope violated");
  } else {
    const auto tr = dirichlet_strip_trace(u0, v, p.t_end, p.samples);
    std::vector<std::string> head = {"t", "mass", "mode0_min_margin"};
    std::vector<std::vector<double>> cols = {tr.t, tr.mass, tr.mode0_min_margin};
    for (std::size_t m = 0; m < tr.k.size(); ++m) {
      head.push_back("sup_k" + std::to_string(tr.k[m]));
      std::vector<double> col;
      for (const auto& row : tr.sup) col.push_back(row[m]);
      cols.push_back(std::move(col));
    }
    out.add_csv("strip.csv", head, cols);
    out.add_json("strip.json", {{"lower_envelope_applies", tr.lower_envelope_applies},
                                {"lower_envelope_violations", tr.lower_envelope_violations},
                                {"mass_nonincreasing", tr.mass_nonincreasing}});
    res.summary = "mass " + io::format_double(tr.mass.front()) + " -> " + io::format_double(tr.mass.back());
  }
  Evolver ev(v, p.grid, p.k_max, p.grid.boundary == Boundary::periodic ? p.disc : Discretization::finite_difference);
  out.add_grid("snapshot_final", ev.step(u0, p.t_end).to_samples(p.ny), p.t_end, grid_meta(p.grid, p.ny));
}

void add_histogram(io::ArtifactSet& out, const std::string& stem, const mc::TransitionHistogram& h,
                   const mc::PathConfig& cfg, const json& extra) {
  json meta = mc::histogram_metadata(h, cfg);
  meta.update(extra);
  out.add(stem + ".csv", "csv", h.to_csv());
  out.add_json(stem + ".json", meta);
}

void run_simulate(const ExperimentConfig& c, io::ArtifactSet& out, RunResult& res) {
  auto p = simulate_plan(c.params, c.seed);
  const json vj = c.velocity ? *c.velocity : json(nullptr);
  auto sim_v = [&] { return mc::SimVelocity::periodic(VelocityField::from_json(*c.velocity)); };
  if (p.experiment == "histogram") {
    const auto h = mc::simulate(p.starts[0].first, p.starts[0].second, sim_v(), p.cfg);
    add_histogram(out, "histogram", h, p.cfg, {{"velocity", vj}, {"alpha_hat", h.alpha_hat()}});
    res.summary = "alpha_hat " + io::format_double(h.alpha_hat());
  } else if (p.experiment == "doeblin") {
    const auto run = mc::doeblin_estimate(sim_v(), p.times, p.starts, p.cfg);
    json est = json::array();
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const auto e = mc::doeblin_from_histograms(run.histograms[i], p.confidence);
      est.push_back({{"t", run.times[i]}, {"alpha_hat", e.alpha_hat}, {"alpha_lower", e.alpha_lower},
                     {"alpha_upper", e.alpha_upper}, {"argmin_start", e.argmin_start},
                     {"argmin_cell", e.argmin_cell},
                     {"empty_cell", e.empty_cell ? json(*e.empty_cell) : json(nullptr)},
                     {"empty_start", e.empty_start ? json(*e.empty_start) : json(nullptr)}});
      for (std::size_t s = 0; s < run.histograms[i].size(); ++s) {
        mc::PathConfig cs = p.cfg;
        cs.stream = p.cfg.stream + static_cast<std::uint32_t>(s);
        add_histogram(out, "histogram_t" + std::to_string(i) + "_start" + std::to_string(s),
                      run.histograms[i][s], cs, {{"velocity", vj}});
      }
    }
    out.add_json("doeblin.json", {{"confidence", p.confidence}, {"estimates", est}});
    res.summary = "alpha_hat(t=" + io::format_double(run.times.front()) +
                  ") = " + io::format_double(est.front()["alpha_hat"].get<double>());
  } else if (p.experiment == "tv") {
    const auto tv = mc::tv_decay(sim_v(), p.starts[0], p.starts[1], p.times, p.cfg);
    out.add_csv("tv.csv", {"t", "tv", "bias_floor"}, {tv.times, tv.tv, tv.bias_floor});
    out.add_json("tv.json", {{"slope", std::isfinite(tv.slope) ? json(tv.slope) : json(nullptr)},
                             {"fit_points", tv.fit_points}, {"seed", p.cfg.seed}, {"dt", p.cfg.dt},
                             {"n_paths", p.cfg.n_paths}, {"velocity", vj}});
    res.summary = "fitted log-slope " + io::format_double(tv.slope);
  } else if (p.experiment == "arcsine") {
    const auto a = mc::arcsine_experiment(p.cfg);
    out.add_json("arcsine.json", {{"ks", a.ks}, {"n", a.n}, {"dt", p.cfg.dt}, {"t", p.cfg.t_end},
                                  {"seed", p.cfg.seed}, {"y_integrator", to_string(p.cfg.y_integrator)}});
    res.summary = "KS " + io::format_double(a.ks);
  } else {
    const auto k = mc::kolmogorov_experiment(p.cfg);
    out.add_json("kolmogorov.json",
                 {{"max_rel_error", k.max_rel_error}, {"cells_compared", k.cells_compared},
                  {"mean_x", k.mean_x}, {"var_x", k.var_x}, {"mean_y", k.mean_y}, {"var_y", k.var_y},
                  {"x_marginal_chi2_p", k.x_marginal_chi2_p}});
    mc::PathConfig hc = p.cfg;
    hc.geometry = mc::Geometry::plane;
    const double t = p.cfg.t_end;
    hc.box = {-4 * std::sqrt(2 * t), 4 * std::sqrt(2 * t), -4 * std::sqrt(2 * t * t * t / 3),
              4 * std::sqrt(2 * t * t * t / 3)};
    add_histogram(out, "kolmogorov_histogram", k.hist, hc, json::object());
    res.summary = "max relative error " + io::format_double(k.max_rel_error);
  }
}

void run_validate(const ExperimentConfig& c, const RunOptions& o, io::ArtifactSet& out, RunResult& res) {
  validation::SuiteOptions so;
  so.criteria = c.params.at("criteria").get<std::vector<int>>();
  so.seed = c.seed;
  so.artifacts = &out;
  so.on_result = o.on_criterion;
  const auto results = validation::run_suite(so);
  std::string text;
  std::size_t failed = 0;
  for (const auto& r : results) {
    text += validation::format_line(r) + "\n";
    failed += r.passed ? 0 : 1;
  }
  out.add_json("validation.json", {{"seed", c.seed}, {"results", validation::to_json(results)}});
  out.add("validation.txt", "text", text);
  res.summary = std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " criteria passed";
  if (failed) res.exit_code = exit_validation_failed;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_d(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    fail(ErrorCode::io, "report: malformed number '" + s + "'");
  }
}

void run_report(const ExperimentConfig& c, io::ArtifactSet& out, RunResult& res) {
  std::map<std::string, std::filesystem::path> inputs;
  std::vector<std::string> missing;
  for (const char* key : {"bounds", "spectrum", "decay"}) {
    if (c.params.at(key).is_null()) continue;
    std::filesystem::path path = c.params.at(key).get<std::string>();
    if (path.is_relative()) path = c.base_dir / path;
    if (!std::filesystem::exists(path)) missing.push_back(std::string(key) + " (" + path.string() + ")");
    inputs[key] = path;
  }
  if (!missing.empty()) {
    std::string m = "report: missing inputs:";
    for (const auto& s : missing) m += " " + s;
    fail(ErrorCode::io, m);
  }
  std::ostringstream t;
  char line[256];
  auto row = [&](const std::string& what, const std::string& bound, const std::string& counterpart,
                 const std::string& check) {
    std::snprintf(line, sizeof line, "%-34s %-22s %-22s %s\n", what.c_str(), bound.c_str(), counterpart.c_str(),
                  check.c_str());
    t << line;
  };
  auto f = [](double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", x);
    return std::string(b);
  };
  auto fj = [&](const json& x) { return x.is_number() ? f(x.get<double>()) : std::string("undefined"); };
  if (inputs.empty()) {
    res.warnings.push_back("report: no inputs given; the report is empty");
    out.add("report.txt", "text", "");
    res.summary = "empty report";
    return;
  }
  row("quantity", "bound", "counterpart", "check");
  if (inputs.count("bounds")) {
    const auto b = json::parse(io::read_file(inputs["bounds"]));
    row("omega2 (LP)", fj(b.value("omega2", json())), "-", "-");
    row("rho(V) relaxation rate", fj(b.value("rho_V", json())), "-", "-");
    row("r(lambda1) lower bound (omega2)", fj(b.value("r_lower_prop31", json())), "-", "-");
    row("t_P (plateau mixing time)", fj(b.value("t_P", json())), "-", "-");
    row("log alpha_P", fj(b.value("log_alpha_P", json())), "-", "-");
    row("t_H (non-flat mixing time)", fj(b.value("t_H", json())), "-", "-");
    row("log alpha_H", fj(b.value("log_alpha_H", json())), "-", "-");
  }
  if (inputs.count("spectrum")) {
    const auto s = json::parse(io::read_file(inputs["spectrum"]));
    const double r = s.value("r_lambda1", 0.0);
    const auto refs = s.value("references", json::object());
    double p31 = refs.value("prop31", 0.0), p32 = refs.value("prop32_max", 0.0);
    p31 = std::max(p31, refs.value("prop31_periodic_improved", 0.0));
    row("r(lambda1) >= omega2 bound", f(p31), f(r), r >= p31 - 1e-8 ? "PASS" : "FAIL");
    row("r(lambda1) >= omega1 bound", f(p32), f(r), r >= p32 - 1e-8 ? "PASS" : "FAIL");
    if (s.contains("semigroup_max_scaled_norm"))
      row("||e^{-tA}|| e^{(l1+r)t} <= e^{pi/2}", f(std::exp(kPi / 2)), fj(s["semigroup_max_scaled_norm"]),
          s["semigroup_max_scaled_norm"].get<double>() <= std::exp(kPi / 2) * (1 + 1e-4) ? "PASS" : "FAIL");
    if (s.contains("trace")) {
      const auto ss = s["trace"]["s"].get<std::vector<double>>();
      const auto sig = s["trace"]["sigma_min"].get<std::vector<double>>();
      out.add_csv("spectrum_plot.csv", {"s", "sigma_min", "prop31", "prop32"},
                  {ss, sig, std::vector<double>(ss.size(), p31), std::vector<double>(ss.size(), p32)});
    }
  }
  if (inputs.count("decay")) {
    const auto rows = read_csv(io::read_file(inputs["decay"]));
    if (rows.empty() || rows[0].size() < 4 || rows[0][0] != "t")
      fail(ErrorCode::io, "report: decay CSV must have columns t,deviation,envelope,violated_flag");
    std::vector<double> tt, dev, env;
    std::size_t viol = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      tt.push_back(to_d(rows[i][0]));
      dev.push_back(to_d(rows[i][1]));
      env.push_back(to_d(rows[i][2]));
      viol += to_d(rows[i][3]) != 0.0;
    }
    out.add_csv("decay_plot.csv", {"t", "deviation", "envelope"}, {tt, dev, env});
    row("deviation <= envelope", "0 violations", std::to_string(viol) + " violations", viol ? "FAIL" : "PASS");
  }
  out.add("report.txt", "text", t.str());
  res.summary = "report with " + std::to_string(inputs.size()) + " input(s)";
}

}  // namespace

const char* to_string(Task t) {
  switch (t) {
    case Task::bounds: return "bounds";
    case Task::spectrum: return "spectrum";
    case Task::evolve: return "evolve";
    case Task::simulate: return "simulate";
    case Task::validate: return "validate";
    case Task::report: return "report";
  }
  return "?";
}

std::optional<Task> task_from_string(const std::string& s) {
  for (Task t : {Task::bounds, Task::spectrum, Task::evolve, Task::simulate, Task::validate, Task::report})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return exit_config;
    case ErrorCode::io: return exit_io;
    default: return exit_numeric;
  }
}

json ExperimentConfig::to_json() const {
  return {{"task", to_string(task)}, {"velocity", velocity ? *velocity : json(nullptr)}, {"params", params},
          {"output_dir", output_dir.string()}, {"seed", seed}};
}

ExperimentConfig parse_config(const json& input, std::optional<Task> forced_task,
                              const std::filesystem::path& base_dir) {
  if (!input.is_object()) fail(ErrorCode::config, "config must be a JSON object");
  const json& j = input.contains("manifest_version") ? input.at("config") : input;
  if (!j.is_object()) fail(ErrorCode::config, "manifest config must be a JSON object");
  static const std::set<std::string> keys = {"task", "velocity", "params", "output_dir", "seed"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) fail(ErrorCode::config, "config: unknown key '" + k + "'");

  ExperimentConfig c;
  c.base_dir = base_dir;
  std::optional<Task> task = forced_task;
  if (j.contains("task")) {
    if (!j["task"].is_string()) fail(ErrorCode::config, "task must be a string");
    const auto t = task_from_string(j["task"].get<std::string>());
    if (!t) fail(ErrorCode::config, "unknown task '" + j["task"].get<std::string>() + "'");
    if (forced_task && *forced_task != *t)
      fail(ErrorCode::config, std::string("config task '") + to_string(*t) + "' does not match subcommand '" +
                                  to_string(*forced_task) + "'");
    task = t;
  }
  if (!task) fail(ErrorCode::config, "config: missing task");
  c.task = *task;
  if (j.contains("velocity") && !j["velocity"].is_null()) c.velocity = j["velocity"];
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail(ErrorCode::config, "output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) fail(ErrorCode::config, "seed must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.params = normalize_params(c.task, j.value("params", json::object()));
  try {
    check_plans(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    fail(ErrorCode::config, e.what());
  } catch (const json::exception& e) {
    fail(ErrorCode::config, e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Task> forced_task) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::config, "config file not found: " + path.string());
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, forced_task, path.parent_path().empty() ? "." : path.parent_path());
}

BoundsOptions bounds_options(const json& params) {
  const json p = normalize_params(Task::bounds, params);
  try {
    return bounds_plan(p);
  } catch (const json::exception& e) {
    fail(ErrorCode::config, e.what());
  }
}

json schema() {
  json s = {{"top_level", {{"task", "bounds | spectrum | evolve | simulate | validate | report"},
                           {"velocity", "velocity object (see README)"},
                           {"params", "task parameters below"},
                           {"output_dir", "string"},
                           {"seed", "nonnegative integer"}}}};
  for (const auto& [task, params] : table()) {
    json t = json::object();
    for (const auto& p : params) t[p.name] = {{"default", p.def}, {"type", type_name(p.type)}};
    s["params"][to_string(task)] = t;
  }
  return s;
}

RunResult run(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig c = input;
  if (options.seed) c.seed = *options.seed;
  if (options.output_dir) c.output_dir = *options.output_dir;
  RunResult res;
  res.output_dir = c.output_dir;
  io::ArtifactSet out;
  if (options.log) options.log(std::string("running ") + to_string(c.task));
  switch (c.task) {
    case Task::bounds: run_bounds(c, out, res); break;
    case Task::spectrum: run_spectrum(c, out, res); break;
    case Task::evolve: run_evolve(c, out, res); break;
    case Task::simulate: run_simulate(c, out, res); break;
    case Task::validate: run_validate(c, options, out, res); break;
    case Task::report: run_report(c, out, res); break;
  }
  json meta = {{"manifest_version", kManifestVersion}, {"tool", "mixrate"}, {"task", to_string(c.task)},
               {"seed", c.seed}, {"config", c.to_json()}};
  res.manifest = out.write(c.output_dir, meta);
  return res;
}

std::string decay_csv(const DecayTrace& tr) {
  std::vector<double> flag(tr.violated.size());
  for (std::size_t i = 0; i < flag.size(); ++i) flag[i] = tr.violated[i] ? 1.0 : 0.0;
  return io::csv({"t", "deviation", "envelope", "violated_flag"}, {tr.t, tr.deviation, tr.envelope, flag});
}

std::string sweep_csv(const SpectralSummary& s) {
  std::vector<double> a, b;
  for (const auto& [x, y] : s.trace) {
    a.push_back(x);
    b.push_back(y);
  }
  return io::csv({"s", "sigma_min"}, {a, b});
}

}  // namespace mixrate::tasks
