// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/mixrate.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "mixrate/error.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/kernels.hpp"
#include "mixrate/mcsim.hpp"
#include "mixrate/parallel.hpp"
#include "mixrate/spectral1d.hpp"
#include "mixrate/tasks.hpp"
#include "mixrate/validation.hpp"
#include "mixrate/velocity.hpp"

struct mr_velocity {
  mixrate::VelocityField v;
};

namespace {

thread_local std::string last_error;

template <class F>
mr_status guard(F&& f) {
  try {
    last_error.clear();
    f();
    return MR_OK;
  } catch (const mixrate::Error& e) {
    last_error = e.what();
    return static_cast<mr_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return MR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return MR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) mixrate::fail(mixrate::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::optional<mixrate::tasks::Task> task_arg(const char* task) {
  if (!task) return std::nullopt;
  auto t = mixrate::tasks::task_from_string(task);
  if (!t) mixrate::fail(mixrate::ErrorCode::config, std::string("unknown task '") + task + "'");
  return t;
}

}  // namespace

extern "C" {

const char* mr_version(void) { return "0.1.0"; }
const char* mr_last_error(void) { return last_error.c_str(); }
void mr_string_free(char* s) { std::free(s); }

int mr_exit_code(mr_status status) {
  switch (status) {
    case MR_OK: return 0;
    case MR_CONFIG: return mixrate::tasks::exit_config;
    case MR_IO: return mixrate::tasks::exit_io;
    default: return mixrate::tasks::exit_numeric;
  }
}

mr_status mr_set_workers(unsigned n) {
  return guard([&] { mixrate::parallel::set_workers(n); });
}
unsigned mr_workers(void) { return mixrate::parallel::workers(); }

mr_status mr_velocity_from_json(const char* json, mr_velocity** out) {
  return guard([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      mixrate::fail(mixrate::ErrorCode::config, e.what());
    }
    *out = new mr_velocity{mixrate::VelocityField::from_json(j)};
  });
}

void mr_velocity_free(mr_velocity* v) { delete v; }

mr_status mr_velocity_to_json(const mr_velocity* v, char** out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    *out = dup(v->v.to_json().dump());
  });
}

mr_status mr_velocity_eval(const mr_velocity* v, double x, double* out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    *out = v->v.eval(x);
  });
}

mr_status mr_velocity_osc(const mr_velocity* v, double* out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    *out = v->v.osc();
  });
}

mr_status mr_bounds_json(const mr_velocity* v, const char* options_json, char** out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    const auto params = options_json ? nlohmann::json::parse(options_json) : nlohmann::json::object();
    const auto o = mixrate::tasks::bounds_options(params);
    *out = dup(mixrate::compute_bounds(v->v, o).to_json().dump());
  });
}

mr_status mr_omega2_torus(const mr_velocity* v, size_t grid_n, double* out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    *out = mixrate::omega2(mixrate::Omega2Problem::torus(v->v), grid_n);
  });
}

mr_status mr_omega1(const mr_velocity* v, double lo, double hi, double eps, double* out) {
  return guard([&] {
    need(v, "v");
    need(out, "out");
    *out = mixrate::omega1(v->v, {lo, hi}, eps);
  });
}

mr_status mr_thm12(double ell, double dv, double* t_p, double* log_alpha_p) {
  return guard([&] {
    const auto c = mixrate::thm12_constants(ell, dv);
    if (t_p) *t_p = c.t_P;
    if (log_alpha_p) *log_alpha_p = c.log_alpha_P;
  });
}

mr_status mr_doeblin(double t_star, double alpha_star, double* c, double* rho) {
  return guard([&] {
    const auto d = mixrate::doeblin_constants(t_star, alpha_star);
    if (c) *c = d.C;
    if (rho) *rho = d.rho;
  });
}

mr_status mr_r_lambda1(const mr_velocity* v, mr_boundary boundary, double lo, double hi, size_t n, int k,
                       double* r, double* s_argmin) {
  return guard([&] {
    need(v, "v");
    const auto b = boundary == MR_DIRICHLET ? mixrate::Boundary::dirichlet : mixrate::Boundary::periodic;
    const auto s = mixrate::r_lambda1(mixrate::ModeOperator(v->v, b, {lo, hi}, n, k));
    if (r) *r = s.r_lambda1;
    if (s_argmin) *s_argmin = s.s_argmin;
  });
}

mr_status mr_heat_torus(double x, double xp, double t, double* out) {
  return guard([&] {
    need(out, "out");
    *out = mixrate::kernels::heat_torus(x, xp, t);
  });
}

mr_status mr_kolmogorov_kernel(double x0, double y0, double x, double y, double t, double* out) {
  return guard([&] {
    need(out, "out");
    *out = mixrate::kernels::kolmogorov_kernel({x0, y0, x, y, t});
  });
}

mr_status mr_simulate_histogram(const mr_velocity* v, double x0, double y0, const mr_path_config* cfg,
                                uint64_t* counts, size_t counts_len) {
  return guard([&] {
    need(v, "v");
    need(cfg, "cfg");
    need(counts, "counts");
    mixrate::mc::PathConfig c;
    c.dt = cfg->dt;
    c.n_paths = cfg->n_paths;
    c.t_end = cfg->t_end;
    c.seed = cfg->seed;
    c.y_integrator = cfg->y_integrator == MR_TRAPEZOID ? mixrate::mc::YIntegrator::trapezoid
                                                       : mixrate::mc::YIntegrator::left_endpoint;
    c.cells = cfg->cells;
    mixrate::require(counts_len == static_cast<size_t>(cfg->cells) * cfg->cells,
                     mixrate::ErrorCode::invalid_argument, "counts_len must equal cells * cells");
    const auto h = mixrate::mc::simulate(x0, y0, mixrate::mc::SimVelocity::periodic(v->v), c);
    std::copy(h.counts.begin(), h.counts.end(), counts);
  });
}

mr_status mr_parse_config(const char* json_text, const char* task, char** normalized) {
  return guard([&] {
    need(json_text, "json_text");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      mixrate::fail(mixrate::ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
    }
    const auto c = mixrate::tasks::parse_config(j, task_arg(task));
    if (normalized) *normalized = dup(c.to_json().dump(2));
  });
}

mr_status mr_run_task(const char* config_path, const mr_run_options* options, int* exit_code, char** manifest) {
  return guard([&] {
    const mr_run_options o = options ? *options : mr_run_options{};
    const auto task = task_arg(o.task);
    const auto cfg = config_path ? mixrate::tasks::load_config(config_path, task)
                                 : mixrate::tasks::parse_config(nlohmann::json::object(), task);
    if (o.workers) mixrate::parallel::set_workers(o.workers);
    mixrate::tasks::RunOptions ro;
    if (o.output_dir) ro.output_dir = o.output_dir;
    if (o.has_seed) ro.seed = o.seed;
    if (o.on_log) ro.log = [&](const std::string& m) { o.on_log(m.c_str(), o.user); };
    if (o.on_criterion)
      ro.on_criterion = [&](const mixrate::validation::CriterionResult& r) {
        o.on_criterion(r.id, r.passed ? 1 : 0, mixrate::validation::format_line(r).c_str(), o.user);
      };
    const auto res = mixrate::tasks::run(cfg, ro);
    if (o.on_log) {
      o.on_log(res.summary.c_str(), o.user);
      for (const auto& w : res.warnings) o.on_log(("warning: " + w).c_str(), o.user);
    }
    if (exit_code) *exit_code = res.exit_code;
    if (manifest) *manifest = dup(res.manifest.dump(2));
  });
}

mr_status mr_schema_json(char** out) {
  return guard([&] {
    need(out, "out");
    *out = dup(mixrate::tasks::schema().dump(2));
  });
}

}  // extern "C"
