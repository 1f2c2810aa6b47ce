/* Copyright 2026 The mixrate Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libmixrate. Every call returns an mr_status; on failure
 * mr_last_error() describes the problem (thread local, valid until the next
 * call on the same thread). Strings returned through char** are owned by the
 * caller and released with mr_string_free.
 */
#ifndef MIXRATE_MIXRATE_H
#define MIXRATE_MIXRATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(MIXRATE_BUILDING_LIBRARY)
#define MR_API __attribute__((visibility("default")))
#else
#define MR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mr_status {
  MR_OK = 0,
  MR_INVALID_ARGUMENT = 1,
  MR_DOMAIN = 2,
  MR_NUMERIC = 3,
  MR_CONFIG = 4,
  MR_IO = 5,
  MR_ALIASING = 6,
  MR_UNDEFINED_BOUND = 7,
  MR_INTERNAL = 99
} mr_status;

typedef enum mr_boundary { MR_PERIODIC = 0, MR_DIRICHLET = 1 } mr_boundary;
typedef enum mr_y_integrator { MR_LEFT_ENDPOINT = 0, MR_TRAPEZOID = 1 } mr_y_integrator;
typedef enum mr_geometry { MR_TORUS = 0, MR_PLANE = 1 } mr_geometry;

typedef struct mr_velocity mr_velocity;

typedef struct mr_path_config {
  double dt;
  uint64_t n_paths;
  double t_end;
  uint64_t seed;
  mr_y_integrator y_integrator;
  uint32_t cells; /* per axis; torus geometry */
} mr_path_config;

typedef void (*mr_criterion_fn)(int id, int passed, const char* line, void* user);
typedef void (*mr_log_fn)(const char* message, void* user);

typedef struct mr_run_options {
  const char* task;       /* subcommand; NULL takes the task from the config */
  const char* output_dir; /* NULL keeps the config value */
  int has_seed;
  uint64_t seed;
  unsigned workers;       /* 0 keeps the current setting */
  mr_criterion_fn on_criterion;
  mr_log_fn on_log;
  void* user;
} mr_run_options;

MR_API const char* mr_version(void);
MR_API const char* mr_last_error(void);
MR_API void mr_string_free(char* s);
/* Process exit status the CLI uses for a failed call with this status. */
MR_API int mr_exit_code(mr_status status);

MR_API mr_status mr_set_workers(unsigned n);
MR_API unsigned mr_workers(void);

MR_API mr_status mr_velocity_from_json(const char* json, mr_velocity** out);
MR_API void mr_velocity_free(mr_velocity* v);
MR_API mr_status mr_velocity_to_json(const mr_velocity* v, char** out);
MR_API mr_status mr_velocity_eval(const mr_velocity* v, double x, double* out);
MR_API mr_status mr_velocity_osc(const mr_velocity* v, double* out);

/* Full bounds report as JSON; options_json holds bounds params or NULL. */
MR_API mr_status mr_bounds_json(const mr_velocity* v, const char* options_json, char** out);
MR_API mr_status mr_omega2_torus(const mr_velocity* v, size_t grid_n, double* out);
MR_API mr_status mr_omega1(const mr_velocity* v, double lo, double hi, double eps, double* out);
MR_API mr_status mr_thm12(double ell, double dv, double* t_p, double* log_alpha_p);
MR_API mr_status mr_doeblin(double t_star, double alpha_star, double* c, double* rho);

MR_API mr_status mr_r_lambda1(const mr_velocity* v, mr_boundary boundary, double lo, double hi, size_t n,
                              int k, double* r, double* s_argmin);
MR_API mr_status mr_heat_torus(double x, double xp, double t, double* out);
MR_API mr_status mr_kolmogorov_kernel(double x0, double y0, double x, double y, double t, double* out);

/* Torus simulation; counts has cells*cells entries, row = x cell. */
MR_API mr_status mr_simulate_histogram(const mr_velocity* v, double x0, double y0, const mr_path_config* cfg,
                                       uint64_t* counts, size_t counts_len);

/* Validates a config; writes its normalized form. */
MR_API mr_status mr_parse_config(const char* json_text, const char* task, char** normalized);
/* Runs a config file (NULL path: empty config, needs options->task).
 * exit_code receives the process status (0 ok, 2 validation failure);
 * manifest receives the manifest JSON when non-NULL. */
MR_API mr_status mr_run_task(const char* config_path, const mr_run_options* options, int* exit_code,
                             char** manifest);
MR_API mr_status mr_schema_json(char** out);

#ifdef __cplusplus
}
#endif

#endif
