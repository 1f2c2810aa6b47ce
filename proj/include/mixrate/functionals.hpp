// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mixrate/boundary.hpp"
#include "mixrate/lp.hpp"
#include "mixrate/velocity.hpp"

namespace mixrate {

// max int V phi e1^2 over Lipschitz phi with |phi| <= 1, |phi'| <= 2 pi / |I|
// and int phi e1^2 = 0. The weight e1^2 follows the boundary condition.
struct Omega2Problem {
  VelocityField v;
  Boundary boundary = Boundary::periodic;
  Interval interval{0.0, 1.0};

  static Omega2Problem torus(const VelocityField& v) { return {v, Boundary::periodic, {0.0, 1.0}}; }
  static Omega2Problem dirichlet(const VelocityField& v, Interval i) {
    return {v, Boundary::dirichlet, i};
  }
};

// The LP data: nodal objective and constraint weights from the shared fine
// midpoint lattice, and the per-step Lipschitz bound.
struct Omega2Lp {
  std::vector<double> nodes;
  std::vector<double> c;  // int V e1^2 hat_i
  std::vector<double> d;  // int e1^2 hat_i
  double delta = 0.0;
  bool wrap = false;
};

// grid_n >= 2 here; omega2() itself requires grid_n >= 16.
Omega2Lp omega2_lp_data(const Omega2Problem& problem, std::size_t grid_n);

struct Omega2Result {
  double value = 0.0;
  std::vector<double> nodes;
  std::vector<double> phi;
  std::size_t iterations = 0;
};

Omega2Result omega2_solve(const Omega2Problem& problem, std::size_t grid_n);
// Solves prebuilt LP data; accepts coarse grids (used by the 8-node oracle check).
Omega2Result omega2_solve_lp(const Omega2Lp& data);
double omega2(const Omega2Problem& problem, std::size_t grid_n);

// Minimum affine residual of PV over lattice subintervals J of I with
// |J| >= 2 eps. Accepts eps = |I|/2 (then only J = I qualifies).
double omega1(const VelocityField& v, Interval i, double eps, std::size_t j_grid = 256);

// phi(s) = 36 s tan s on [0, pi/2) and Phi(s) = 144 s tan 2s on [0, pi/4),
// inverted by bisection.
double phi_small(double s);
double phi_small_inverse(double y);
double phi_wei(double s);
double phi_wei_inverse(double y);

double rho_V(double omega2, double osc);
double rho_wei(double omega1_full);
double prop31_bound(double omega2, double osc, double interval_len, bool periodic_improved);
double prop32_bound(double omega1_eps, double eps, double lambda1);

struct Thm12Constants {
  double t_P = 0.0;
  double alpha_P = 0.0;
  double log_alpha_P = 0.0;
};
Thm12Constants thm12_constants(double ell, double dv);

struct Thm13Constants {
  double beta = 0.0;
  double t_H = 0.0;
  double alpha_H = 0.0;  // underflows to 0 for realistic inputs; see log_alpha_H
  double log_alpha_H = 0.0;
};
Thm13Constants thm13_constants(double interval_len, double osc, double omega2_dirichlet, double K);

struct DoeblinConstants {
  double C = 1.0;
  double rho = 0.0;
  double C_minus_one = 0.0;  // alpha / (1 - alpha), exact when C rounds to 1
  double log_rho = 0.0;
};
DoeblinConstants doeblin_constants(double t_star, double alpha_star);
// Same, from log(alpha_star); usable when alpha_star underflows.
DoeblinConstants doeblin_constants_log(double t_star, double log_alpha_star);

struct DoeblinCheck {
  bool precondition_ok = true;
  std::string precondition_message;
  std::optional<std::pair<std::size_t, std::size_t>> failing_entry;
  double C = 0.0;
  double rho = 0.0;
  std::vector<double> tv;        // max over rows of TV(kernel^n row, uniform), n = 0..horizon
  std::vector<double> envelope;  // C e^{-rho n}
  std::vector<double> min_entry; // N * min entry of kernel^n
  std::optional<std::size_t> first_violation;
};

// The kernel must be doubly stochastic (uniform invariant) and satisfy
// kernel^t_star_steps >= alpha_star / N entrywise.
DoeblinCheck doeblin_iterate(const Eigen::MatrixXd& kernel, std::size_t t_star_steps,
                             double alpha_star, std::size_t horizon);

struct BoundsOptions {
  std::size_t omega2_grid = 256;
  std::size_t j_grid = 128;
  std::vector<double> eps_list{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> h_eps_grid{0.02, 0.05, 0.1, 0.2, 0.4, 0.8};
  std::optional<Interval> h_interval;  // defaults to the domain
  std::optional<double> K;             // overrides the scan estimate
};

struct BoundsReport {
  double osc = 0.0;
  double omega2 = 0.0;
  std::vector<std::pair<double, double>> omega1_table;
  double omega1_full = 0.0;
  double rho_V = 0.0;
  double rho_wei = 0.0;
  double r_lower_prop31 = 0.0;
  std::optional<double> r_lower_prop31_periodic_improved;
  std::vector<std::pair<double, double>> r_lower_prop32;
  std::optional<PlateauPair> plateau_pair;
  std::optional<Thm12Constants> thm12;
  std::optional<HEstimate> h_estimate;
  std::optional<double> omega2_dirichlet;
  std::optional<Thm13Constants> thm13;
  std::optional<DoeblinConstants> doeblin;
  std::string doeblin_source;
  std::map<std::string, std::string> provenance;

  nlohmann::json to_json() const;
};

BoundsReport compute_bounds(const VelocityField& v, const BoundsOptions& options = {});

}  // namespace mixrate
