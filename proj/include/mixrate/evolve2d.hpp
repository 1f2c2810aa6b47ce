// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mixrate/boundary.hpp"
#include "mixrate/spectral1d.hpp"
#include "mixrate/velocity.hpp"

namespace mixrate {

// Grid shared by every mode: periodic x grids hold n nodes lo + j h,
// Dirichlet grids the n interior nodes (same layout as ModeOperator).
struct XGrid {
  Boundary boundary = Boundary::periodic;
  Interval interval{0.0, 1.0};
  std::size_t n = 64;

  double h() const;
  std::vector<double> nodes() const;
};

// u(x, y) = sum_{|k| <= k_max} u_k(x) e^{2 pi i k y}.
class ModeField {
 public:
  ModeField(XGrid grid, int k_max);

  // samples(i, j) = u(x_i, j / Ny). Requires Ny >= 2 k_max + 1.
  static ModeField from_samples(const Eigen::MatrixXd& samples, XGrid grid, int k_max);
  // Real part of the synthesized field on Ny equispaced y nodes.
  Eigen::MatrixXd to_samples(std::size_t ny) const;

  const XGrid& grid() const { return grid_; }
  int k_max() const { return k_max_; }
  Eigen::VectorXcd& mode(int k) { return modes_[index(k)]; }
  const Eigen::VectorXcd& mode(int k) const { return modes_[index(k)]; }

  // int int u dx dy
  double mass() const;
  // ||u||_{L^2} computed from the modes (Parseval).
  double l2_norm() const;
  // ||u - int u||_{L^2}; the mean is taken over the whole cell I x T.
  double deviation_from_mean() const;
  // max_x |u_k(x)|
  double mode_sup(int k) const;
  bool is_conjugate_symmetric(double tol = 1e-12) const;

 private:
  std::size_t index(int k) const;

  XGrid grid_;
  int k_max_;
  std::vector<Eigen::VectorXcd> modes_;
};

// Exact per-mode time stepping u_k <- exp(-dt A_k) u_k with cached
// propagators. A_{-k} is the complex conjugate of A_k, so only k >= 0 are
// factored.
class Evolver {
 public:
  Evolver(VelocityField v, XGrid grid, int k_max, Discretization disc = Discretization::automatic);

  ModeField step(const ModeField& field, double dt) const;
  const ModeOperator& op(int k) const;  // k >= 0
  const VelocityField& velocity() const { return v_; }
  const XGrid& grid() const { return grid_; }

 private:
  VelocityField v_;
  XGrid grid_;
  int k_max_;
  Discretization disc_;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<ModeOperator>> ops_;
};

struct DecayTrace {
  std::vector<double> t;
  std::vector<double> deviation;
  std::vector<double> envelope;
  std::vector<bool> violated;
  double rho = 0.0;
  double omega2 = 0.0;
  std::optional<std::size_t> first_violation;
  // Optional per-mode check with r_hat = min over active modes of lambda1 + r.
  std::optional<double> r_hat;
  std::vector<double> r_hat_envelope;
  std::optional<std::size_t> first_r_hat_violation;
};

struct RelaxOptions {
  std::size_t omega2_grid = 256;
  bool check_r_hat = false;
  std::size_t r_hat_s_points = 65;
  Discretization disc = Discretization::automatic;
};

// Deviation samples at t_i = t_end i / samples, i = 0..samples, against
// the envelope exp(pi/2 - rho t) * deviation(0) with rho = rho_V(omega2, osc).
DecayTrace relax_trace(const ModeField& u0, const VelocityField& v, double t_end,
                       std::size_t samples, const RelaxOptions& options = {});

struct StripTrace {
  std::vector<double> t;
  std::vector<int> k;                      // mode indices, 0..k_max
  std::vector<std::vector<double>> sup;    // sup[i][m] = ||nu_{k[m]}(t_i)||_inf
  std::vector<double> mass;
  std::vector<double> mode0_min_margin;    // min_x (nu_0 - kappa0 e^{-lambda1 t} sin), NaN if not applicable
  bool lower_envelope_applies = false;     // nu0 >= kappa0 at t = 0
  std::size_t lower_envelope_violations = 0;
  bool mass_nonincreasing = true;
};

StripTrace dirichlet_strip_trace(const ModeField& nu0, const VelocityField& v, double t_end,
                                 std::size_t samples);

// Exact Fourier-in-y data from a function of (x, y): modes computed by an
// Ny-point DFT with Ny = 2 k_max + 1.
ModeField sample_field(const std::function<double(double, double)>& f, XGrid grid, int k_max);

}  // namespace mixrate
