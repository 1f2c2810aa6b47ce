// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mixrate/boundary.hpp"
#include "mixrate/velocity.hpp"

namespace mixrate {

enum class Discretization {
  automatic,          // Fourier when periodic and V smooth, else finite differences
  finite_difference,  // second-order centered
  spectral,           // Fourier collocation (periodic) or sine transform (Dirichlet)
};

const char* to_string(Discretization d);

// Discretization of A_k = -d^2/dx^2 + 2 pi i k V on the interval. Periodic
// grids use n nodes lo + j h with h = |I|/n; Dirichlet grids use the n
// interior nodes lo + (j+1) h with h = |I|/(n+1).
class ModeOperator {
 public:
  ModeOperator(const VelocityField& v, Boundary boundary, Interval interval, std::size_t n, int k,
               Discretization disc = Discretization::automatic);

  Boundary boundary() const { return boundary_; }
  Interval interval() const { return interval_; }
  std::size_t n() const { return nodes_.size(); }
  int k() const { return k_; }
  Discretization discretization() const { return disc_; }
  double h() const { return h_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const Eigen::VectorXd& v_samples() const { return v_; }
  // Symmetric positive semidefinite discretization of -d^2/dx^2.
  const Eigen::MatrixXd& laplacian() const { return lap_; }
  // Smallest eigenvalue of laplacian(); the shift used for r(lambda_1).
  double lambda1_discrete() const { return lambda1_disc_; }
  double skew_scale() const;  // 2 pi k
  Eigen::MatrixXcd matrix() const;

  // exp(-dt A), cached per dt. Thread safe.
  std::shared_ptr<const Eigen::MatrixXcd> propagator(double dt) const;

 private:
  Boundary boundary_;
  Interval interval_;
  int k_;
  Discretization disc_;
  double h_ = 0.0;
  std::vector<double> nodes_;
  Eigen::VectorXd v_;
  Eigen::MatrixXd lap_;
  double lambda1_disc_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const Eigen::MatrixXcd>> cache_;
};

struct LaplaceEigs {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> nodes;
  Eigen::VectorXd e1;  // sampled ground state, h * sum e1^2 = 1
};

// Closed-form eigen-data sampled on the same grid a ModeOperator of size n uses.
LaplaceEigs laplace_eigs(Boundary boundary, Interval interval, std::size_t n = 256);

// Smallest singular value of A - lambda1 - i s.
double sigma_min(const ModeOperator& op, double s);

struct SpectralSummary {
  double lambda1 = 0.0;           // closed form
  double lambda2 = 0.0;           // closed form
  double lambda1_discrete = 0.0;  // shift actually used
  Eigen::VectorXd e1;
  double r_lambda1 = 0.0;
  double s_argmin = 0.0;
  bool converged = true;
  std::pair<double, double> bracket{0.0, 0.0};
  std::pair<double, double> window{0.0, 0.0};
  std::size_t s_points = 0;
  std::size_t window_extensions = 0;
  std::size_t evaluations = 0;
  std::vector<std::pair<double, double>> trace;  // (s, sigma_min), sorted by s

  nlohmann::json to_json() const;
};

SpectralSummary r_lambda1(const ModeOperator& op,
                          std::optional<std::pair<double, double>> s_window = std::nullopt,
                          std::size_t s_points = 65);

std::pair<double, double> default_s_window(const ModeOperator& op);

// Operator 2-norm of exp(-t A) for each t.
std::vector<double> semigroup_norm(const ModeOperator& op, const std::vector<double>& times);

std::shared_ptr<const Eigen::MatrixXcd> mode_propagator(const ModeOperator& op, double dt);

}  // namespace mixrate
