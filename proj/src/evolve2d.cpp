// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/evolve2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixrate/error.hpp"
#include "mixrate/functionals.hpp"
#include "mixrate/kernels.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {
namespace {
constexpr double kPi = std::numbers::pi;
}

double XGrid::h() const {
  return boundary == Boundary::periodic ? interval.length() / static_cast<double>(n)
                                        : interval.length() / static_cast<double>(n + 1);
}

std::vector<double> XGrid::nodes() const {
  std::vector<double> x(n);
  const double step = h();
  for (std::size_t i = 0; i < n; ++i)
    x[i] = interval.lo + static_cast<double>(boundary == Boundary::periodic ? i : i + 1) * step;
  return x;
}

ModeField::ModeField(XGrid grid, int k_max) : grid_(grid), k_max_(k_max) {
  require(k_max >= 0, ErrorCode::invalid_argument, "ModeField: k_max must be nonnegative");
  require(grid.n >= 2, ErrorCode::invalid_argument, "ModeField: need at least two x nodes");
  modes_.assign(static_cast<std::size_t>(2 * k_max + 1),
                Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.n)));
}

std::size_t ModeField::index(int k) const {
  require(k >= -k_max_ && k <= k_max_, ErrorCode::invalid_argument, "ModeField: mode out of range");
  return static_cast<std::size_t>(k + k_max_);
}

ModeField ModeField::from_samples(const Eigen::MatrixXd& samples, XGrid grid, int k_max) {
  require(static_cast<std::size_t>(samples.rows()) == grid.n, ErrorCode::invalid_argument,
          "from_samples: row count must equal the x grid size");
  const auto ny = static_cast<std::size_t>(samples.cols());
  if (ny < static_cast<std::size_t>(2 * k_max + 1))
    fail(ErrorCode::aliasing, "from_samples: Ny = " + std::to_string(ny) +
                                  " cannot resolve k_max = " + std::to_string(k_max));
  ModeField f(grid, k_max);
  const double nyd = static_cast<double>(ny);
  for (int k = -k_max; k <= k_max; ++k) {
    Eigen::VectorXcd w(static_cast<Eigen::Index>(ny));
    for (std::size_t j = 0; j < ny; ++j) {
      // Reduce k j mod Ny before scaling to keep the phase exact.
      const auto kj = static_cast<long long>(k) * static_cast<long long>(j);
      const auto r = static_cast<double>(((kj % static_cast<long long>(ny)) + static_cast<long long>(ny)) %
                                         static_cast<long long>(ny));
      w(static_cast<Eigen::Index>(j)) = std::polar(1.0 / nyd, -2.0 * kPi * r / nyd);
    }
    f.mode(k) = samples.cast<std::complex<double>>() * w;
  }
  return f;
}

Eigen::MatrixXd ModeField::to_samples(std::size_t ny) const {
  require(ny >= 1, ErrorCode::invalid_argument, "to_samples: ny must be positive");
  const auto nx = static_cast<Eigen::Index>(grid_.n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nx, static_cast<Eigen::Index>(ny));
  const double nyd = static_cast<double>(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(nx);
    for (int k = -k_max_; k <= k_max_; ++k) {
      const auto kj = static_cast<long long>(k) * static_cast<long long>(j);
      const auto r = static_cast<double>(((kj % static_cast<long long>(ny)) + static_cast<long long>(ny)) %
                                         static_cast<long long>(ny));
      col += mode(k) * std::polar(1.0, 2.0 * kPi * r / nyd);
    }
    out.col(static_cast<Eigen::Index>(j)) = col.real();
  }
  return out;
}

double ModeField::mass() const { return grid_.h() * mode(0).real().sum(); }

double ModeField::l2_norm() const {
  double s = 0.0;
  for (const auto& m : modes_) s += m.squaredNorm();
  return std::sqrt(grid_.h() * s);
}

double ModeField::deviation_from_mean() const {
  const double len = grid_.interval.length();
  const double mean = mass() / len;
  double s = 0.0;
  for (int k = -k_max_; k <= k_max_; ++k) {
    if (k == 0) {
      s += (mode(0).array() - mean).abs2().sum();
    } else {
      s += mode(k).squaredNorm();
    }
  }
  // Dirichlet grids omit the zero boundary nodes, where u - mean = -mean.
  if (grid_.boundary == Boundary::dirichlet) s += mean * mean;
  return std::sqrt(grid_.h() * s);
}

double ModeField::mode_sup(int k) const { return mode(k).cwiseAbs().maxCoeff(); }

bool ModeField::is_conjugate_symmetric(double tol) const {
  for (int k = 1; k <= k_max_; ++k)
    if ((mode(-k) - mode(k).conjugate()).cwiseAbs().maxCoeff() > tol) return false;
  return mode(0).imag().cwiseAbs().maxCoeff() <= tol;
}

ModeField sample_field(const std::function<double(double, double)>& f, XGrid grid, int k_max) {
  const auto ny = static_cast<std::size_t>(2 * k_max + 1);
  const auto x = grid.nodes();
  Eigen::MatrixXd s(static_cast<Eigen::Index>(grid.n), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          f(x[i], static_cast<double>(j) / static_cast<double>(ny));
  return ModeField::from_samples(s, grid, k_max);
}

// ---------------------------------------------------------------------------

Evolver::Evolver(VelocityField v, XGrid grid, int k_max, Discretization disc)
    : v_(std::move(v)), grid_(grid), k_max_(k_max), disc_(disc) {
  require(k_max >= 0, ErrorCode::invalid_argument, "Evolver: k_max must be nonnegative");
}

const ModeOperator& Evolver::op(int k) const {
  require(k >= 0 && k <= k_max_, ErrorCode::invalid_argument, "Evolver: mode out of range");
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = ops_[k];
  if (!slot)
    slot = std::make_unique<ModeOperator>(v_, grid_.boundary, grid_.interval, grid_.n, k, disc_);
  return *slot;
}

ModeField Evolver::step(const ModeField& field, double dt) const {
  require(dt > 0, ErrorCode::invalid_argument, "step: dt must be positive");
  require(field.k_max() <= k_max_ && field.grid().n == grid_.n &&
              field.grid().boundary == grid_.boundary,
          ErrorCode::invalid_argument, "step: field does not match the evolver grid");
  ModeField out = field;
  const int km = field.k_max();
  parallel::for_each_index(static_cast<std::size_t>(km + 1), [&](std::size_t idx) {
    const int k = static_cast<int>(idx);
    const auto p = op(k).propagator(dt);
    out.mode(k) = (*p) * field.mode(k);
    if (k > 0) out.mode(-k) = p->conjugate() * field.mode(-k);
  });
  return out;
}

// ---------------------------------------------------------------------------

DecayTrace relax_trace(const ModeField& u0, const VelocityField& v, double t_end,
                       std::size_t samples, const RelaxOptions& options) {
  require(t_end > 0 && samples >= 1, ErrorCode::invalid_argument,
          "relax_trace: need t_end > 0 and samples >= 1");
  require(u0.is_conjugate_symmetric(1e-10), ErrorCode::invalid_argument,
          "relax_trace: u0 must be real");
  const XGrid& grid = u0.grid();
  DecayTrace tr;
  tr.omega2 = omega2(Omega2Problem{v, grid.boundary, grid.interval}, options.omega2_grid);
  tr.rho = rho_V(tr.omega2, v.osc());

  Evolver ev(v, grid, u0.k_max(), options.disc);
  const double dev0 = u0.deviation_from_mean();

  if (options.check_r_hat) {
    double r_hat = std::numeric_limits<double>::infinity();
    const double scale = std::max(1e-300, u0.l2_norm());
    for (int k = 0; k <= u0.k_max(); ++k) {
      const bool active = u0.mode(k).norm() > 1e-12 * scale || u0.mode(-k).norm() > 1e-12 * scale;
      if (!active) continue;
      if (k == 0) {
        // The mean-free part of mode 0 decays at the spectral gap.
        r_hat = std::min(r_hat, laplace_lambda2(grid.boundary, grid.interval));
        continue;
      }
      const auto s = r_lambda1(ev.op(k), std::nullopt, options.r_hat_s_points);
      r_hat = std::min(r_hat, s.lambda1_discrete + s.r_lambda1);
    }
    if (std::isfinite(r_hat)) tr.r_hat = r_hat;
  }

  const double dt = t_end / static_cast<double>(samples);
  ModeField u = u0;
  for (std::size_t i = 0; i <= samples; ++i) {
    if (i > 0) u = ev.step(u, dt);
    const double t = dt * static_cast<double>(i);
    const double dev = u.deviation_from_mean();
    const double env = std::exp(kPi / 2 - tr.rho * t) * dev0;
    const bool bad = dev > env * (1.0 + 1e-10) + 1e-14;
    tr.t.push_back(t);
    tr.deviation.push_back(dev);
    tr.envelope.push_back(env);
    tr.violated.push_back(bad);
    if (bad && !tr.first_violation) tr.first_violation = i;
    if (tr.r_hat) {
      const double renv = std::exp(kPi / 2 - *tr.r_hat * t) * dev0;
      tr.r_hat_envelope.push_back(renv);
      if (dev > renv * (1.0 + 1e-8) + 1e-14 && !tr.first_r_hat_violation) tr.first_r_hat_violation = i;
    }
  }
  return tr;
}

StripTrace dirichlet_strip_trace(const ModeField& nu0, const VelocityField& v, double t_end,
                                 std::size_t samples) {
  const XGrid& grid = nu0.grid();
  require(grid.boundary == Boundary::dirichlet, ErrorCode::invalid_argument,
          "dirichlet_strip_trace: field must live on a Dirichlet grid");
  require(t_end > 0 && samples >= 1, ErrorCode::invalid_argument,
          "dirichlet_strip_trace: need t_end > 0 and samples >= 1");
  const Eigen::MatrixXd grid0 = nu0.to_samples(static_cast<std::size_t>(2 * nu0.k_max() + 1));
  require(grid0.minCoeff() >= -1e-12, ErrorCode::invalid_argument,
          "dirichlet_strip_trace: nu0 must be nonnegative");

  StripTrace tr;
  const double k0 = kernels::kappa0();
  tr.lower_envelope_applies = nu0.mode(0).real().minCoeff() >= k0;
  const double lam1 = laplace_lambda1(Boundary::dirichlet, grid.interval);
  const auto x = grid.nodes();
  const double len = grid.interval.length();
  for (int k = 0; k <= nu0.k_max(); ++k) tr.k.push_back(k);

  Evolver ev(v, grid, nu0.k_max(), Discretization::finite_difference);
  const double dt = t_end / static_cast<double>(samples);
  ModeField nu = nu0;
  for (std::size_t i = 0; i <= samples; ++i) {
    if (i > 0) nu = ev.step(nu, dt);
    const double t = dt * static_cast<double>(i);
    tr.t.push_back(t);
    std::vector<double> row;
    for (int k : tr.k) row.push_back(nu.mode_sup(k));
    tr.sup.push_back(std::move(row));
    const double m = nu.mass();
    if (!tr.mass.empty() && m > tr.mass.back() * (1.0 + 1e-12) + 1e-14) tr.mass_nonincreasing = false;
    tr.mass.push_back(m);
    if (tr.lower_envelope_applies) {
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double bound = k0 * std::exp(-lam1 * t) * std::sin(kPi * (x[j] - grid.interval.lo) / len);
        margin = std::min(margin, nu.mode(0)(static_cast<Eigen::Index>(j)).real() - bound);
      }
      tr.mode0_min_margin.push_back(margin);
      if (margin < -1e-12) ++tr.lower_envelope_violations;
    } else {
      tr.mode0_min_margin.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return tr;
}

}  // namespace mixrate
