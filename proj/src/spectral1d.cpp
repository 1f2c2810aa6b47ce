// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/spectral1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "mixrate/error.hpp"
#include "mixrate/parallel.hpp"

namespace mixrate {
namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd fd_periodic(std::size_t n, double h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double w = 1.0 / (h * h);
  for (std::size_t j = 0; j < n; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    m(i, i) = 2.0 * w;
    m(i, static_cast<Eigen::Index>((j + 1) % n)) -= w;
    m(i, static_cast<Eigen::Index>((j + n - 1) % n)) -= w;
  }
  return m;
}

Eigen::MatrixXd fd_dirichlet(std::size_t n, double h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double w = 1.0 / (h * h);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    m(i, i) = 2.0 * w;
    if (i > 0) m(i, i - 1) = -w;
    if (i + 1 < static_cast<Eigen::Index>(n)) m(i, i + 1) = -w;
  }
  return m;
}

// -D2 for Fourier collocation on n equispaced nodes of a period of length len.
Eigen::MatrixXd fourier_periodic(std::size_t n, double len) {
  require(n % 2 == 0, ErrorCode::invalid_argument, "Fourier collocation needs an even n");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(ni, ni);
  const double scale = std::pow(2.0 * kPi / len, 2);
  const double nd = static_cast<double>(n);
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index l = 0; l < ni; ++l) {
      if (j == l) {
        m(j, l) = (nd * nd / 12.0 + 1.0 / 6.0) * scale;
      } else {
        const auto d = static_cast<double>(j - l);
        const double s = std::sin(d * kPi / nd);
        const double sign = ((j - l) % 2 == 0) ? 1.0 : -1.0;
        m(j, l) = sign / (2.0 * s * s) * scale;
      }
    }
  }
  return m;
}

// Sine-transform Laplacian with exact eigenvalues (m pi / len)^2.
Eigen::MatrixXd sine_dirichlet(std::size_t n, double len) {
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd s(ni, ni);
  const double np1 = static_cast<double>(n + 1);
  for (Eigen::Index j = 0; j < ni; ++j)
    for (Eigen::Index m = 0; m < ni; ++m)
      s(j, m) = std::sqrt(2.0 / np1) * std::sin(kPi * static_cast<double>((j + 1) * (m + 1)) / np1);
  Eigen::VectorXd lam(ni);
  for (Eigen::Index m = 0; m < ni; ++m) lam(m) = std::pow(static_cast<double>(m + 1) * kPi / len, 2);
  Eigen::MatrixXd out = s * lam.asDiagonal() * s.transpose();
  return 0.5 * (out + out.transpose());
}

double max_singular_value(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

const char* to_string(Discretization d) {
  switch (d) {
    case Discretization::automatic: return "automatic";
    case Discretization::finite_difference: return "finite_difference";
    case Discretization::spectral: return "spectral";
  }
  return "?";
}

ModeOperator::ModeOperator(const VelocityField& v, Boundary boundary, Interval interval,
                           std::size_t n, int k, Discretization disc)
    : boundary_(boundary), interval_(interval), k_(k), disc_(disc) {
  require(n >= 16, ErrorCode::invalid_argument, "ModeOperator: n must be at least 16");
  require(interval.length() > 0 && v.domain().contains(interval), ErrorCode::domain,
          "ModeOperator: interval must lie inside the velocity domain");
  if (disc_ == Discretization::automatic) {
    disc_ = (boundary == Boundary::periodic && v.is_smooth() && n % 2 == 0)
                ? Discretization::spectral
                : Discretization::finite_difference;
  }
  const double len = interval.length();
  nodes_.resize(n);
  if (boundary == Boundary::periodic) {
    h_ = len / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) nodes_[j] = interval.lo + static_cast<double>(j) * h_;
    lap_ = disc_ == Discretization::spectral ? fourier_periodic(n, len) : fd_periodic(n, h_);
    lambda1_disc_ = 0.0;
  } else {
    h_ = len / static_cast<double>(n + 1);
    for (std::size_t j = 0; j < n; ++j) nodes_[j] = interval.lo + static_cast<double>(j + 1) * h_;
    if (disc_ == Discretization::spectral) {
      lap_ = sine_dirichlet(n, len);
      lambda1_disc_ = std::pow(kPi / len, 2);
    } else {
      lap_ = fd_dirichlet(n, h_);
      lambda1_disc_ = std::pow(2.0 / h_ * std::sin(kPi * h_ / (2.0 * len)), 2);
    }
  }
  v_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) v_(static_cast<Eigen::Index>(j)) = v.eval(nodes_[j]);
}

double ModeOperator::skew_scale() const { return 2.0 * kPi * static_cast<double>(k_); }

Eigen::MatrixXcd ModeOperator::matrix() const {
  Eigen::MatrixXcd a = lap_.cast<std::complex<double>>();
  const double w = skew_scale();
  for (Eigen::Index j = 0; j < v_.size(); ++j) a(j, j) += std::complex<double>(0.0, w * v_(j));
  return a;
}

std::shared_ptr<const Eigen::MatrixXcd> ModeOperator::propagator(double dt) const {
  require(dt > 0, ErrorCode::invalid_argument, "propagator: dt must be positive");
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    const auto it = cache_.find(dt);
    if (it != cache_.end()) return it->second;
  }
  Eigen::MatrixXcd m = (-dt * matrix()).exp();
  auto ptr = std::make_shared<const Eigen::MatrixXcd>(std::move(m));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.emplace(dt, ptr).first->second;
}

std::shared_ptr<const Eigen::MatrixXcd> mode_propagator(const ModeOperator& op, double dt) {
  return op.propagator(dt);
}

LaplaceEigs laplace_eigs(Boundary boundary, Interval interval, std::size_t n) {
  require(n >= 1 && interval.length() > 0, ErrorCode::invalid_argument, "laplace_eigs: bad grid");
  LaplaceEigs out;
  out.lambda1 = laplace_lambda1(boundary, interval);
  out.lambda2 = laplace_lambda2(boundary, interval);
  const double len = interval.length();
  const bool periodic = boundary == Boundary::periodic;
  const double h = periodic ? len / static_cast<double>(n) : len / static_cast<double>(n + 1);
  out.nodes.resize(n);
  out.e1.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.nodes[j] = interval.lo + static_cast<double>(periodic ? j : j + 1) * h;
    out.e1(static_cast<Eigen::Index>(j)) = ground_state(boundary, interval, out.nodes[j]);
  }
  out.e1 /= std::sqrt(h * out.e1.squaredNorm());
  return out;
}

double sigma_min(const ModeOperator& op, double s) {
  Eigen::MatrixXcd a = op.matrix();
  const std::complex<double> shift(op.lambda1_discrete(), s);
  for (Eigen::Index j = 0; j < a.rows(); ++j) a(j, j) -= shift;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

std::pair<double, double> default_s_window(const ModeOperator& op) {
  const double w = op.skew_scale();
  const double a = w * op.v_samples().minCoeff();
  const double b = w * op.v_samples().maxCoeff();
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 3.0 * (hi - lo) + 1.0;
  return {lo - margin, hi + margin};
}

SpectralSummary r_lambda1(const ModeOperator& op, std::optional<std::pair<double, double>> s_window,
                          std::size_t s_points) {
  require(s_points >= 64, ErrorCode::invalid_argument, "r_lambda1: s_points must be at least 64");
  SpectralSummary out;
  const LaplaceEigs le = laplace_eigs(op.boundary(), op.interval(), op.n());
  out.lambda1 = le.lambda1;
  out.lambda2 = le.lambda2;
  out.e1 = le.e1;
  out.lambda1_discrete = op.lambda1_discrete();
  out.s_points = s_points;

  auto window = s_window.value_or(default_s_window(op));
  require(window.second > window.first, ErrorCode::invalid_argument, "r_lambda1: empty window");
  const double w = op.skew_scale();
  const double range_lo = std::min(w * op.v_samples().minCoeff(), w * op.v_samples().maxCoeff());
  const double range_hi = std::max(w * op.v_samples().minCoeff(), w * op.v_samples().maxCoeff());

  std::vector<double> grid, sig;
  for (;;) {
    grid.resize(s_points);
    sig.resize(s_points);
    for (std::size_t i = 0; i < s_points; ++i)
      grid[i] = window.first + (window.second - window.first) * static_cast<double>(i) /
                                   static_cast<double>(s_points - 1);
    parallel::for_each_index(s_points, [&](std::size_t i) { sig[i] = sigma_min(op, grid[i]); });
    out.evaluations += s_points;
    const double m = *std::min_element(sig.begin(), sig.end());
    // Outside the range of 2 pi k V, sigma_min(s) >= dist(s, range). Once both
    // edges clear the interior minimum nothing beyond them can win.
    const double dl = std::max(0.0, range_lo - window.first);
    const double dr = std::max(0.0, window.second - range_hi);
    if ((dl > m && dr > m) || out.window_extensions >= 12) break;
    ++out.window_extensions;
    if (dl <= m) window.first = range_lo - 2.0 * dl - 1.0;
    if (dr <= m) window.second = range_hi + 2.0 * dr + 1.0;
  }
  out.window = window;
  for (std::size_t i = 0; i < s_points; ++i) out.trace.emplace_back(grid[i], sig[i]);

  // Refine the lowest few local minima of the sweep by golden-section search.
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < s_points; ++i) {
    const bool left_ok = i == 0 || sig[i] <= sig[i - 1];
    const bool right_ok = i + 1 == s_points || sig[i] <= sig[i + 1];
    if (left_ok && right_ok) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) {
    return sig[a] < sig[b] || (sig[a] == sig[b] && a < b);
  });
  if (minima.size() > 3) minima.resize(3);

  struct Refined {
    double s, sigma, a, b;
    bool converged;
    std::vector<std::pair<double, double>> evals;
  };
  std::vector<Refined> refined(minima.size());
  parallel::for_each_index(minima.size(), [&](std::size_t idx) {
    const std::size_t i = minima[idx];
    double a = grid[i == 0 ? 0 : i - 1];
    double b = grid[i + 1 == s_points ? i : i + 1];
    Refined r{grid[i], sig[i], a, b, false, {}};
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sigma_min(op, c), fd = sigma_min(op, d);
    r.evals.emplace_back(c, fc);
    r.evals.emplace_back(d, fd);
    for (int it = 0; it < 200 && b - a > 1e-6; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = sigma_min(op, c);
        r.evals.emplace_back(c, fc);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = sigma_min(op, d);
        r.evals.emplace_back(d, fd);
      }
    }
    r.converged = b - a <= 1e-6;
    r.a = a;
    r.b = b;
    for (const auto& [s, v] : r.evals)
      if (v < r.sigma) {
        r.sigma = v;
        r.s = s;
      }
    refined[idx] = std::move(r);
  });

  out.r_lambda1 = sig[minima.front()];
  out.s_argmin = grid[minima.front()];
  out.bracket = {out.s_argmin, out.s_argmin};
  out.converged = true;
  for (const auto& r : refined) {
    out.evaluations += r.evals.size();
    out.trace.insert(out.trace.end(), r.evals.begin(), r.evals.end());
    if (r.sigma < out.r_lambda1 || (&r == &refined.front() && r.sigma <= out.r_lambda1)) {
      out.r_lambda1 = r.sigma;
      out.s_argmin = r.s;
      out.bracket = {r.a, r.b};
      out.converged = r.converged;
    }
  }
  std::sort(out.trace.begin(), out.trace.end());
  return out;
}

std::vector<double> semigroup_norm(const ModeOperator& op, const std::vector<double>& times) {
  for (double t : times)
    require(t >= 0, ErrorCode::invalid_argument, "semigroup_norm: times must be nonnegative");
  const Eigen::MatrixXcd a = op.matrix();
  std::vector<double> out(times.size());
  parallel::for_each_index(times.size(), [&](std::size_t i) {
    if (times[i] == 0.0) {
      out[i] = 1.0;
      return;
    }
    const Eigen::MatrixXcd e = (-times[i] * a).exp();
    out[i] = max_singular_value(e);
  });
  return out;
}

nlohmann::json SpectralSummary::to_json() const {
  nlohmann::json j;
  j["lambda1"] = lambda1;
  j["lambda2"] = lambda2;
  j["lambda1_discrete"] = lambda1_discrete;
  j["r_lambda1"] = r_lambda1;
  j["s_argmin"] = s_argmin;
  j["converged"] = converged;
  j["bracket"] = {bracket.first, bracket.second};
  j["window"] = {window.first, window.second};
  j["s_points"] = s_points;
  j["window_extensions"] = window_extensions;
  j["evaluations"] = evaluations;
  j["e1"] = std::vector<double>(e1.data(), e1.data() + e1.size());
  return j;
}

}  // namespace mixrate
