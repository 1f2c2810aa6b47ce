// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixrate {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// The torus is stored as [0, 1) with periodic identification; an interval
// domain is the closed segment [lo, hi].
enum class DomainKind { torus, interval };

namespace rep {

// Cells [edges[i], edges[i+1]) carry values[i]; edges cover the domain.
struct PiecewiseConstant {
  std::vector<double> edges;
  std::vector<double> values;
};

// Linear interpolation between (knots[i], values[i]); knots cover the domain.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;
};

// N equispaced cells, each holding the value sampled at its midpoint.
struct GridSampled {
  std::vector<double> samples;
};

// amplitude * sin(2 pi frequency x + phase)
struct Sine {
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
};

// amplitude * (2 frac(frequency x) - 1)
struct Sawtooth {
  double amplitude = 1.0;
  double frequency = 1.0;
};

// high on [lo, threshold), low on [threshold, hi)
struct Heaviside {
  double threshold = 0.5;
  double high = 1.0;
  double low = 0.0;
};

// sum_k a_k (-1)^{b_k(x)} with b_k the k-th binary digit of x and
// a_k = exp(-c 4^k), truncated once a_k < 1e-15.
struct BinaryCascade {
  double c = 1.0;
  std::vector<double> coefficients;
};

}  // namespace rep

using Representation =
    std::variant<rep::PiecewiseConstant, rep::PiecewiseLinear, rep::GridSampled, rep::Sine,
                 rep::Sawtooth, rep::Heaviside, rep::BinaryCascade>;

// A bounded velocity profile V(x). Every field is the affine image
// scale * base(x) + shift of one base representation; values are immutable
// after construction.
class VelocityField {
 public:
  static VelocityField constant(double c, Interval domain = {}, DomainKind kind = DomainKind::torus);
  // `breaks` are the interior breakpoints; values.size() == breaks.size() + 1.
  static VelocityField piecewise_constant(std::vector<double> breaks, std::vector<double> values,
                                          Interval domain = {},
                                          DomainKind kind = DomainKind::torus);
  // The domain is [knots.front(), knots.back()].
  static VelocityField piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                        DomainKind kind = DomainKind::torus);
  static VelocityField grid(std::vector<double> samples, Interval domain = {},
                            DomainKind kind = DomainKind::torus);
  // Midpoint-samples f on n cells.
  static VelocityField sampled(const std::function<double(double)>& f, std::size_t n,
                               Interval domain = {}, DomainKind kind = DomainKind::torus);
  static VelocityField sine(double amplitude = 1.0, double frequency = 1.0, double phase = 0.0,
                            double offset = 0.0, Interval domain = {},
                            DomainKind kind = DomainKind::torus);
  // amplitude * cos(2 pi frequency x)
  static VelocityField cosine(double amplitude = 1.0, double frequency = 1.0,
                              Interval domain = {}, DomainKind kind = DomainKind::torus);
  static VelocityField sawtooth(double amplitude = 1.0, double frequency = 1.0,
                                double offset = 0.0);
  static VelocityField heaviside(double threshold = 0.5, double high = 1.0, double low = 0.0);
  static VelocityField binary_cascade(double c = 1.0);

  static VelocityField from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Right-open cells at breakpoints. Throws ErrorCode::domain outside the domain.
  double operator()(double x) const { return eval(x); }
  double eval(double x) const;
  // Same as eval() on the torus after reducing x modulo 1.
  double eval_periodic(double x) const;

  double sup() const;
  double inf() const;
  double osc() const { return sup() - inf(); }
  double bound() const;

  // Exact integral of V from domain().lo to x.
  double antiderivative(double x) const;
  // Points in (within.lo, within.hi) where V or its derivative may jump.
  std::vector<double> breakpoints(Interval within) const;
  // True when the base representation is smooth on the whole domain.
  bool is_smooth() const;

  VelocityField shifted(double c) const;
  VelocityField scaled(double lambda) const;

  Interval domain() const { return domain_; }
  DomainKind domain_kind() const { return kind_; }
  const Representation& representation() const { return rep_; }
  double scale() const { return scale_; }
  double shift() const { return shift_; }
  std::string kind_name() const;

 private:
  VelocityField(Representation rep, Interval domain, DomainKind kind);

  double base_eval(double x) const;
  double base_sup() const;
  double base_inf() const;
  double base_antiderivative(double x) const;

  Representation rep_;
  Interval domain_;
  DomainKind kind_;
  double scale_ = 1.0;
  double shift_ = 0.0;
};

// PV with PV(base) = 0.
class Primitive {
 public:
  Primitive(VelocityField v, double base);
  double operator()(double x) const { return v_.antiderivative(x) - offset_; }
  const VelocityField& field() const { return v_; }

 private:
  VelocityField v_;
  double offset_;
};

Primitive primitive(const VelocityField& v, double base);

// A maximal interval on which V is constant. On the torus a plateau crossing
// 0 is stored with right > 1.
struct Plateau {
  double left = 0.0;
  double right = 0.0;
  double value = 0.0;

  double length() const { return right - left; }
};

using PlateauList = std::vector<Plateau>;

PlateauList plateaus(const VelocityField& v, double min_length);

struct PlateauPair {
  Plateau first;
  Plateau second;
  double ell = 0.0;  // min(|I|, |J|)
  double dv = 0.0;   // |V_I - V_J|
};

// Assumption (P) checker: the plateau pair maximizing min(|I|, |J|).
std::optional<PlateauPair> check_P(const VelocityField& v);

// inf_{p,q} int_J |PV(x) - p x - q|^2 dx, computed by Legendre projection
// on a composite Gauss rule split at the breakpoints of V. Returns exactly 0
// when J lies inside a plateau.
double affine_residual(const VelocityField& v, Interval j);

struct HEstimate {
  double k_hat = 1.0;
  bool feasible = false;
  // Plateau witness when infeasible.
  std::optional<Interval> witness;
  double eps_at_max = 0.0;
  Interval j_at_max;
};

// Scans eps over eps_grid and J over a lattice of j_grid cells of I.
// The value is an estimate bounded by the scan resolution, never a proof.
HEstimate estimate_H_constant(const VelocityField& v, Interval i, std::span<const double> eps_grid,
                              std::size_t j_grid = 128);

}  // namespace mixrate
