// Copyright 2026 The mixrate Authors
// SPDX-License-Identifier: Apache-2.0

#include "mixrate/velocity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <utility>

#include "mixrate/error.hpp"
#include "quadrature.hpp"

namespace mixrate {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double u) { return u - std::floor(u); }

// Range of sin(theta) for theta in [t0, t1].
std::pair<double, double> sin_range(double t0, double t1) {
  if (t1 < t0) std::swap(t0, t1);
  double lo = std::min(std::sin(t0), std::sin(t1));
  double hi = std::max(std::sin(t0), std::sin(t1));
  // Maxima at pi/2 + 2 pi m, minima at -pi/2 + 2 pi m.
  if (std::ceil((t0 - std::numbers::pi / 2) / kTwoPi) <= std::floor((t1 - std::numbers::pi / 2) / kTwoPi))
    hi = 1.0;
  if (std::ceil((t0 + std::numbers::pi / 2) / kTwoPi) <= std::floor((t1 + std::numbers::pi / 2) / kTwoPi))
    lo = -1.0;
  return {lo, hi};
}

std::vector<double> cascade_coefficients(double c) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::invalid_argument,
          "binary_cascade: c must be positive");
  std::vector<double> a;
  for (int k = 1;; ++k) {
    const double ak = std::exp(-c * std::pow(4.0, k));
    if (ak < 1e-15) break;
    a.push_back(ak);
  }
  // Keep at least one level so the field is never constant.
  if (a.empty()) a.push_back(std::exp(-c * 4.0));
  return a;
}

void check_increasing(const std::vector<double>& xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    require(xs[i] > xs[i - 1], ErrorCode::invalid_argument,
            std::string(what) + " must be strictly increasing");
}

void check_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs)
    require(std::isfinite(x), ErrorCode::invalid_argument, std::string(what) + " must be finite");
}

// Constant stretches of the base representation, left to right.
std::vector<Plateau> base_constant_pieces(const Representation& rep, Interval dom) {
  std::vector<Plateau> out;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant>) {
          for (std::size_t i = 0; i < r.values.size(); ++i)
            out.push_back({r.edges[i], r.edges[i + 1], r.values[i]});
        } else if constexpr (std::is_same_v<T, rep::PiecewiseLinear>) {
          for (std::size_t i = 0; i + 1 < r.knots.size(); ++i)
            if (r.values[i] == r.values[i + 1])
              out.push_back({r.knots[i], r.knots[i + 1], r.values[i]});
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          const double h = dom.length() / static_cast<double>(r.samples.size());
          for (std::size_t i = 0; i < r.samples.size(); ++i) {
            const double right = i + 1 == r.samples.size() ? dom.hi : dom.lo + (i + 1) * h;
            out.push_back({dom.lo + i * h, right, r.samples[i]});
          }
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          if (r.amplitude == 0.0 || r.frequency == 0.0)
            out.push_back({dom.lo, dom.hi, r.amplitude * std::sin(r.phase)});
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          if (r.amplitude == 0.0) out.push_back({dom.lo, dom.hi, 0.0});
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          out.push_back({dom.lo, r.threshold, r.high});
          out.push_back({r.threshold, dom.hi, r.low});
        } else {
          // Binary cascade: positive coefficients, no plateau at any scale.
        }
      },
      rep);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

VelocityField::VelocityField(Representation rep, Interval domain, DomainKind kind)
    : rep_(std::move(rep)), domain_(domain), kind_(kind) {
  require(std::isfinite(domain_.lo) && std::isfinite(domain_.hi) && domain_.hi > domain_.lo,
          ErrorCode::invalid_argument, "velocity: domain must be a nonempty finite interval");
  if (kind_ == DomainKind::torus)
    require(domain_.lo == 0.0 && domain_.hi == 1.0, ErrorCode::invalid_argument,
            "velocity: the torus domain is [0, 1)");
}

VelocityField VelocityField::constant(double c, Interval domain, DomainKind kind) {
  require(std::isfinite(c), ErrorCode::invalid_argument, "constant: value must be finite");
  return VelocityField(rep::PiecewiseConstant{{domain.lo, domain.hi}, {c}}, domain, kind);
}

VelocityField VelocityField::piecewise_constant(std::vector<double> breaks,
                                                std::vector<double> values, Interval domain,
                                                DomainKind kind) {
  require(values.size() == breaks.size() + 1, ErrorCode::invalid_argument,
          "piecewise_constant: need exactly one more value than breakpoints");
  check_finite(breaks, "piecewise_constant breaks");
  check_finite(values, "piecewise_constant values");
  check_increasing(breaks, "piecewise_constant breaks");
  for (double b : breaks)
    require(b > domain.lo && b < domain.hi, ErrorCode::invalid_argument,
            "piecewise_constant: breakpoints must lie strictly inside the domain");
  std::vector<double> edges;
  edges.reserve(breaks.size() + 2);
  edges.push_back(domain.lo);
  edges.insert(edges.end(), breaks.begin(), breaks.end());
  edges.push_back(domain.hi);
  return VelocityField(rep::PiecewiseConstant{std::move(edges), std::move(values)}, domain, kind);
}

VelocityField VelocityField::piecewise_linear(std::vector<double> knots,
                                              std::vector<double> values, DomainKind kind) {
  require(knots.size() >= 2 && knots.size() == values.size(), ErrorCode::invalid_argument,
          "piecewise_linear: need at least two knots and one value per knot");
  check_finite(knots, "piecewise_linear knots");
  check_finite(values, "piecewise_linear values");
  check_increasing(knots, "piecewise_linear knots");
  const Interval dom{knots.front(), knots.back()};
  return VelocityField(rep::PiecewiseLinear{std::move(knots), std::move(values)}, dom, kind);
}

VelocityField VelocityField::grid(std::vector<double> samples, Interval domain, DomainKind kind) {
  require(!samples.empty(), ErrorCode::invalid_argument, "grid: need at least one sample");
  check_finite(samples, "grid samples");
  return VelocityField(rep::GridSampled{std::move(samples)}, domain, kind);
}

VelocityField VelocityField::sampled(const std::function<double(double)>& f, std::size_t n,
                                     Interval domain, DomainKind kind) {
  require(n > 0, ErrorCode::invalid_argument, "sampled: need n > 0");
  std::vector<double> s(n);
  const double h = domain.length() / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = f(domain.lo + (static_cast<double>(i) + 0.5) * h);
  return grid(std::move(s), domain, kind);
}

VelocityField VelocityField::sine(double amplitude, double frequency, double phase, double offset,
                                  Interval domain, DomainKind kind) {
  require(std::isfinite(amplitude) && std::isfinite(frequency) && std::isfinite(phase) &&
              std::isfinite(offset),
          ErrorCode::invalid_argument, "sine: parameters must be finite");
  VelocityField v(rep::Sine{amplitude, frequency, phase}, domain, kind);
  v.shift_ = offset;
  return v;
}

VelocityField VelocityField::cosine(double amplitude, double frequency, Interval domain,
                                    DomainKind kind) {
  return sine(amplitude, frequency, std::numbers::pi / 2, 0.0, domain, kind);
}

VelocityField VelocityField::sawtooth(double amplitude, double frequency, double offset) {
  require(std::isfinite(amplitude) && std::isfinite(offset) && frequency > 0 &&
              std::isfinite(frequency),
          ErrorCode::invalid_argument, "sawtooth: finite amplitude and positive frequency");
  VelocityField v(rep::Sawtooth{amplitude, frequency}, {}, DomainKind::torus);
  v.shift_ = offset;
  return v;
}

VelocityField VelocityField::heaviside(double threshold, double high, double low) {
  require(threshold > 0.0 && threshold < 1.0, ErrorCode::invalid_argument,
          "heaviside: threshold must lie in (0, 1)");
  require(std::isfinite(high) && std::isfinite(low), ErrorCode::invalid_argument,
          "heaviside: values must be finite");
  return VelocityField(rep::Heaviside{threshold, high, low}, {}, DomainKind::torus);
}

VelocityField VelocityField::binary_cascade(double c) {
  return VelocityField(rep::BinaryCascade{c, cascade_coefficients(c)}, {}, DomainKind::torus);
}

VelocityField VelocityField::shifted(double c) const {
  VelocityField v = *this;
  v.shift_ += c;
  return v;
}

VelocityField VelocityField::scaled(double lambda) const {
  VelocityField v = *this;
  v.scale_ *= lambda;
  v.shift_ *= lambda;
  return v;
}

std::string VelocityField::kind_name() const {
  static constexpr std::array<const char*, 7> names = {
      "piecewise_constant", "piecewise_linear", "grid",          "sine",
      "sawtooth",           "heaviside",        "binary_cascade"};
  return names[rep_.index()];
}

// ---------------------------------------------------------------------------
// Evaluation

double VelocityField::eval(double x) const {
  const bool inside = kind_ == DomainKind::torus ? (x >= domain_.lo && x < domain_.hi)
                                                 : domain_.contains(x);
  if (!inside)
    fail(ErrorCode::domain, "velocity: x = " + std::to_string(x) + " outside the domain");
  return scale_ * base_eval(x) + shift_;
}

double VelocityField::eval_periodic(double x) const {
  if (kind_ == DomainKind::torus) {
    x = frac(x);
    if (x >= 1.0) x = 0.0;  // frac(-tiny) rounds up to 1
  }
  return eval(x);
}

double VelocityField::base_eval(double x) const {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant>) {
          const auto it = std::upper_bound(r.edges.begin() + 1, r.edges.end() - 1, x);
          return r.values[static_cast<std::size_t>(it - (r.edges.begin() + 1))];
        } else if constexpr (std::is_same_v<T, rep::PiecewiseLinear>) {
          const auto it = std::upper_bound(r.knots.begin() + 1, r.knots.end() - 1, x);
          const std::size_t i = static_cast<std::size_t>(it - (r.knots.begin() + 1));
          const double t = (x - r.knots[i]) / (r.knots[i + 1] - r.knots[i]);
          return r.values[i] + t * (r.values[i + 1] - r.values[i]);
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          const std::size_t n = r.samples.size();
          const double u = (x - domain_.lo) / domain_.length() * static_cast<double>(n);
          const std::size_t i = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, u)));
          return r.samples[i];
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          return r.amplitude * std::sin(kTwoPi * r.frequency * x + r.phase);
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          return r.amplitude * (2.0 * frac(r.frequency * x) - 1.0);
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          return x < r.threshold ? r.high : r.low;
        } else {
          double sum = 0.0;
          double scale = 2.0;
          for (double ak : r.coefficients) {
            const auto bit = static_cast<long long>(std::floor(x * scale)) & 1LL;
            sum += bit ? -ak : ak;
            scale *= 2.0;
          }
          return sum;
        }
      },
      rep_);
}

double VelocityField::base_sup() const {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant> ||
                      std::is_same_v<T, rep::PiecewiseLinear>) {
          return *std::max_element(r.values.begin(), r.values.end());
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          return *std::max_element(r.samples.begin(), r.samples.end());
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          const auto [lo, hi] = sin_range(kTwoPi * r.frequency * domain_.lo + r.phase,
                                          kTwoPi * r.frequency * domain_.hi + r.phase);
          return r.amplitude >= 0 ? r.amplitude * hi : r.amplitude * lo;
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          return std::abs(r.amplitude);
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          return std::max(r.high, r.low);
        } else {
          double s = 0.0;
          for (double ak : r.coefficients) s += ak;
          return s;
        }
      },
      rep_);
}

double VelocityField::base_inf() const {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant> ||
                      std::is_same_v<T, rep::PiecewiseLinear>) {
          return *std::min_element(r.values.begin(), r.values.end());
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          return *std::min_element(r.samples.begin(), r.samples.end());
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          const auto [lo, hi] = sin_range(kTwoPi * r.frequency * domain_.lo + r.phase,
                                          kTwoPi * r.frequency * domain_.hi + r.phase);
          return r.amplitude >= 0 ? r.amplitude * lo : r.amplitude * hi;
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          return -std::abs(r.amplitude);
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          return std::min(r.high, r.low);
        } else {
          double s = 0.0;
          for (double ak : r.coefficients) s += ak;
          return -s;
        }
      },
      rep_);
}

double VelocityField::sup() const {
  return scale_ >= 0 ? scale_ * base_sup() + shift_ : scale_ * base_inf() + shift_;
}

double VelocityField::inf() const {
  return scale_ >= 0 ? scale_ * base_inf() + shift_ : scale_ * base_sup() + shift_;
}

double VelocityField::bound() const { return std::max(std::abs(sup()), std::abs(inf())); }

double VelocityField::base_antiderivative(double x) const {
  const double lo = domain_.lo;
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant>) {
          double sum = 0.0;
          for (std::size_t i = 0; i < r.values.size(); ++i) {
            if (x <= r.edges[i]) break;
            sum += r.values[i] * (std::min(x, r.edges[i + 1]) - r.edges[i]);
          }
          return sum;
        } else if constexpr (std::is_same_v<T, rep::PiecewiseLinear>) {
          double sum = 0.0;
          for (std::size_t i = 0; i + 1 < r.knots.size(); ++i) {
            if (x <= r.knots[i]) break;
            const double w = r.knots[i + 1] - r.knots[i];
            const double d = std::min(x, r.knots[i + 1]) - r.knots[i];
            sum += r.values[i] * d + (r.values[i + 1] - r.values[i]) * d * d / (2.0 * w);
          }
          return sum;
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          const std::size_t n = r.samples.size();
          const double h = domain_.length() / static_cast<double>(n);
          double sum = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double a = lo + static_cast<double>(i) * h;
            if (x <= a) break;
            sum += r.samples[i] * (std::min(x, a + h) - a);
          }
          return sum;
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          if (r.frequency == 0.0) return r.amplitude * std::sin(r.phase) * (x - lo);
          const double w = kTwoPi * r.frequency;
          return r.amplitude / w * (std::cos(w * lo + r.phase) - std::cos(w * x + r.phase));
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          // G(x) = (u^2 - u) / f with u = frac(f x) is a periodic antiderivative.
          auto g = [&](double s) {
            const double u = frac(r.frequency * s);
            return (u * u - u) / r.frequency;
          };
          return r.amplitude * (g(x) - g(lo));
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          return r.high * (std::min(x, r.threshold) - lo) + r.low * std::max(0.0, x - r.threshold);
        } else {
          // Rademacher function r_k has the triangle-wave antiderivative
          // min(u, p - u), u = x mod p, p = 2^{1-k}.
          double sum = 0.0;
          double p = 1.0;
          for (double ak : r.coefficients) {
            const double u = x - p * std::floor(x / p);
            sum += ak * std::min(u, p - u);
            p *= 0.5;
          }
          return sum;
        }
      },
      rep_);
}

double VelocityField::antiderivative(double x) const {
  require(x >= domain_.lo - 1e-15 && x <= domain_.hi + 1e-15, ErrorCode::domain,
          "antiderivative: x outside the domain");
  return scale_ * base_antiderivative(x) + shift_ * (x - domain_.lo);
}

std::vector<double> VelocityField::breakpoints(Interval within) const {
  std::vector<double> pts;
  auto add = [&](double p) {
    if (p > within.lo && p < within.hi) pts.push_back(p);
  };
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant>) {
          for (double e : r.edges) add(e);
        } else if constexpr (std::is_same_v<T, rep::PiecewiseLinear>) {
          for (double e : r.knots) add(e);
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          const std::size_t n = r.samples.size();
          for (std::size_t i = 1; i < n; ++i)
            add(domain_.lo + domain_.length() * static_cast<double>(i) / static_cast<double>(n));
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          const auto m0 = static_cast<long long>(std::floor(within.lo * r.frequency));
          const auto m1 = static_cast<long long>(std::ceil(within.hi * r.frequency));
          for (long long m = m0; m <= m1; ++m) add(static_cast<double>(m) / r.frequency);
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          add(r.threshold);
        } else {
          const auto cells = std::size_t{1} << r.coefficients.size();
          for (std::size_t i = 1; i < cells; ++i)
            add(static_cast<double>(i) / static_cast<double>(cells));
        }
      },
      rep_);
  return pts;
}

bool VelocityField::is_smooth() const {
  if (scale_ == 0.0) return true;
  if (std::holds_alternative<rep::Sine>(rep_)) return true;
  if (const auto* pc = std::get_if<rep::PiecewiseConstant>(&rep_)) return pc->values.size() == 1;
  return false;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorCode::config, "velocity: unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("velocity: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T get_required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorCode::config, std::string("velocity: missing key '") + key + "'");
  return get_or<T>(j, key, T{});
}

}  // namespace

VelocityField VelocityField::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::config, "velocity: description must be a JSON object");
  const auto kind = get_required<std::string>(j, "kind");

  DomainKind dk = DomainKind::torus;
  if (j.contains("domain_kind")) {
    const auto s = get_or<std::string>(j, "domain_kind", "torus");
    if (s == "torus") dk = DomainKind::torus;
    else if (s == "interval") dk = DomainKind::interval;
    else fail(ErrorCode::config, "velocity: domain_kind must be 'torus' or 'interval'");
  }
  Interval dom{};
  if (j.contains("domain")) {
    const auto d = get_or<std::vector<double>>(j, "domain", {});
    if (d.size() != 2) fail(ErrorCode::config, "velocity: domain must be [lo, hi]");
    dom = {d[0], d[1]};
  }

  VelocityField v = [&]() -> VelocityField {
    if (kind == "constant") {
      reject_unknown(j, {"kind", "value", "domain", "domain_kind", "scale", "shift"});
      return constant(get_required<double>(j, "value"), dom, dk);
    }
    if (kind == "piecewise_constant") {
      reject_unknown(j, {"kind", "breaks", "values", "domain", "domain_kind", "scale", "shift"});
      return piecewise_constant(get_or<std::vector<double>>(j, "breaks", {}),
                                get_required<std::vector<double>>(j, "values"), dom, dk);
    }
    if (kind == "piecewise_linear") {
      reject_unknown(j, {"kind", "knots", "values", "domain_kind", "scale", "shift"});
      return piecewise_linear(get_required<std::vector<double>>(j, "knots"),
                              get_required<std::vector<double>>(j, "values"), dk);
    }
    if (kind == "grid") {
      reject_unknown(j, {"kind", "samples", "domain", "domain_kind", "scale", "shift"});
      return grid(get_required<std::vector<double>>(j, "samples"), dom, dk);
    }
    if (kind == "sine" || kind == "cosine") {
      reject_unknown(j, {"kind", "amplitude", "frequency", "phase", "offset", "domain",
                         "domain_kind", "scale", "shift"});
      const double phase = get_or<double>(j, "phase", 0.0) +
                           (kind == "cosine" ? std::numbers::pi / 2 : 0.0);
      return sine(get_or<double>(j, "amplitude", 1.0), get_or<double>(j, "frequency", 1.0), phase,
                  get_or<double>(j, "offset", 0.0), dom, dk);
    }
    if (kind == "sawtooth") {
      reject_unknown(j, {"kind", "amplitude", "frequency", "offset", "scale", "shift"});
      return sawtooth(get_or<double>(j, "amplitude", 1.0), get_or<double>(j, "frequency", 1.0),
                      get_or<double>(j, "offset", 0.0));
    }
    if (kind == "heaviside") {
      reject_unknown(j, {"kind", "threshold", "high", "low", "scale", "shift"});
      return heaviside(get_or<double>(j, "threshold", 0.5), get_or<double>(j, "high", 1.0),
                       get_or<double>(j, "low", 0.0));
    }
    if (kind == "binary_cascade") {
      reject_unknown(j, {"kind", "c", "scale", "shift"});
      return binary_cascade(get_or<double>(j, "c", 1.0));
    }
    fail(ErrorCode::config, "velocity: unknown kind '" + kind + "'");
  }();

  // Serialized fields store the full affine map; "offset" above is the
  // user-facing alias for a shift on sine/sawtooth.
  if (j.contains("scale")) v.scale_ = get_or<double>(j, "scale", 1.0);
  if (j.contains("shift")) v.shift_ = get_or<double>(j, "shift", 0.0);
  return v;
}

nlohmann::json VelocityField::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name();
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, rep::PiecewiseConstant>) {
          j["breaks"] = std::vector<double>(r.edges.begin() + 1, r.edges.end() - 1);
          j["values"] = r.values;
          j["domain"] = {domain_.lo, domain_.hi};
        } else if constexpr (std::is_same_v<T, rep::PiecewiseLinear>) {
          j["knots"] = r.knots;
          j["values"] = r.values;
        } else if constexpr (std::is_same_v<T, rep::GridSampled>) {
          j["samples"] = r.samples;
          j["domain"] = {domain_.lo, domain_.hi};
        } else if constexpr (std::is_same_v<T, rep::Sine>) {
          j["amplitude"] = r.amplitude;
          j["frequency"] = r.frequency;
          j["phase"] = r.phase;
          j["domain"] = {domain_.lo, domain_.hi};
        } else if constexpr (std::is_same_v<T, rep::Sawtooth>) {
          j["amplitude"] = r.amplitude;
          j["frequency"] = r.frequency;
        } else if constexpr (std::is_same_v<T, rep::Heaviside>) {
          j["threshold"] = r.threshold;
          j["high"] = r.high;
          j["low"] = r.low;
        } else {
          j["c"] = r.c;
        }
      },
      rep_);
  if (kind_ == DomainKind::interval) j["domain_kind"] = "interval";
  j["scale"] = scale_;
  j["shift"] = shift_;
  return j;
}

// ---------------------------------------------------------------------------
// Primitive and plateaus

Primitive::Primitive(VelocityField v, double base) : v_(std::move(v)), offset_(0.0) {
  offset_ = v_.antiderivative(base);
}

Primitive primitive(const VelocityField& v, double base) {
  const Interval d = v.domain();
  require(base >= d.lo && base <= d.hi, ErrorCode::domain, "primitive: base outside the domain");
  return Primitive(v, base);
}

PlateauList plateaus(const VelocityField& v, double min_length) {
  require(min_length > 0.0, ErrorCode::invalid_argument, "plateaus: min_length must be positive");
  const Interval dom = v.domain();

  std::vector<Plateau> pieces;
  if (v.scale() == 0.0) {
    pieces.push_back({dom.lo, dom.hi, 0.0});
  } else {
    pieces = base_constant_pieces(v.representation(), dom);
  }

  // Merge touching pieces with equal values.
  std::vector<Plateau> merged;
  for (const auto& p : pieces) {
    if (p.right <= p.left) continue;
    if (!merged.empty() && merged.back().right == p.left && merged.back().value == p.value)
      merged.back().right = p.right;
    else
      merged.push_back(p);
  }
  if (v.domain_kind() == DomainKind::torus && merged.size() >= 2 &&
      merged.front().left == dom.lo && merged.back().right == dom.hi &&
      merged.front().value == merged.back().value) {
    merged.back().right = merged.front().right + dom.length();
    merged.erase(merged.begin());
  }

  PlateauList out;
  for (auto p : merged) {
    if (p.length() < min_length) continue;
    p.value = v.scale() * p.value + v.shift();
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const Plateau& a, const Plateau& b) { return a.left < b.left; });
  return out;
}

std::optional<PlateauPair> check_P(const VelocityField& v) {
  const PlateauList ps = plateaus(v, std::numeric_limits<double>::min());
  std::optional<PlateauPair> best;
  constexpr double tie = 1e-12;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (ps[i].value == ps[j].value) continue;
      PlateauPair cand{ps[i], ps[j], std::min(ps[i].length(), ps[j].length()),
                       std::abs(ps[i].value - ps[j].value)};
      if (!best) {
        best = cand;
        continue;
      }
      // Pairs are visited left to right, so equal keys keep the leftmost.
      if (cand.ell > best->ell + tie ||
          (std::abs(cand.ell - best->ell) <= tie && cand.dv > best->dv + tie))
        best = cand;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Affine residuals and the (H) estimate

namespace {

bool inside_plateau(const PlateauList& ps, Interval j, DomainKind kind) {
  constexpr double tol = 1e-14;
  for (const auto& p : ps) {
    if (j.lo >= p.left - tol && j.hi <= p.right + tol) return true;
    if (kind == DomainKind::torus && j.lo + 1.0 >= p.left - tol && j.hi + 1.0 <= p.right + tol)
      return true;
  }
  return false;
}

double residual_quadrature(const VelocityField& v, Interval j) {
  std::vector<double> edges{j.lo};
  for (double b : v.breakpoints(j)) edges.push_back(b);
  edges.push_back(j.hi);

  double max_width = j.length() / 16.0;
  if (const auto* s = std::get_if<rep::Sine>(&v.representation()))
    max_width = std::min(max_width, 1.0 / (32.0 * std::max(1.0, std::abs(s->frequency))));
  if (const auto* s = std::get_if<rep::Sawtooth>(&v.representation()))
    max_width = std::min(max_width, 1.0 / (32.0 * std::max(1.0, std::abs(s->frequency))));

  std::vector<double> xs, ws;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_width)));
    const double w = (b - a) / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p)
      quadrature::gauss_legendre_8(a + static_cast<double>(p) * w, a + static_cast<double>(p + 1) * w,
                                   xs, ws);
  }

  const double base = v.antiderivative(j.lo);
  const double c = 0.5 * (j.lo + j.hi);
  std::vector<double> pv(xs.size());
  double len = 0, m0 = 0, m1 = 0, s11 = 0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    pv[q] = v.antiderivative(xs[q]) - base;
    const double xi = xs[q] - c;
    len += ws[q];
    m0 += ws[q] * pv[q];
    m1 += ws[q] * xi * pv[q];
    s11 += ws[q] * xi * xi;
  }
  const double a0 = m0 / len;
  const double a1 = m1 / s11;
  double res = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double d = pv[q] - a0 - a1 * (xs[q] - c);
    res += ws[q] * d * d;
  }
  return std::max(0.0, res);
}

}  // namespace

double affine_residual(const VelocityField& v, Interval j) {
  const Interval dom = v.domain();
  require(j.hi > j.lo, ErrorCode::invalid_argument, "affine_residual: empty interval");
  require(j.lo >= dom.lo - 1e-15 && j.hi <= dom.hi + 1e-15, ErrorCode::domain,
          "affine_residual: interval outside the domain");
  j.lo = std::max(j.lo, dom.lo);
  j.hi = std::min(j.hi, dom.hi);
  if (inside_plateau(plateaus(v, std::numeric_limits<double>::min()), j, v.domain_kind()))
    return 0.0;
  return residual_quadrature(v, j);
}

HEstimate estimate_H_constant(const VelocityField& v, Interval i, std::span<const double> eps_grid,
                              std::size_t j_grid) {
  const Interval dom = v.domain();
  require(dom.contains(i) && i.length() > 0, ErrorCode::domain,
          "estimate_H_constant: I must be a nonempty subinterval of the domain");
  require(!eps_grid.empty(), ErrorCode::invalid_argument, "estimate_H_constant: empty eps grid");
  require(j_grid >= 2, ErrorCode::invalid_argument, "estimate_H_constant: j_grid must be >= 2");
  for (double e : eps_grid)
    require(e > 0 && e < i.length(), ErrorCode::invalid_argument,
            "estimate_H_constant: eps values must lie in (0, |I|)");

  HEstimate out;
  // Any plateau meeting I makes the residual vanish on small enough J.
  for (const auto& p : plateaus(v, std::numeric_limits<double>::min())) {
    for (double shift : {0.0, -1.0}) {
      if (shift != 0.0 && v.domain_kind() != DomainKind::torus) continue;
      const double lo = std::max(i.lo, p.left + shift);
      const double hi = std::min(i.hi, p.right + shift);
      if (hi > lo) {
        out.feasible = false;
        out.k_hat = std::numeric_limits<double>::infinity();
        out.witness = Interval{lo, hi};
        return out;
      }
    }
  }

  // Residuals are nondecreasing under inclusion, so for each eps the minimum
  // over admissible J is attained by the shortest admissible lattice windows.
  const double step = i.length() / static_cast<double>(j_grid);
  std::vector<std::vector<double>> by_span(j_grid + 1);
  double k_hat = -std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    const auto span = static_cast<std::size_t>(std::ceil(eps / step - 1e-9));
    auto& row = by_span[std::max<std::size_t>(1, span)];
    if (row.empty()) {
      const std::size_t s = std::max<std::size_t>(1, span);
      row.resize(j_grid - s + 1);
      for (std::size_t a = 0; a + s <= j_grid; ++a)
        row[a] = residual_quadrature(
            v, {i.lo + static_cast<double>(a) * step, i.lo + static_cast<double>(a + s) * step});
    }
    const std::size_t s = std::max<std::size_t>(1, span);
    for (std::size_t a = 0; a < row.size(); ++a) {
      const Interval jj{i.lo + static_cast<double>(a) * step, i.lo + static_cast<double>(a + s) * step};
      if (row[a] <= 0.0) {
        out.feasible = false;
        out.k_hat = std::numeric_limits<double>::infinity();
        out.witness = jj;
        return out;
      }
      const double k = eps * eps * std::log(1.0 / (eps * row[a]));
      if (k > k_hat) {
        k_hat = k;
        out.eps_at_max = eps;
        out.j_at_max = jj;
      }
    }
  }
  out.k_hat = std::max(k_hat, 1.0);
  out.feasible = std::isfinite(out.k_hat);
  return out;
}

}  // namespace mixrate
