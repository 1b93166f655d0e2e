#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "conecert/errors.hpp"
#include "conecert/numerics.hpp"
#include "conecert/parse.hpp"
#include "conecert/quadrature.hpp"
#include "conecert/verdicts.hpp"

namespace conecert {

// Radial densities f(x) = g(|x|) = exp(h(|x|)).

struct PowerLaw {
  double alpha = 0.0;
};

// h(t) = epsilon * t^p / 4
struct ExpPower {
  double epsilon = 0.0;
  double p = 2.0;
};

struct Constant {};

namespace detail {

inline std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(x);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace detail

class RadialDensity {
 public:
  using Family = std::variant<PowerLaw, ExpPower, Constant>;

  RadialDensity() : family_(Constant{}) {}
  RadialDensity(Family family) : family_(family) {}  // NOLINT: implicit by intent
  RadialDensity(PowerLaw f) : family_(f) {}           // NOLINT
  RadialDensity(ExpPower f) : family_(f) {}           // NOLINT
  RadialDensity(Constant f) : family_(f) {}           // NOLINT

  const Family& family() const { return family_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&family_);
  }

  double h(double t) const {
    return std::visit(detail::overloaded{[&](PowerLaw f) { return f.alpha * std::log(t); },
                                 [&](ExpPower f) { return 0.25 * f.epsilon * std::pow(t, f.p); },
                                 [&](Constant) { return 0.0; }},
                      family_);
  }
  double dh(double t) const {
    return std::visit(
        detail::overloaded{[&](PowerLaw f) { return f.alpha / t; },
                   [&](ExpPower f) { return 0.25 * f.epsilon * f.p * std::pow(t, f.p - 1.0); },
                   [&](Constant) { return 0.0; }},
        family_);
  }
  double d2h(double t) const {
    return std::visit(detail::overloaded{[&](PowerLaw f) { return -f.alpha / (t * t); },
                                 [&](ExpPower f) {
                                   return 0.25 * f.epsilon * f.p * (f.p - 1.0) *
                                          std::pow(t, f.p - 2.0);
                                 },
                                 [&](Constant) { return 0.0; }},
                      family_);
  }
  double g(double t) const {
    return std::visit(detail::overloaded{[&](PowerLaw f) { return std::pow(t, f.alpha); },
                                 [&](ExpPower) { return std::exp(h(t)); },
                                 [&](Constant) { return 1.0; }},
                      family_);
  }
  double dg(double t) const {
    return std::visit(
        detail::overloaded{[&](PowerLaw f) { return f.alpha * std::pow(t, f.alpha - 1.0); },
                   [&](ExpPower) { return g(t) * dh(t); },
                   [&](Constant) { return 0.0; }},
        family_);
  }
  double d2g(double t) const {
    return std::visit(detail::overloaded{[&](PowerLaw f) {
                                   return f.alpha * (f.alpha - 1.0) * std::pow(t, f.alpha - 2.0);
                                 },
                                 [&](ExpPower) {
                                   const double d = dh(t);
                                   return g(t) * (d2h(t) + d * d);
                                 },
                                 [&](Constant) { return 0.0; }},
                      family_);
  }

  // Canonical mini-language form, e.g. "pow:1.5".
  std::string spec() const {
    return std::visit(
        detail::overloaded{[](PowerLaw f) { return "pow:" + detail::shortest(f.alpha); },
                   [](ExpPower f) {
                     return "exppow:" + detail::shortest(f.epsilon) + "," + detail::shortest(f.p);
                   },
                   [](Constant) { return std::string("const"); }},
        family_);
  }

 private:
  Family family_;
};

// Anything with analytic g, h and their first two derivatives. User-defined
// profiles go through the numeric decision paths.
template <class D>
concept RadialProfile = requires(const D& d, double t) {
  { d.g(t) } -> std::convertible_to<double>;
  { d.dg(t) } -> std::convertible_to<double>;
  { d.d2g(t) } -> std::convertible_to<double>;
  { d.h(t) } -> std::convertible_to<double>;
  { d.dh(t) } -> std::convertible_to<double>;
  { d.d2h(t) } -> std::convertible_to<double>;
};

// pow:<alpha> | exppow:<epsilon>,<p> | const   (case-insensitive)
inline RadialDensity parse_density(std::string_view text) {
  detail::SpecCursor cur(text);
  const std::string name = cur.tag(/*allow_bare=*/true);
  RadialDensity out;
  if (name == "pow") {
    const std::size_t at = cur.pos();
    const double alpha = cur.real();
    if (!std::isfinite(alpha)) cur.fail_at(at, "exponent must be finite");
    out = PowerLaw{alpha};
  } else if (name == "exppow") {
    const double eps = cur.real();
    cur.expect(',');
    const double p = cur.real();
    if (!std::isfinite(eps) || !std::isfinite(p)) cur.fail("parameters must be finite");
    out = ExpPower{eps, p};
  } else if (name == "const") {
    out = Constant{};
  } else {
    cur.fail_at(0, "unknown density family '" + name + "' (expected pow, exppow or const)");
  }
  cur.finish();
  return out;
}

namespace detail {

inline constexpr double kScanLo = 1e-6;
inline constexpr double kScanHi = 1e6;
inline constexpr int kScanPerDecade = 20;

inline std::string scan_note() { return "decided on scanned domain t in [1e-6, 1e6]"; }

template <class D>
std::optional<AssumptionVerdict> closed_integral(const D& d, int k, double upper) {
  if constexpr (std::is_same_v<D, RadialDensity>) {
    std::optional<double> alpha;
    if (auto* f = d.template as<PowerLaw>()) alpha = f->alpha;
    if (d.template as<Constant>()) alpha = 0.0;
    if (alpha) {
      const double e = *alpha + k;
      if (e > 0.0) return AssumptionVerdict::yes(std::pow(upper, e) / e);
      return AssumptionVerdict::no({0.0}, std::numeric_limits<double>::infinity());
    }
  }
  return std::nullopt;
}

template <class D>
AssumptionVerdict integral_verdict(const D& d, int k, double upper) {
  if (k < 1) throw std::invalid_argument("dimension k must be >= 1");
  if (!(upper > 0.0)) throw std::invalid_argument("upper limit must be positive");
  if (auto v = closed_integral(d, k, upper)) return *v;
  auto est = quad::radial_integral_from_zero([&](double t) { return d.g(t); }, k, upper);
  AssumptionVerdict v;
  v.holds = est.holds;
  v.exact = false;
  v.note = est.note.empty() ? "adaptive Gauss-Kronrod, relative tolerance 1e-8" : est.note;
  if (est.holds == Holds::Yes) v.value = est.value;
  if (est.holds == Holds::No) {
    v.witness = std::vector<double>{est.witness_t.value_or(0.0)};
    v.value = std::numeric_limits<double>::infinity();
  }
  return v;
}

}  // namespace detail

// Finiteness of the weighted area of the truncated cone: integral of
// g(t) t^(k-1) over (0, 1].
template <RadialProfile D>
AssumptionVerdict check_a_priori(const D& d, int k) {
  return detail::integral_verdict(d, k, 1.0);
}

// Same integral over (0, r].
template <RadialProfile D>
AssumptionVerdict check_A4(const D& d, int k, double r) {
  return detail::integral_verdict(d, k, r);
}

// a = lim_{t->0+} e^{h(t)} t^k, required finite.
template <RadialProfile D>
AssumptionVerdict check_A1(const D& d, int k) {
  if (k < 1) throw std::invalid_argument("dimension k must be >= 1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if constexpr (std::is_same_v<D, RadialDensity>) {
    std::optional<double> alpha;
    if (auto* f = d.template as<PowerLaw>()) alpha = f->alpha;
    if (d.template as<Constant>()) alpha = 0.0;
    if (alpha) {
      const double e = *alpha + k;
      if (e > 0.0) return AssumptionVerdict::yes(0.0);
      if (e == 0.0) return AssumptionVerdict::yes(1.0);
      return AssumptionVerdict::no({1e-12}, inf);
    }
    if (auto* f = d.template as<ExpPower>()) {
      // exp(eps t^p / 4) stays bounded at 0 unless p < 0 < eps.
      if (f->p < 0.0 && f->epsilon > 0.0) return AssumptionVerdict::no({1e-12}, inf);
      return AssumptionVerdict::yes(0.0);
    }
  }
  std::vector<double> samples;
  for (int j = 1; j <= 12; ++j) {
    const double t = std::pow(10.0, -j);
    samples.push_back(std::exp(d.h(t)) * std::pow(t, k));
  }
  const auto n = samples.size();
  if (!std::isfinite(samples[n - 1])) return AssumptionVerdict::no({1e-12}, inf);
  bool stable = true;
  for (std::size_t j = n - 3; j < n; ++j) {
    const double scale = std::max(std::abs(samples[j]), 1e-12);
    if (std::abs(samples[j] - samples[j - 1]) > 1e-4 * scale) stable = false;
  }
  if (stable) {
    auto v = AssumptionVerdict::yes(samples[n - 1]);
    v.exact = false;
    v.note = "limit sampled at t = 10^-j, j = 1..12";
    return v;
  }
  if (samples[n - 1] > samples[n - 2] && samples[n - 2] > samples[n - 3] &&
      samples[n - 1] > 1e2 * samples[n - 4]) {
    auto v = AssumptionVerdict::no({1e-12}, inf);
    v.exact = false;
    v.note = "samples grow without bound towards t = 0";
    return v;
  }
  return AssumptionVerdict::inconclusive("sampled sequence has not stabilised");
}

// b = inf_{t>0} t h'(t), required b > 2 - k.
template <RadialProfile D>
AssumptionVerdict check_A2(const D& d, int k) {
  if (k < 1) throw std::invalid_argument("dimension k must be >= 1");
  const double bound = 2.0 - k;
  auto decide = [&](double b) {
    if (b > bound) return AssumptionVerdict::yes(b);
    return AssumptionVerdict::no({1.0}, b);
  };
  if constexpr (std::is_same_v<D, RadialDensity>) {
    if (auto* f = d.template as<PowerLaw>()) return decide(f->alpha);
    if (d.template as<Constant>()) return decide(0.0);
    if (auto* f = d.template as<ExpPower>()) {
      if (f->epsilon == 0.0 || f->p == 0.0 || (f->epsilon > 0.0 && f->p > 0.0)) return decide(0.0);
    }
  }
  const auto ts = num::log_grid(detail::kScanLo, detail::kScanHi, detail::kScanPerDecade);
  std::vector<double> vals(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    vals[i] = ts[i] * d.dh(ts[i]);
    if (!std::isfinite(vals[i])) return AssumptionVerdict::inconclusive("t h'(t) not finite on scan");
  }
  const std::size_t last = ts.size() - 1;
  const std::size_t idx =
      static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  const bool falling_low = vals[0] < vals[1];
  const bool falling_high = vals[last] < vals[last - 1];
  if (falling_low && falling_high) {
    auto v = AssumptionVerdict::inconclusive("t h'(t) decreases towards both ends of the scan");
    v.value = vals[idx];
    return v;
  }
  if ((idx == 0 && falling_low) || (idx == last && falling_high)) {
    // Still falling at the edge of the scan: the infimum is not attained.
    if (vals[idx] <= bound) {
      auto v = AssumptionVerdict::no({ts[idx]}, -std::numeric_limits<double>::infinity());
      v.exact = false;
      v.note = "t h'(t) unbounded below on the scanned domain";
      return v;
    }
    // Infimum approached at the scan edge and still above the bound.
    auto v = decide(vals[idx]);
    v.exact = false;
    v.note = detail::scan_note();
    return v;
  }
  const double lo = std::log(ts[idx == 0 ? 0 : idx - 1]);
  const double hi = std::log(ts[std::min(idx + 1, last)]);
  auto [arg, refined] =
      num::minimize([&](double s) { const double t = std::exp(s); return t * d.dh(t); }, lo, hi);
  const double b = std::min(refined, vals[idx]);
  auto v = decide(b);
  if (v.holds == Holds::No) v.witness = std::vector<double>{std::exp(arg)};
  v.exact = false;
  v.note = detail::scan_note();
  return v;
}

// t h'^2 + 2 t h'' + 2 n h' >= 0 for all t > 0.
template <RadialProfile D>
AssumptionVerdict check_A3(const D& d, int n) {
  if (n < 2) throw std::invalid_argument("ambient dimension n must be >= 2");
  if constexpr (std::is_same_v<D, RadialDensity>) {
    std::optional<double> alpha;
    if (auto* f = d.template as<PowerLaw>()) alpha = f->alpha;
    if (d.template as<Constant>()) alpha = 0.0;
    if (alpha) {
      // The expression equals alpha (alpha + 2n - 2) / t.
      const double coeff = *alpha * (*alpha + 2.0 * n - 2.0);
      if (coeff >= 0.0) return AssumptionVerdict::yes(coeff);
      return AssumptionVerdict::no({1.0}, coeff);
    }
  }
  auto normalized = [&](double t) {
    const double d1 = d.dh(t);
    const double d2 = d.d2h(t);
    const double a = t * d1 * d1;
    const double b = 2.0 * t * d2;
    const double c = 2.0 * n * d1;
    const double scale = std::abs(a) + std::abs(b) + std::abs(c);
    return scale > 0.0 ? (a + b + c) / scale : 0.0;
  };
  constexpr double tol = 1e-12;
  const auto ts = num::log_grid(detail::kScanLo, detail::kScanHi, detail::kScanPerDecade);
  std::vector<double> vals(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    vals[i] = normalized(ts[i]);
    if (!std::isfinite(vals[i])) return AssumptionVerdict::inconclusive("expression not finite on scan");
    if (vals[i] < -tol) {
      auto v = AssumptionVerdict::no({ts[i]});
      v.exact = false;
      v.note = detail::scan_note();
      return v;
    }
  }
  // Refine around interior local minima that the grid may have straddled.
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) {
      auto [arg, val] = num::minimize([&](double s) { return normalized(std::exp(s)); },
                                      std::log(ts[i - 1]), std::log(ts[i + 1]));
      if (val < -tol) {
        auto v = AssumptionVerdict::no({std::exp(arg)});
        v.exact = false;
        v.note = detail::scan_note();
        return v;
      }
    }
  }
  auto v = AssumptionVerdict::yes();
  v.exact = false;
  v.note = detail::scan_note();
  return v;
}

namespace detail {

// Scans `rate(t) >= 0` on the standard log grid; a negative value is a witness.
template <class Rate>
AssumptionVerdict monotone_scan(Rate&& rate) {
  const auto ts = num::log_grid(kScanLo, kScanHi, kScanPerDecade);
  for (double t : ts) {
    const double r = rate(t);
    if (!std::isfinite(r)) return AssumptionVerdict::inconclusive("derivative not finite on scan");
    if (r < -1e-12) {
      auto v = AssumptionVerdict::no({t}, r);
      v.exact = false;
      v.note = scan_note();
      return v;
    }
  }
  auto v = AssumptionVerdict::yes();
  v.exact = false;
  v.note = scan_note();
  return v;
}

}  // namespace detail

// g non-decreasing on (0, inf).
template <RadialProfile D>
AssumptionVerdict check_g_nondecreasing(const D& d) {
  if constexpr (std::is_same_v<D, RadialDensity>) {
    if (auto* f = d.template as<PowerLaw>()) {
      if (f->alpha >= 0.0) return AssumptionVerdict::yes();
      return AssumptionVerdict::no({1.0}, f->alpha);
    }
    if (d.template as<Constant>()) return AssumptionVerdict::yes();
  }
  // sign of g' equals sign of h' since g = e^h > 0
  return detail::monotone_scan([&](double t) { return t * d.dh(t); });
}

// g(t)/t non-decreasing on (0, inf), i.e. t h'(t) >= 1.
template <RadialProfile D>
AssumptionVerdict check_g_over_t_nondecreasing(const D& d) {
  if constexpr (std::is_same_v<D, RadialDensity>) {
    if (auto* f = d.template as<PowerLaw>()) {
      if (f->alpha >= 1.0) return AssumptionVerdict::yes();
      return AssumptionVerdict::no({1.0}, f->alpha - 1.0);
    }
    if (d.template as<Constant>()) return AssumptionVerdict::no({1.0}, -1.0);
  }
  return detail::monotone_scan([&](double t) { return t * d.dh(t) - 1.0; });
}

// Hessian of f(x) = g(|x|) applied to (X, X):
//   (g'(r)/r)|X|^2 + ((r g''(r) - g'(r))/r^3) <x, X>^2.
template <RadialProfile D>
double hess_radial(const D& d, std::span<const double> x, std::span<const double> X) {
  if (x.size() != X.size()) throw std::invalid_argument("hess_radial: dimension mismatch");
  double r2 = 0.0, xx = 0.0, XX = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r2 += x[i] * x[i];
    xx += x[i] * X[i];
    XX += X[i] * X[i];
  }
  if (r2 == 0.0) throw std::domain_error("hess_radial: x must be non-zero");
  const double r = std::sqrt(r2);
  const double g1 = d.dg(r);
  const double g2 = d.d2g(r);
  return g1 / r * XX + (r * g2 - g1) / (r2 * r) * xx * xx;
}

}  // namespace conecert
