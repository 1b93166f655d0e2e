#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "conecert/cones.hpp"
#include "conecert/numerics.hpp"
#include "conecert/verdicts.hpp"

namespace conecert {

// inf over unit normals v of det(I - tan(theta) A_v). Keeps the last minimiser
// as a warm start, so repeated calls along a trajectory stay cheap.
class DetFactor {
 public:
  explicit DetFactor(const ConeModel& model) : model_(&model) {
    if (!model.has_link_geometry())
      throw std::invalid_argument("det_factor: cone family carries no link geometry");
    if (model.is_plane()) return;
    for (std::size_t i = 0; i < model.factors.size(); ++i) {
      const double r = model.factor_radii[i];
      max_slope_ = std::max(max_slope_, std::sqrt(std::max(0.0, 1.0 - r * r)) / r);
    }
    const int dim = model.normal_param_dim();
    if (dim >= 2) {
      std::mt19937_64 rng(0x5eed);
      std::normal_distribution<double> normal;
      for (int s = 0; s < kStarts; ++s) {
        std::vector<double> v(dim);
        for (double& x : v) x = normal(rng);
        normalize(v);
        starts_.push_back(std::move(v));
      }
    }
  }

  // tan(theta) at which some A_v first has eigenvalue 1/tan(theta).
  double focal_tan() const {
    return max_slope_ > 0.0 ? 1.0 / max_slope_ : std::numeric_limits<double>::infinity();
  }

  double operator()(double theta) {
    if (model_->is_plane()) return 1.0;
    const double t = std::tan(theta);
    if (t == 0.0) return 1.0;
    if (t >= focal_tan()) return 0.0;
    if (model_->normal_param_dim() == 1) {
      double best = std::numeric_limits<double>::infinity();
      for (double s : {1.0, -1.0}) best = std::min(best, std::exp(log_det(t, std::vector{s})));
      return best;
    }
    if (model_->normal_param_dim() == 2) return std::exp(circle_min(t));
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_v;
    auto consider = [&](std::vector<double> v) {
      const double val = descend(t, v);
      if (val < best_val) {
        best_val = val;
        best_v = std::move(v);
      }
    };
    if (!warm_.empty()) consider(warm_);
    for (const auto& s : starts_) consider(s);
    warm_ = best_v;
    return std::exp(best_val);
  }

 private:
  static constexpr int kStarts = 32;

  // Unit normals form a circle: scan the angle, then refine the best cell.
  double circle_min(double t) const {
    constexpr int kCells = 96;
    constexpr double step = 2.0 * std::numbers::pi / kCells;
    auto at = [&](double phi) { return log_det(t, std::vector{std::cos(phi), std::sin(phi)}); };
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kCells; ++i) {
      const double val = at(i * step);
      if (val < best_val) {
        best_val = val;
        best = i;
      }
    }
    const auto [phi, val] = num::minimize(at, (best - 1) * step, (best + 1) * step, 30);
    return std::min(val, best_val);
  }

  static void normalize(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
  }

  // sum_i k_i log(1 - t c_i / r_i); finite below the focal angle.
  double log_det(double t, const std::vector<double>& v) const {
    const auto c = normal_coefficients(*model_, v);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      s += model_->factors[i] * std::log(1.0 - t * c[i] / model_->factor_radii[i]);
    return s;
  }

  std::vector<double> gradient(double t, const std::vector<double>& v) const {
    const auto c = normal_coefficients(*model_, v);
    const std::size_t m = c.size();
    std::vector<double> gc(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double ri = model_->factor_radii[i];
      gc[i] = -model_->factors[i] * (t / ri) / (1.0 - t * c[i] / ri);
    }
    std::vector<double> g(v.size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j)
      for (std::size_t i = 0; i < m; ++i) g[j] += model_->normal_basis[i][j] * gc[i];
    double radial = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) radial += g[j] * v[j];
    for (std::size_t j = 0; j < v.size(); ++j) g[j] -= radial * v[j];
    return g;
  }

  // Riemannian steepest descent on the unit sphere with Armijo backtracking.
  double descend(double t, std::vector<double>& v) const {
    double val = log_det(t, v);
    for (int it = 0; it < 200; ++it) {
      const auto g = gradient(t, v);
      double gn2 = 0.0;
      for (double x : g) gn2 += x * x;
      if (gn2 < 1e-24) break;
      double step = 1.0 / std::sqrt(gn2);
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        std::vector<double> trial(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) trial[j] = v[j] - step * g[j];
        normalize(trial);
        const double tv = log_det(t, trial);
        if (std::isfinite(tv) && tv <= val - 1e-4 * step * gn2) {
          v = std::move(trial);
          val = tv;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    return val;
  }

  const ConeModel* model_;
  double max_slope_ = 0.0;
  std::vector<std::vector<double>> starts_;
  std::vector<double> warm_;
};

inline double det_factor(const ConeModel& model, double theta) {
  if (!(theta >= 0.0 && theta < 0.5 * std::numbers::pi))
    throw std::invalid_argument("det_factor: theta must lie in [0, pi/2)");
  DetFactor f(model);
  return f(theta);
}

// Dormand-Prince 5(4) step for a scalar ODE y' = f(x, y).
struct RkStep {
  double y = 0.0;
  double err = 0.0;
};

template <class F>
RkStep dopri5_step(F&& f, double x, double y, double h) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  const double k1 = f(x, y);
  const double k2 = f(x + h / 5, y + h * a21 * k1);
  const double k3 = f(x + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
  const double k4 = f(x + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const double k5 = f(x + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const double k6 =
      f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const double k7 = f(x + h, y5);
  const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {y5, err};
}

struct VanishingAngleOptions {
  double r_blowup = 1e8;
  double theta_max = 0.5 * std::numbers::pi - 1e-6;
  double tol = 1e-10;
  double r_switch = 1e3;
  std::int64_t max_steps = 10'000'000;
};

enum class VanishingOutcome { BlowUp, Stalled, BudgetExceeded };

inline const char* to_string(VanishingOutcome o) {
  switch (o) {
    case VanishingOutcome::BlowUp: return "blow_up";
    case VanishingOutcome::Stalled: return "stalled";
    case VanishingOutcome::BudgetExceeded: return "budget_exceeded";
  }
  return "budget_exceeded";
}

struct TracePoint {
  double theta = 0.0;
  double r = 1.0;
  double radicand = 0.0;
};

struct VanishingAngleResult {
  VanishingOutcome outcome = VanishingOutcome::BudgetExceeded;
  double theta = 0.0;  // theta0 for BlowUp, theta* for Stalled
  std::vector<TracePoint> trace;
  double radicand_min = 0.0;
  std::int64_t accepted_steps = 0;
  std::string note;
};

namespace detail {

// r^{2k} F - 1, evaluated in logarithms.
inline double radicand(int k, double r, double F) {
  if (!(F > 0.0)) return -1.0;
  return std::expm1(2.0 * k * std::log(r) + std::log(F));
}

}  // namespace detail

// Integrates dr/dtheta = r sqrt(r^{2k} F(theta) - 1), r(0) = 1, with
// F = cos^{2k-2}(theta) det(theta)^2 and F ~ 1 - c theta^2 near 0.
template <class DetFn>
VanishingAngleResult integrate_vanishing_angle(int k, DetFn&& det, double c,
                                               const VanishingAngleOptions& opts = {}) {
  if (k < 2) throw std::invalid_argument("integrate_vanishing_angle: k must be >= 2");
  VanishingAngleResult out;
  auto F = [&](double theta) {
    const double d = det(theta);
    return std::pow(std::cos(theta), 2.0 * k - 2.0) * d * d;
  };
  // Near blow-up theta moves by ~u^k per step, below double resolution; such
  // samples replace the previous one so the trace stays strictly increasing.
  auto push = [&](double theta, double r, double rad) {
    if (!out.trace.empty() && theta <= out.trace.back().theta) {
      out.trace.back().r = r;
      out.trace.back().radicand = rad;
    } else {
      out.trace.push_back({theta, r, rad});
    }
    out.radicand_min = std::min(out.radicand_min, rad);
  };
  auto stalled = [&](double theta, std::string why) {
    out.outcome = VanishingOutcome::Stalled;
    out.theta = theta;
    out.note = std::move(why);
    return out;
  };

  const double rad0 = F(0.0) - 1.0;
  push(0.0, 1.0, std::max(rad0, 0.0));
  if (rad0 < -1e-12) return stalled(0.0, "radicand negative at theta = 0");
  const double disc = double(k) * k - 4.0 * c;
  if (disc < 0.0) return stalled(0.0, "no solution leaves r = 1: curvature too large");

  // Series start r = 1 + a theta^2 with the larger root a.
  const double a = 0.25 * (k + std::sqrt(disc));
  constexpr double theta_start = 1e-4;
  for (int j = 1; j <= 3; ++j) {
    const double th = theta_start * j / 3.0;
    const double r = 1.0 + a * th * th;
    push(th, r, detail::radicand(k, r, F(th)));
  }

  // Phase 1 runs in v = sqrt(radicand), which is smooth along the blow-up branch:
  // dv/dtheta = (1 + v^2) (k + (ln F)' / (2 v)), r = ((1 + v^2) / F)^{1/(2k)}.
  auto log_F = [&](double theta) {
    return (2.0 * k - 2.0) * std::log(std::cos(theta)) + 2.0 * std::log(det(theta));
  };
  auto dlog_F = [&](double theta) {
    const double hd = 1e-5;
    return (log_F(theta + hd) - log_F(theta - hd)) / (2.0 * hd);
  };
  auto rhs_v = [&](double theta, double v) {
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (1.0 + v * v) * (k + dlog_F(theta) / (2.0 * v));
  };
  auto r_of = [&](double theta, double v) {
    return std::exp((std::log1p(v * v) - log_F(theta)) / (2.0 * k));
  };
  auto err_norm = [&](double e, double y0, double y1) {
    return std::abs(e) / (opts.tol + opts.tol * std::max(std::abs(y0), std::abs(y1)));
  };
  auto next_h = [](double h, double en) {
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    return h * factor;
  };

  double theta = theta_start;
  double r = 1.0 + a * theta * theta;
  double v = std::sqrt(std::max(0.0, detail::radicand(k, r, F(theta))));
  double h = 1e-4;
  // Leave phase 1 once u^{2k} <= F/4, where the inverted form is well conditioned.
  while (r <= opts.r_switch && v * v < 3.0) {
    if (out.accepted_steps >= opts.max_steps) {
      out.outcome = VanishingOutcome::BudgetExceeded;
      out.theta = theta;
      return out;
    }
    if (theta >= opts.theta_max) return stalled(opts.theta_max, "reached theta_max");
    h = std::min(h, opts.theta_max - theta);
    if (h < 1e-14 * std::max(1.0, theta)) {
      if (v < 1e-4) return stalled(theta, "radicand vanished at finite r");
      return stalled(theta, "step size underflow");
    }
    const auto step = dopri5_step(rhs_v, theta, v, h);
    if (!std::isfinite(step.y) || !std::isfinite(step.err) || step.y <= 0.0) {
      h *= 0.25;
      continue;
    }
    const double en = err_norm(step.err, v, step.y);
    if (en > 1.0) {
      h = next_h(h, en);
      continue;
    }
    const double theta_new = theta + h;
    const double r_new = r_of(theta_new, step.y);
    if (!std::isfinite(r_new)) {
      h *= 0.25;
      continue;
    }
    theta = theta_new;
    v = step.y;
    r = std::max(r, r_new);
    ++out.accepted_steps;
    push(theta, r, v * v);
    h = next_h(h, en);
  }

  // Inverted variable w = ln(1/r): dtheta/dw = -u^k / sqrt(F - u^{2k}).
  auto rhs_w = [&](double w, double th) {
    const double u = std::exp(w);
    const double gap = F(th) - std::pow(u, 2.0 * k);
    return -std::pow(u, k) / std::sqrt(std::max(gap, 1e-300));
  };
  double w = -std::log(r);
  const double w_end = -std::log(opts.r_blowup);
  double hw = -1e-3;
  while (w > w_end) {
    if (out.accepted_steps >= opts.max_steps) {
      out.outcome = VanishingOutcome::BudgetExceeded;
      out.theta = theta;
      return out;
    }
    hw = std::max(hw, w_end - w);
    if (std::abs(hw) < 1e-15) return stalled(theta, "step size underflow");
    const auto step = dopri5_step(rhs_w, w, theta, hw);
    const double en = err_norm(step.err, theta, step.y);
    if (!std::isfinite(step.y) || en > 1.0) {
      hw = std::isfinite(step.y) ? next_h(hw, en) : 0.25 * hw;
      continue;
    }
    const double w_new = w + hw;
    const double r_new = std::exp(-w_new);
    const double Fv = F(step.y);
    const double gap = Fv - std::pow(r_new, -2.0 * k);
    if (gap <= 0.0 || step.y >= opts.theta_max) {
      return stalled(std::min(step.y, opts.theta_max), "radicand vanished before blow-up");
    }
    w = w_new;
    theta = step.y;
    ++out.accepted_steps;
    push(theta, r_new, detail::radicand(k, r_new, Fv));
    hw = next_h(hw, en);
  }
  const double u_b = 1.0 / opts.r_blowup;
  out.outcome = VanishingOutcome::BlowUp;
  out.theta = theta + std::pow(u_b, k) / (k * std::sqrt(F(theta)));
  return out;
}

inline VanishingAngleResult integrate_vanishing_angle(const ConeModel& model,
                                                      const VanishingAngleOptions& opts = {}) {
  if (!model.has_link_geometry())
    throw std::invalid_argument("integrate_vanishing_angle: cone has no link geometry");
  DetFactor det(model);
  const int k = model.dim_cone;
  const double c = (k - 1) + *model.sup_shape_sq;
  return integrate_vanishing_angle(k, det, c, opts);
}

// Re-checks r^{2k} cos^{2k-2} det^2 - 1 >= -tol at every trace sample and the
// monotonicity of theta (strict) and r (non-decreasing, r >= 1).
inline bool verify_jacobian_bound(const VanishingAngleResult& result, const ConeModel& model,
                                  double tol = 1e-9) {
  if (result.outcome != VanishingOutcome::BlowUp) return false;
  if (result.trace.empty()) return false;
  DetFactor det(model);
  const int k = model.dim_cone;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& p = result.trace[i];
    if (p.r < 1.0) return false;
    if (i > 0) {
      if (!(p.theta > result.trace[i - 1].theta)) return false;
      if (p.r < result.trace[i - 1].r) return false;
    }
    const double d = det(p.theta);
    const double F = std::pow(std::cos(p.theta), 2.0 * k - 2.0) * d * d;
    if (detail::radicand(k, p.r, F) < -tol) return false;
  }
  return true;
}

enum class MinimizingStatus { CertifiedMinimizing, NotCertified };

inline const char* to_string(MinimizingStatus s) {
  return s == MinimizingStatus::CertifiedMinimizing ? "certified_minimizing" : "not_certified";
}

struct MinimizingVerdict {
  MinimizingStatus status = MinimizingStatus::NotCertified;
  std::string theorem;
  double margin = 0.0;
  Evidence evidence;
  std::string reason;
};

namespace tags {
inline constexpr const char* kCurvatureCriterion = "curvature-criterion";
inline constexpr const char* kPlaneMinimizing = "plane-minimizing";
}  // namespace tags

// Certified iff the vanishing angle exists and 2 theta0 <= N + 1e-10. The
// conclusion holds for every non-negative, non-decreasing radial density.
inline MinimizingVerdict check_curvature_criterion(const ConeModel& model,
                                                   const VanishingAngleOptions& opts = {}) {
  if (!model.has_link_geometry())
    throw std::invalid_argument("check_curvature_criterion: cone has no link geometry");
  MinimizingVerdict out;
  const auto res = integrate_vanishing_angle(model, opts);
  const double N = *model.normal_radius;
  out.evidence.set("normal_radius", N).set("k", model.dim_cone);
  out.evidence.set("accepted_steps", static_cast<double>(res.accepted_steps));
  out.evidence.set("r_blowup", opts.r_blowup);
  if (res.outcome == VanishingOutcome::Stalled) {
    out.evidence.set("theta_star", res.theta);
    out.reason = "vanishing-angle ODE stalled: " + res.note;
    return out;
  }
  if (res.outcome == VanishingOutcome::BudgetExceeded) {
    out.reason = "vanishing-angle ODE exceeded the step budget";
    return out;
  }
  out.evidence.set("theta0", res.theta);
  out.evidence.note("blow-up declared at r = r_blowup with asymptotic tail added");
  out.margin = N - 2.0 * res.theta;
  if (!verify_jacobian_bound(res, model)) {
    out.reason = "Jacobian bound failed along the trace";
    return out;
  }
  if (2.0 * res.theta <= N + 1e-10) {
    out.status = MinimizingStatus::CertifiedMinimizing;
    out.theorem = model.is_plane() ? tags::kPlaneMinimizing : tags::kCurvatureCriterion;
    out.evidence.note("f-minimizing for every non-negative non-decreasing radial density");
    return out;
  }
  out.reason = "2 theta0 exceeds the normal radius";
  return out;
}

}  // namespace conecert
