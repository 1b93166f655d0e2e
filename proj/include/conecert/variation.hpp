#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "conecert/cones.hpp"
#include "conecert/density.hpp"
#include "conecert/errors.hpp"
#include "conecert/quadrature.hpp"
#include "conecert/tridiagonal.hpp"
#include "conecert/verdicts.hpp"

namespace conecert {

enum class StabilityStatus { CertifiedStable, CertifiedUnstable, NotCertified };

inline const char* to_string(StabilityStatus s) {
  switch (s) {
    case StabilityStatus::CertifiedStable: return "certified_stable";
    case StabilityStatus::CertifiedUnstable: return "certified_unstable";
    case StabilityStatus::NotCertified: return "not_certified";
  }
  return "not_certified";
}

struct StabilityVerdict {
  StabilityStatus status = StabilityStatus::NotCertified;
  std::string theorem;
  double margin = 0.0;
  Evidence evidence;
  std::string reason;
};

namespace tags {
inline constexpr const char* kFlatNormalStability = "flat-normal-stability";
inline constexpr const char* kPlaneStability = "plane-stability";
inline constexpr const char* kHyperconeTransfer = "hypercone-transfer";
inline constexpr const char* kSphereInstability = "sphere-instability";
}  // namespace tags

// (k - 2 + b)^2 / 4 + b
inline double stability_threshold(int k, double b) {
  if (k < 2) throw std::invalid_argument("stability_threshold: k must be >= 2");
  const double s = k - 2 + b;
  return 0.25 * s * s + b;
}

// Smallest alpha with stability_threshold(k, alpha) >= k - 1.
inline double alpha_threshold_product(int k) {
  if (k < 3) throw std::invalid_argument("alpha_threshold_product: k must be >= 3");
  return -k + 2.0 * std::sqrt(2.0 * (k - 1));
}

template <RadialProfile D>
StabilityVerdict certify_flat_normal_stability(const ConeModel& model, const D& d) {
  if (!model.has_link_geometry())
    throw std::invalid_argument("certify_flat_normal_stability: cone has no link curvature data");
  const int k = model.dim_cone;
  const double a_sq = *model.link_A_sq;
  StabilityVerdict out;
  out.evidence.set("k", k).set("link_A_sq", a_sq);

  auto plane_fallback = [&](StabilityVerdict v) {
    if (!model.is_plane()) return v;
    const auto mono = check_g_nondecreasing(d);
    if (mono.holds != Holds::Yes) return v;
    v.status = StabilityStatus::CertifiedStable;
    v.theorem = tags::kPlaneStability;
    v.margin = 0.0;
    v.reason.clear();
    v.evidence.note("plane through the origin with non-decreasing g");
    return v;
  };

  const auto a1 = check_A1(d, k);
  if (a1.holds != Holds::Yes) {
    out.reason = std::string("A-1 ") + to_string(a1.holds) +
                 (a1.note.empty() ? "" : ": " + a1.note);
    return plane_fallback(out);
  }
  const auto a2 = check_A2(d, k);
  if (a2.value) out.evidence.set("b", *a2.value);
  if (a2.holds == Holds::Inconclusive) {
    out.reason = "A-2 inconclusive: " + a2.note;
    return plane_fallback(out);
  }
  if (a2.holds == Holds::No) {
    out.reason = "b <= 2 - k";
    out.margin = -std::numeric_limits<double>::infinity();
    if (a2.value && std::isfinite(*a2.value)) {
      out.margin = stability_threshold(k, *a2.value) - a_sq;
    }
    return plane_fallback(out);
  }
  const double b = *a2.value;
  const double threshold = stability_threshold(k, b);
  const double raw = threshold - a_sq;
  constexpr double tol = 1e-12;
  out.evidence.set("threshold", threshold).set("raw_margin", raw).set("tolerance", tol);
  if (!a2.exact) out.evidence.note(a2.note);
  if (a_sq <= threshold + tol) {
    out.status = StabilityStatus::CertifiedStable;
    out.theorem = tags::kFlatNormalStability;
    out.margin = std::max(raw, 0.0);
    return out;
  }
  out.margin = raw;
  out.reason = "link |A|^2 exceeds the stability threshold (sufficient condition only)";
  return plane_fallback(out);
}

// Reduced radial eigenproblem of the weighted second variation.
struct SpectralProblem {
  int k = 3;
  double A_sq = 0.0;
  RadialDensity density;
  double s_min = -20.0;
  double s_max = 20.0;
  int mesh = 4000;
  double mu = 0.0;

  void validate() const {
    if (k < 2) throw std::invalid_argument("SpectralProblem: k must be >= 2");
    if (!(s_min < s_max)) throw std::invalid_argument("SpectralProblem: need s_min < s_max");
    if (mesh < 16) throw std::invalid_argument("SpectralProblem: mesh must be >= 16");
    if (!(A_sq >= 0.0)) throw std::invalid_argument("SpectralProblem: A_sq must be >= 0");
    if (!(mu >= 0.0)) throw std::invalid_argument("SpectralProblem: mu must be >= 0");
  }
  double length() const { return s_max - s_min; }
};

struct SpectralResult {
  double lambda_min = 0.0;
  std::vector<double> s;            // interior grid
  std::vector<double> eigenvector;  // unit l2 norm on the grid
};

// Symmetrised potential in s = ln r:
//   V = F'^2 + F'' + mu - A_sq + t h'(t),  F = (h(t) + (k-2) s) / 2,  t = e^s.
inline double spectral_potential(const SpectralProblem& p, double s) {
  const double t = std::exp(s);
  const double th1 = t * p.density.dh(t);
  const double t2h2 = t * t * p.density.d2h(t);
  const double f1 = 0.5 * (p.k - 2 + th1);
  const double f2 = 0.5 * (th1 + t2h2);
  return f1 * f1 + f2 + p.mu - p.A_sq + th1;
}

inline SpectralResult rayleigh_min_eig(const SpectralProblem& p) {
  p.validate();
  for (double s : {p.s_min, p.s_max}) {
    if (!std::isfinite(p.density.h(std::exp(s))))
      throw NumericError("rayleigh_min_eig: h overflows at window end s = " + std::to_string(s));
  }
  const int n = p.mesh;
  const double h = p.length() / (n + 1);
  SpectralResult out;
  tri::SymTridiagonal t;
  t.diag.resize(n);
  t.off.assign(n - 1, -1.0 / (h * h));
  out.s.resize(n);
  double vmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = p.s_min + (i + 1) * h;
    const double v = spectral_potential(p, s);
    if (!std::isfinite(v))
      throw NumericError("rayleigh_min_eig: potential not finite at s = " + std::to_string(s));
    vmax = std::max(vmax, std::abs(v));
    out.s[i] = s;
    t.diag[i] = 2.0 / (h * h) + v;
  }
  if (h * h * vmax > 1.0)
    throw NumericError("rayleigh_min_eig: mesh too coarse for the potential (h^2 max|V| > 1)");
  out.lambda_min = tri::smallest_eigenvalue(t, 1e-10);
  out.eigenvector = tri::lowest_eigenvector(t, out.lambda_min);
  return out;
}

// Dirichlet eigenvalue of a constant potential on the window.
inline double constant_potential_eigenvalue(int k, double alpha, double A_sq, double mu, double L) {
  const double c = 0.5 * (k - 2 + alpha);
  return c * c + alpha - A_sq + mu + (std::numbers::pi / L) * (std::numbers::pi / L);
}

// Power-law exponent at which lambda_min changes sign, by bisection on
// [alpha_lo, alpha_hi]. Requires a sign change on the bracket.
inline double spectral_alpha_crossing(SpectralProblem base, double alpha_lo, double alpha_hi,
                                      double tol = 1e-7) {
  auto lam = [&](double alpha) {
    base.density = PowerLaw{alpha};
    return rayleigh_min_eig(base).lambda_min;
  };
  const double f_lo = lam(alpha_lo);
  const double f_hi = lam(alpha_hi);
  if ((f_lo < 0.0) == (f_hi < 0.0))
    throw NumericError("spectral_alpha_crossing: no sign change on the bracket");
  return num::bisect(lam, alpha_lo, alpha_hi, tol);
}

// Bump xi(r) = (((r-a)(b-r)) / w^2)^power on [a, b], w = (b-a)/2.
struct BumpSpec {
  double a = 1.0;
  double b = 2.0;
  int power = 3;
  int panels = 64;
};

template <RadialProfile D>
double verify_svco1_identity(const D& d, int n, const BumpSpec& xi) {
  if (!(xi.a > 0.0 && xi.a < xi.b)) throw std::invalid_argument("bump support must be in (0, inf)");
  if (xi.power < 2) throw std::invalid_argument("bump power must be >= 2");
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  const double w2 = 0.25 * (xi.b - xi.a) * (xi.b - xi.a);
  auto base = [&](double r) { return (r - xi.a) * (xi.b - r) / w2; };
  auto bump = [&](double r) { return std::pow(base(r), xi.power); };
  auto dbump = [&](double r) {
    return xi.power * std::pow(base(r), xi.power - 1) * ((xi.b - r) - (r - xi.a)) / w2;
  };
  auto lhs_integrand = [&](double r) {
    const double u = dbump(r) + 0.5 * bump(r) * d.dh(r);
    return u * u * std::exp(d.h(r)) * std::pow(r, n - 2);
  };
  auto grad_integrand = [&](double r) {
    const double u = dbump(r);
    return u * u * std::pow(r, n - 2) * std::exp(d.h(r));
  };
  auto corr_integrand = [&](double r) {
    const double h1 = d.dh(r);
    const double h2 = d.d2h(r);
    const double x = bump(r);
    return (r * h1 * h1 + 2.0 * r * h2 + (2.0 * n - 4.0) * h1) * x * x * std::pow(r, n - 3) *
           std::exp(d.h(r));
  };
  const double lhs = quad::composite_gauss(lhs_integrand, xi.a, xi.b, xi.panels);
  const double rhs = quad::composite_gauss(grad_integrand, xi.a, xi.b, xi.panels) -
                     0.25 * quad::composite_gauss(corr_integrand, xi.a, xi.b, xi.panels);
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1.0);
}

// Conditional certificate: for a stable minimal hypercone in R^n, A-3 and A-4
// transfer area-stability to weighted stability.
template <RadialProfile D>
StabilityVerdict certify_hypercone_transfer(const D& d, int n) {
  if (n < 3) throw std::invalid_argument("certify_hypercone_transfer: n must be >= 3");
  StabilityVerdict out;
  const auto a3 = check_A3(d, n);
  const auto a4 = check_A4(d, n - 1, 1.0);
  out.evidence.set("n", n);
  if (a3.value) out.evidence.set("A3_coefficient", *a3.value);
  if (a4.value) out.evidence.set("A4_integral", *a4.value);
  out.margin = a3.value && std::isfinite(*a3.value) ? *a3.value : 0.0;
  if (a3.holds == Holds::Yes && a4.holds == Holds::Yes) {
    out.status = StabilityStatus::CertifiedStable;
    out.theorem = tags::kHyperconeTransfer;
    out.evidence.note("conditional: area-stability of the hypercone implies f-stability");
    if (!a3.exact) out.evidence.note("A-3 " + a3.note);
    if (!a4.exact) out.evidence.note("A-4 " + a4.note);
    return out;
  }
  out.reason = std::string("A-3 ") + to_string(a3.holds) + ", A-4 " + to_string(a4.holds);
  return out;
}

inline double sphere_volume(int k, double R) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1)) *
         std::pow(R, k);
}

// Equatorial S^k(R) in R^n with density |x|^{-k}, varied by a constant unit
// vector orthogonal to its (k+1)-plane.
inline StabilityVerdict instability_certificate_sphere(int k, int n, double R) {
  if (k < 1) throw std::invalid_argument("instability_certificate_sphere: k must be >= 1");
  if (k > n - 2)
    throw std::invalid_argument("instability_certificate_sphere: need k <= n - 2");
  if (!(R > 0.0)) throw std::invalid_argument("instability_certificate_sphere: R must be > 0");
  StabilityVerdict out;
  out.status = StabilityStatus::CertifiedUnstable;
  out.theorem = tags::kSphereInstability;
  const double vol = sphere_volume(k, R);
  const double curvature = k / (R * R);
  out.margin = -curvature * vol;
  out.evidence.set("k", k).set("n", n).set("R", R).set("volume", vol).set("k_over_R_sq", curvature);
  out.evidence.note("density pow:" + std::to_string(-k) + ", variation field e_" +
                    std::to_string(k + 2));
  return out;
}

}  // namespace conecert
