#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conecert/verdicts.hpp"

namespace conecert::quad {

struct PieceResult {
  double value = 0.0;
  double error = 0.0;  // relative
  bool finite = true;
};

// Adaptive 15-point Gauss-Kronrod on [a, b]. Overflow inside the integrand is
// reported as a non-finite piece instead of propagating an exception.
//
// Boost compares an error estimate on [-1, 1] against a tolerance scaled by the
// interval width, so tiny intervals never terminate early and the reported
// error is not comparable across depths. Each call therefore maps its interval
// onto [0, 1], and the error is the disagreement with the two-halves integral.
template <class F>
PieceResult gauss_kronrod(F&& f, double a, double b, double tol = 1e-12,
                          unsigned max_depth = 18) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto on_unit = [&](double lo, double hi) {
    const double width = hi - lo;
    auto unit = [&](double s) { return f(lo + width * s); };
    return width * GK::integrate(unit, 0.0, 1.0, max_depth, tol);
  };
  PieceResult out;
  double halves = 0.0;
  try {
    const double mid = 0.5 * (a + b);
    out.value = on_unit(a, b);
    halves = on_unit(a, mid) + on_unit(mid, b);
  } catch (const std::exception&) {
    out.finite = false;
    return out;
  }
  out.finite = std::isfinite(out.value) && std::isfinite(halves);
  const double scale = std::max(std::abs(out.value), std::abs(halves));
  out.error = scale > 0.0 ? std::abs(out.value - halves) / scale : 0.0;
  return out;
}

// Composite fixed-order Gauss-Legendre with `panels` equal subintervals.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * width;
    sum += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, lo + width);
  }
  return sum;
}

struct IntegralEstimate {
  Holds holds = Holds::Inconclusive;
  double value = 0.0;
  std::optional<double> witness_t;
  std::string note;
};

// Decides whether the integral of g(t) t^(k-1) over (0, upper] is finite.
//
// The interval is cut into decades [upper 10^-j, upper 10^-(j-1)] walked
// towards the origin. Each decade is integrated in the variable u = t^k, which
// absorbs the t^(k-1) weight. The partial sums decide the outcome:
//   * converged when the last two decades contribute < rel_tol of the total,
//   * converged when successive decade ratios settle at q < 1: the remainder
//     behaves like t^e with e = -log10 q and is integrated in u = t^e,
//   * divergent when the total grows by a factor > 10 over three decades,
//     the decade ratios settle at q >= 1, or the integrand overflows,
//   * inconclusive otherwise (including any decade whose quadrature error
//     exceeds rel_tol).
template <class G>
IntegralEstimate radial_integral_from_zero(G&& g, int k, double upper,
                                           double rel_tol = 1e-8, int decades = 14) {
  IntegralEstimate out;
  const double inv_k = 1.0 / k;
  auto in_u = [&](double u) { return inv_k * g(std::pow(u, inv_k)); };

  std::vector<double> partial;
  double total = 0.0;
  double prev_piece = 0.0;
  double prev_ratio = 0.0;
  for (int j = 1; j <= decades; ++j) {
    const double hi = upper * std::pow(10.0, -(j - 1));
    const double lo = upper * std::pow(10.0, -j);
    PieceResult piece = gauss_kronrod(in_u, std::pow(lo, k), std::pow(hi, k), rel_tol * 1e-3);
    if (!piece.finite) {
      out.holds = Holds::No;
      out.witness_t = lo;
      out.note = "integrand overflows near t=" + std::to_string(lo);
      return out;
    }
    if (piece.error > rel_tol) {
      out.note = "quadrature error above tolerance on a decade";
      return out;
    }
    total += piece.value;
    partial.push_back(total);
    if (j >= 4 && partial[j - 1] > 10.0 * partial[j - 4]) {
      out.holds = Holds::No;
      out.witness_t = lo;
      out.note = "partial integrals grow by more than 10x over three decades";
      out.value = total;
      return out;
    }
    if (j >= 3 && prev_piece > 0.0 && prev_ratio > 0.0) {
      const double q = piece.value / prev_piece;
      if (std::abs(q - prev_ratio) <= 1e-4 * prev_ratio) {
        if (q >= 1.0 - 1e-9) {
          out.holds = Holds::No;
          out.witness_t = lo;
          out.note = "decade contributions do not decay";
          out.value = total;
          return out;
        }
        const double e = -std::log10(q);
        auto in_v = [&](double u) {
          const double t = std::pow(u, 1.0 / e);
          return g(t) * std::pow(t, k - e) / e;
        };
        PieceResult tail = gauss_kronrod(in_v, 0.0, std::pow(lo, e), rel_tol * 1e-3);
        if (tail.finite && std::abs(tail.value - piece.value * q / (1.0 - q)) <=
                               1e-3 * std::abs(tail.value) + rel_tol * total) {
          out.holds = Holds::Yes;
          out.value = total + tail.value;
          return out;
        }
      }
    }
    if (j >= 2 && prev_piece > 0.0) prev_ratio = piece.value / prev_piece;
    if (j >= 3 && piece.value <= rel_tol * total && prev_piece <= rel_tol * total) {
      PieceResult tail = gauss_kronrod(in_u, 0.0, std::pow(lo, k), rel_tol * 1e-3);
      if (!tail.finite) {
        out.holds = Holds::No;
        out.witness_t = lo;
        out.note = "integrand overflows at the origin";
        return out;
      }
      out.holds = Holds::Yes;
      out.value = total + tail.value;
      return out;
    }
    prev_piece = piece.value;
  }
  out.value = total;
  out.note = "partial integrals did not settle within the decade budget";
  return out;
}

}  // namespace conecert::quad
