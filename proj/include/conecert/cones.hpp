#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conecert/density.hpp"
#include "conecert/errors.hpp"
#include "conecert/numerics.hpp"
#include "conecert/parse.hpp"

namespace conecert {

// Cone catalog.

struct Plane {
  int k = 2;
  int n = 3;
  bool operator==(const Plane&) const = default;
};

struct ProductOfSpheres {
  std::vector<int> factors;
  bool operator==(const ProductOfSpheres&) const = default;
};

// p x q matrices of rank <= r.
struct Determinantal {
  int p = 2, q = 2, r = 1;
  bool operator==(const Determinantal&) const = default;
};

// Skew-symmetric m x m matrices of rank <= rank (rank = 2r, even).
struct Pfaffian {
  int m = 4, rank = 2;
  int half_rank() const { return rank / 2; }
  bool operator==(const Pfaffian&) const = default;
};

using ConeSpec = std::variant<Plane, ProductOfSpheres, Determinantal, Pfaffian>;

inline std::string to_string(const ConeSpec& spec) {
  return std::visit(
      detail::overloaded{
          [](const Plane& s) { return "plane:" + std::to_string(s.k) + "," + std::to_string(s.n); },
          [](const ProductOfSpheres& s) {
            std::string out = "prod:";
            for (std::size_t i = 0; i < s.factors.size(); ++i) {
              if (i) out += "x";
              out += std::to_string(s.factors[i]);
            }
            return out;
          },
          [](const Determinantal& s) {
            return "det:" + std::to_string(s.p) + "," + std::to_string(s.q) + "," +
                   std::to_string(s.r);
          },
          [](const Pfaffian& s) {
            return "pf:" + std::to_string(s.m) + "," + std::to_string(s.rank);
          }},
      spec);
}

// Throws std::invalid_argument when the catalog constraints are violated.
inline void validate(const ConeSpec& spec) {
  std::visit(detail::overloaded{
                 [](const Plane& s) {
                   if (s.k < 1) throw std::invalid_argument("plane: k must be >= 1");
                   if (s.n < s.k + 1) throw std::invalid_argument("plane: n must be >= k+1");
                 },
                 [](const ProductOfSpheres& s) {
                   if (s.factors.size() < 2)
                     throw std::invalid_argument("prod: at least two sphere factors required");
                   for (int f : s.factors)
                     if (f < 1) throw std::invalid_argument("prod: factor dimensions must be >= 1");
                 },
                 [](const Determinantal& s) {
                   if (!(s.r >= 1 && s.r < s.p && s.p <= s.q))
                     throw std::invalid_argument("det: require 1 <= r < p <= q");
                 },
                 [](const Pfaffian& s) {
                   if (s.rank < 2 || s.rank % 2 != 0)
                     throw std::invalid_argument("pf: rank bound must be even and >= 2");
                   if (s.rank >= s.m) throw std::invalid_argument("pf: require rank < m");
                 }},
             spec);
}

// plane:<k>[,<n>] | prod:<k1>x<k2>[x...] | det:<p>,<q>,<r> | pf:<m>,<2r>
inline ConeSpec parse_cone(std::string_view text) {
  detail::SpecCursor cur(text);
  const std::string name = cur.tag();
  ConeSpec out;
  if (name == "plane") {
    Plane s;
    s.k = cur.integer();
    s.n = cur.accept(',') ? cur.integer() : s.k + 1;
    out = s;
  } else if (name == "prod") {
    ProductOfSpheres s;
    s.factors.push_back(cur.integer());
    while (cur.accept('x')) s.factors.push_back(cur.integer());
    out = s;
  } else if (name == "det") {
    Determinantal s;
    s.p = cur.integer();
    cur.expect(',');
    s.q = cur.integer();
    cur.expect(',');
    s.r = cur.integer();
    out = s;
  } else if (name == "pf") {
    Pfaffian s;
    s.m = cur.integer();
    cur.expect(',');
    s.rank = cur.integer();
    out = s;
  } else {
    cur.fail_at(0, "unknown cone family '" + name + "' (expected plane, prod, det or pf)");
  }
  cur.finish();
  try {
    validate(out);
  } catch (const std::invalid_argument& e) {
    cur.fail_at(name.size() + 1, e.what());
  }
  return out;
}

struct ConeModel {
  ConeSpec spec;
  int dim_cone = 0;
  int dim_ambient = 0;
  // Link curvature data; present for Plane and ProductOfSpheres only.
  std::optional<double> link_A_sq;
  std::optional<double> sup_shape_sq;
  std::optional<double> normal_radius;
  std::vector<int> factors;
  std::vector<double> factor_radii;
  // Orthonormal basis (m vectors of length m-1, row i = factor i) of the
  // normal parameter space of a product link, inside the span of the factor
  // position vectors.
  std::vector<std::vector<double>> normal_basis;

  bool has_link_geometry() const { return link_A_sq.has_value(); }
  bool is_plane() const { return std::holds_alternative<Plane>(spec); }
  int normal_param_dim() const {
    if (is_plane()) return dim_ambient - dim_cone;
    return static_cast<int>(factors.size()) - 1;
  }
};

struct ShapeBlock {
  double eigenvalue = 0.0;
  int multiplicity = 0;
};

namespace detail {

// Gram-Schmidt of e_1..e_m against the unit vector `r`.
inline std::vector<std::vector<double>> complement_basis(const std::vector<double>& r) {
  const std::size_t m = r.size();
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < m && cols.size() + 1 < m; ++j) {
    std::vector<double> v(m, 0.0);
    v[j] = 1.0;
    auto remove = [&](const std::vector<double>& u) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += v[i] * u[i];
      for (std::size_t i = 0; i < m; ++i) v[i] -= dot * u[i];
    };
    remove(r);
    for (const auto& c : cols) remove(c);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    cols.push_back(v);
  }
  std::vector<std::vector<double>> rows(m, std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) rows[i][j] = cols[j][i];
  return rows;
}

}  // namespace detail

struct NormalRadius {
  double value = std::numbers::pi;
  bool reentry_found = false;
};

inline NormalRadius normal_radius_search(const ConeModel& model);

inline ConeModel build_cone(const ConeSpec& spec, bool require_curvature = false) {
  validate(spec);
  ConeModel out;
  out.spec = spec;
  std::visit(
      detail::overloaded{
          [&](const Plane& s) {
            out.dim_cone = s.k;
            out.dim_ambient = s.n;
            out.link_A_sq = 0.0;
            out.sup_shape_sq = 0.0;
            out.normal_radius = std::numbers::pi;
            out.factor_radii = {1.0};
          },
          [&](const ProductOfSpheres& s) {
            const int link_dim = std::accumulate(s.factors.begin(), s.factors.end(), 0);
            if (require_curvature && link_dim < 2)
              throw std::invalid_argument("curvature data needs link dimension >= 2");
            out.dim_cone = 1 + link_dim;
            out.dim_ambient = link_dim + static_cast<int>(s.factors.size());
            out.factors = s.factors;
            for (int f : s.factors)
              out.factor_radii.push_back(std::sqrt(static_cast<double>(f) / link_dim));
            out.normal_basis = detail::complement_basis(out.factor_radii);
            // |A_v|^2 = (k-1) sum c_i^2 for every unit normal v.
            out.link_A_sq = static_cast<double>(link_dim);
            out.sup_shape_sq = static_cast<double>(link_dim);
            out.normal_radius = normal_radius_search(out).value;
          },
          [&](const Determinantal& s) {
            if (require_curvature)
              throw std::invalid_argument("determinantal cones carry no curvature data");
            out.dim_cone = s.r * (s.p + s.q - s.r);
            out.dim_ambient = s.p * s.q;
          },
          [&](const Pfaffian& s) {
            if (require_curvature)
              throw std::invalid_argument("Pfaffian cones carry no curvature data");
            const int r = s.half_rank();
            out.dim_cone = r * (2 * s.m - 2 * r - 1);
            out.dim_ambient = s.m * (s.m - 1) / 2;
          }},
      spec);
  return out;
}

// Maps unit coordinates v of the normal parameter space to the coefficient
// vector c (one entry per factor) of the normal direction sum c_i omega_i.
inline std::vector<double> normal_coefficients(const ConeModel& model, std::span<const double> v) {
  const std::size_t m = model.factors.size();
  std::vector<double> c(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < v.size(); ++j) c[i] += model.normal_basis[i][j] * v[j];
  return c;
}

inline std::vector<ShapeBlock> shape_eigenvalues(const ConeModel& model, std::span<const double> v) {
  if (!model.has_link_geometry())
    throw std::invalid_argument("shape_eigenvalues: cone family carries no link geometry");
  if (static_cast<int>(v.size()) != model.normal_param_dim())
    throw std::invalid_argument("shape_eigenvalues: normal coordinates have wrong dimension");
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (std::abs(std::sqrt(norm) - 1.0) > 1e-9)
    throw std::invalid_argument("shape_eigenvalues: v must be a unit vector");
  if (model.is_plane()) return {};
  const auto c = normal_coefficients(model, v);
  std::vector<ShapeBlock> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    out.push_back({c[i] / model.factor_radii[i], model.factors[i]});
  return out;
}

inline double shape_norm_sq(std::span<const ShapeBlock> blocks) {
  double s = 0.0;
  for (const auto& b : blocks) s += b.multiplicity * b.eigenvalue * b.eigenvalue;
  return s;
}

inline double shape_trace(std::span<const ShapeBlock> blocks) {
  double s = 0.0;
  for (const auto& b : blocks) s += b.multiplicity * b.eigenvalue;
  return s;
}

// Normal geodesic from the base point with factor norms r_i, in the direction
// with coefficients c: factor i has norm |r_i cos a + c_i sin a|. It lies on the
// link again exactly when every factor norm returns to r_i.
inline NormalRadius normal_radius_search(const ConeModel& model) {
  if (model.is_plane()) return {std::numbers::pi, true};
  if (!model.has_link_geometry())
    throw std::invalid_argument("normal_radius: cone family carries no link geometry");
  const auto& r = model.factor_radii;
  const std::size_t m = r.size();

  std::vector<std::vector<double>> directions;  // coefficient vectors c
  // Directions towards the points (eps_i r_i omega_i), the only candidates for re-entry.
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double cos_a = 0.0;
    for (std::size_t i = 0; i < m; ++i) cos_a += ((mask >> i) & 1u ? -1.0 : 1.0) * r[i] * r[i];
    const double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));
    if (sin_a < 1e-14) continue;
    std::vector<double> c(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double eps = (mask >> i) & 1u ? -1.0 : 1.0;
      c[i] = (eps - cos_a) * r[i] / sin_a;
    }
    directions.push_back(std::move(c));
  }
  const int dim = model.normal_param_dim();
  if (dim == 1) {
    for (double s : {1.0, -1.0}) directions.push_back(normal_coefficients(model, std::vector{s}));
  } else {
    std::mt19937_64 rng(20240607);
    std::normal_distribution<double> normal;
    for (int j = 0; j < 256; ++j) {
      std::vector<double> v(dim);
      double norm = 0.0;
      for (double& x : v) {
        x = normal(rng);
        norm += x * x;
      }
      for (double& x : v) x /= std::sqrt(norm);
      directions.push_back(normal_coefficients(model, v));
    }
  }

  NormalRadius best;
  constexpr double step = 1e-3;
  for (const auto& c : directions) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (std::abs(c[i]) > std::abs(c[j])) j = i;
    auto e = [&](std::size_t i, double a) { return r[i] * std::cos(a) + c[i] * std::sin(a); };
    auto f = [&](double a) { return e(j, a) * e(j, a) - r[j] * r[j]; };
    auto defect = [&](double a) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double diff = std::abs(e(i, a)) - r[i];
        d += diff * diff;
      }
      return d;
    };
    double prev_a = step;
    double prev_f = f(prev_a);
    for (double a = 2 * step; a < std::min(best.value, std::numbers::pi) + step; a += step) {
      const double cur = f(a);
      if ((prev_f < 0.0) != (cur < 0.0)) {
        const double root = num::bisect(f, prev_a, a, 1e-12);
        if (defect(root) < 1e-12) {
          if (root < best.value) best = {root, true};
          break;
        }
      }
      prev_a = a;
      prev_f = cur;
    }
  }
  return best;
}

inline double normal_radius(const ConeModel& model) { return normal_radius_search(model).value; }

// Surfaces for the stationarity residual.
struct PlaneThroughOrigin {
  int k = 2;
};
struct MinimalCone {
  ConeModel model;
};
struct RoundSphere {
  int k = 1;
  double R = 1.0;
};
using StationarySurface = std::variant<PlaneThroughOrigin, MinimalCone, RoundSphere>;

// max over samples of |g(|x|) H - g'(|x|) x^perp / |x||, with H the
// sum-trace mean curvature vector. Sphere samples are scaled onto |x| = R.
template <RadialProfile D>
double stationarity_residual(const StationarySurface& surface, const D& d,
                             std::span<const std::vector<double>> samples) {
  double worst = 0.0;
  for (const auto& x : samples) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::domain_error("stationarity_residual: sample at the origin");
    const double res = std::visit(
        detail::overloaded{
            // H = 0 and x^perp = 0: the position vector is tangent.
            [&](const PlaneThroughOrigin&) { return 0.0; },
            [&](const MinimalCone&) { return 0.0; },
            [&](const RoundSphere& s) {
              if (static_cast<int>(x.size()) < s.k + 1)
                throw std::invalid_argument("stationarity_residual: sample dimension < k+1");
              // H = -(k/R^2) x and x^perp = x on |x| = R.
              const double R = s.R;
              return std::abs(d.g(R) * s.k / (R * R) + d.dg(R) / R) * R;
            }},
        surface);
    worst = std::max(worst, res);
  }
  return worst;
}

}  // namespace conecert
