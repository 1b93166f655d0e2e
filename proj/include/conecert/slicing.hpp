#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conecert/cones.hpp"
#include "conecert/density.hpp"
#include "conecert/parse.hpp"
#include "conecert/verdicts.hpp"

namespace conecert {

// Singular-value slice coordinates: x_1 > ... > x_r > |t| >= 0.
struct SlicePoint {
  std::vector<double> x;
  double t = 0.0;
};

inline void validate(const SlicePoint& s) {
  if (s.x.empty()) throw std::domain_error("slice point needs at least one singular value");
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!(s.x[i] > 0.0)) throw std::domain_error("singular values must be positive");
    if (i > 0 && !(s.x[i] < s.x[i - 1]))
      throw std::domain_error("singular values must be strictly decreasing");
  }
  if (!(std::abs(s.t) < s.x.back())) throw std::domain_error("require |t| < smallest singular value");
}

// Elementary symmetric polynomials sigma_0..sigma_len of the squares c_i^2.
inline std::vector<double> sym_polys(std::span<const double> c) {
  std::vector<double> sigma(c.size() + 1, 0.0);
  sigma[0] = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double sq = c[i] * c[i];
    for (std::size_t j = i + 1; j >= 1; --j) sigma[j] += sq * sigma[j - 1];
  }
  return sigma;
}

namespace detail {

// prod_{i<j} (x_i^2 - x_j^2)^pair_power * prod x_i^exponent * prod (x_i^2 - t^2)
//   / sqrt(1 + sum t^2 / x_i^2)
inline double slice_weight(const SlicePoint& s, int pair_power, int exponent) {
  validate(s);
  double w = 1.0;
  const auto& x = s.x;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      w *= std::pow(x[i] * x[i] - x[j] * x[j], pair_power);
  double ratio = 0.0;
  for (double xi : x) {
    w *= std::pow(xi, exponent) * (xi * xi - s.t * s.t);
    ratio += s.t * s.t / (xi * xi);
  }
  return w / std::sqrt(1.0 + ratio);
}

}  // namespace detail

inline double composite_weight_det(const Determinantal& v, const SlicePoint& s) {
  validate(ConeSpec{v});
  if (v.p + v.q - 2 * v.r < 2) throw std::domain_error("composite_weight_det: need p+q-2r >= 2");
  if (static_cast<int>(s.x.size()) != v.r)
    throw std::domain_error("composite_weight_det: need r singular values");
  return detail::slice_weight(s, 1, v.p + v.q - 2 * v.r - 3);
}

// Pfaffian weight in terms of the half rank r = rank / 2.
inline double composite_weight_pfaff(const Pfaffian& v, const SlicePoint& s) {
  validate(ConeSpec{v});
  const int r = v.half_rank();
  if (v.m - 2 * r < 2) throw std::domain_error("composite_weight_pfaff: need m-2r >= 2");
  if (static_cast<int>(s.x.size()) != r)
    throw std::domain_error("composite_weight_pfaff: need r singular values");
  return detail::slice_weight(s, 2, 2 * v.m - 4 * r - 5);
}

inline int weight_degree_det(const Determinantal& v) {
  return v.r * (v.r - 1) + v.r * (v.p + v.q - 2 * v.r - 3) + 2 * v.r;
}

inline int weight_degree_pfaff(const Pfaffian& v) {
  const int r = v.half_rank();
  return 2 * r * (r - 1) + r * (2 * v.m - 4 * r - 5) + 2 * r;
}

// Both sides of a reduced slicing inequality at one point.
struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  // Logarithms of the (positive) sides, used once g^2 overflows.
  double log_lhs = std::numeric_limits<double>::quiet_NaN();
  double log_rhs = std::numeric_limits<double>::quiet_NaN();
  // (lhs - rhs) / max(|lhs|, |rhs|), zero when both vanish.
  double margin() const {
    if ((!std::isfinite(lhs) || !std::isfinite(rhs)) && std::isfinite(log_lhs) &&
        std::isfinite(log_rhs)) {
      const double gap = log_lhs - log_rhs;
      return gap >= 0.0 ? -std::expm1(-gap) : std::expm1(gap);
    }
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0.0 ? (lhs - rhs) / scale : 0.0;
  }
};

// g^2(sqrt(s1 + n t^2)) s_{n-1}  >=  g^2(sqrt(s1)) sum_{m<n} (m+1) t^{2m} s_{n-1-m}
template <RadialProfile D>
InequalitySides comf3_sides(const D& d, int n, std::span<const double> c, double t) {
  if (static_cast<int>(c.size()) != n - 1) throw std::invalid_argument("comf3: need n-1 values");
  const auto sigma = sym_polys(c);
  const double s1 = sigma[1];
  const double g_out = d.g(std::sqrt(s1 + n * t * t));
  const double g_in = d.g(std::sqrt(s1));
  double sum = 0.0;
  for (int m = 0; m <= n - 1; ++m) sum += (m + 1) * std::pow(t, 2 * m) * sigma[n - 1 - m];
  const double h_out = d.h(std::sqrt(s1 + n * t * t)), h_in = d.h(std::sqrt(s1));
  return {g_out * g_out * sigma[n - 1], g_in * g_in * sum,
          2 * h_out + std::log(sigma[n - 1]), 2 * h_in + std::log(sum)};
}

// g^2(sqrt(s1 + n t^2))  >=  g^2(sqrt(s1)) (1 + t^2 sum 1/(c_i^2 + t^2))
template <RadialProfile D>
InequalitySides comf4_sides(const D& d, int n, std::span<const double> c, double t) {
  if (static_cast<int>(c.size()) != n - 1) throw std::invalid_argument("comf4: need n-1 values");
  const auto sigma = sym_polys(c);
  const double s1 = sigma[1];
  const double g_out = d.g(std::sqrt(s1 + n * t * t));
  const double g_in = d.g(std::sqrt(s1));
  double sum = 0.0;
  for (double ci : c) sum += 1.0 / (ci * ci + t * t);
  const double h_out = d.h(std::sqrt(s1 + n * t * t)), h_in = d.h(std::sqrt(s1));
  return {g_out * g_out, g_in * g_in * (1.0 + t * t * sum), 2 * h_out,
          2 * h_in + std::log1p(t * t * sum)};
}

inline constexpr double kViolationTol = 1e-12;

struct SliceGrid {
  std::vector<std::vector<double>> c_samples;  // each strictly decreasing, length n-1
  std::vector<double> t_fractions;             // of the smallest c entry
  std::string description;
};

inline std::vector<double> standard_t_fractions() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
}

// All strictly decreasing (n-1)-tuples drawn from `count` log-spaced values on [lo, hi].
inline SliceGrid log_slice_grid(int n, double lo, double hi, int count) {
  if (n < 2) throw std::invalid_argument("slice grid: n must be >= 2");
  if (!(lo > 0.0 && lo < hi) || count < n - 1)
    throw std::invalid_argument("slice grid: need 0 < lo < hi and enough samples");
  std::vector<double> values(count);
  for (int i = 0; i < count; ++i)
    values[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
  std::reverse(values.begin(), values.end());
  SliceGrid grid;
  grid.t_fractions = standard_t_fractions();
  const int len = n - 1;
  std::vector<int> idx(len);
  for (int i = 0; i < len; ++i) idx[i] = i;
  while (true) {
    std::vector<double> c(len);
    for (int i = 0; i < len; ++i) c[i] = values[idx[i]];
    grid.c_samples.push_back(std::move(c));
    int pos = len - 1;
    while (pos >= 0 && idx[pos] == count - len + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < len; ++i) idx[i] = idx[i - 1] + 1;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "log:%g,%g,%d", lo, hi, count);
  grid.description = buf;
  return grid;
}

inline SliceGrid preset_slice_grid(int n) {
  auto g = log_slice_grid(n, 1e-2, 1e2, 41);
  g.description = "preset";
  return g;
}

inline SliceGrid coarse_slice_grid(int n) {
  auto g = log_slice_grid(n, 1e-2, 1e2, 9);
  g.description = "coarse";
  return g;
}

// preset | coarse | log:<lo>,<hi>,<count>
inline SliceGrid parse_slice_grid(std::string_view text, int n) {
  detail::SpecCursor cur(text);
  const std::string name = cur.tag(/*allow_bare=*/true);
  if (name == "preset" || name == "coarse") {
    cur.finish();
    return name == "preset" ? preset_slice_grid(n) : coarse_slice_grid(n);
  }
  if (name != "log") cur.fail_at(0, "unknown grid '" + name + "' (expected preset, coarse or log)");
  const double lo = cur.real();
  cur.expect(',');
  const double hi = cur.real();
  cur.expect(',');
  const std::size_t at = cur.pos();
  const int count = cur.integer();
  cur.finish();
  if (!(lo > 0.0 && lo < hi)) cur.fail_at(4, "need 0 < lo < hi");
  if (count < n - 1 || count > 400) cur.fail_at(at, "sample count out of range");
  return log_slice_grid(n, lo, hi, count);
}

enum class ScanVerdict { HoldsOnGrid, ViolatedAt, EqualityLocusConfirmed };

inline const char* to_string(ScanVerdict v) {
  switch (v) {
    case ScanVerdict::HoldsOnGrid: return "holds_on_grid";
    case ScanVerdict::ViolatedAt: return "violated_at";
    case ScanVerdict::EqualityLocusConfirmed: return "equality_locus_confirmed";
  }
  return "holds_on_grid";
}

struct SliceWitness {
  std::vector<double> c;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct InequalityScanReport {
  ScanVerdict verdict = ScanVerdict::HoldsOnGrid;
  std::optional<SliceWitness> witness;
  std::string grid;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t points = 0;
  // Largest |margin| over the t = 0 points.
  double max_abs_margin_t0 = 0.0;
};

namespace detail {

template <class Sides>
InequalityScanReport scan_grid(const SliceGrid& grid, Sides&& sides) {
  InequalityScanReport rep;
  rep.grid = grid.description;
  bool all_t_zero = true;
  for (const auto& c : grid.c_samples) {
    for (double frac : grid.t_fractions) {
      const double t = frac * c.back();
      const InequalitySides s = sides(c, t);
      const double m = s.margin();
      ++rep.points;
      if (t == 0.0) {
        rep.max_abs_margin_t0 = std::max(rep.max_abs_margin_t0, std::abs(m));
      } else {
        all_t_zero = false;
      }
      if (m < rep.min_margin) {
        rep.min_margin = m;
        if (m < -kViolationTol) rep.witness = SliceWitness{c, t, s.lhs, s.rhs, m};
      }
    }
  }
  if (rep.witness) {
    rep.verdict = ScanVerdict::ViolatedAt;
  } else if (all_t_zero && rep.points > 0) {
    rep.verdict = ScanVerdict::EqualityLocusConfirmed;
  } else {
    rep.verdict = ScanVerdict::HoldsOnGrid;
  }
  return rep;
}

}  // namespace detail

template <RadialProfile D>
InequalityScanReport check_comf3_grid(const D& d, int n, const SliceGrid& grid) {
  if (n < 2) throw std::invalid_argument("check_comf3_grid: n must be >= 2");
  return detail::scan_grid(grid, [&](const std::vector<double>& c, double t) {
    return comf3_sides(d, n, c, t);
  });
}

template <RadialProfile D>
InequalityScanReport check_comf4_grid(const D& d, int n, const SliceGrid& grid) {
  if (n < 2) throw std::invalid_argument("check_comf4_grid: n must be >= 2");
  return detail::scan_grid(grid, [&](const std::vector<double>& c, double t) {
    return comf4_sides(d, n, c, t);
  });
}

namespace tags {
inline constexpr const char* kSlicingMonotone = "slicing-monotone";
inline constexpr const char* kSlicingSmallCases = "slicing-small-cases";
inline constexpr const char* kSlicingImpossibility = "slicing-impossibility";
}  // namespace tags

struct SmallCaseVerdict {
  ConeSpec cone;
  bool certified = false;
  AssumptionVerdict monotonicity;  // g(r)/r non-decreasing
  std::string theorem;
};

inline std::vector<ConeSpec> small_case_cones() {
  return {Determinantal{2, 2, 1}, Determinantal{2, 3, 1}, Pfaffian{4, 2}};
}

// The n = 2 reduced inequality is equivalent to g(r)/r non-decreasing.
template <RadialProfile D>
std::vector<SmallCaseVerdict> certify_small_cases(const D& d) {
  const auto mono = check_g_over_t_nondecreasing(d);
  std::vector<SmallCaseVerdict> out;
  for (const auto& cone : small_case_cones()) {
    SmallCaseVerdict v;
    v.cone = cone;
    v.monotonicity = mono;
    v.certified = mono.holds == Holds::Yes;
    if (v.certified) v.theorem = tags::kSlicingSmallCases;
    out.push_back(std::move(v));
  }
  return out;
}

// How the slicing argument applies to a variety.
enum class SlicingCase {
  Monotone,      // weights non-decreasing in t: g non-decreasing suffices
  MonotoneOdd,   // determinantal, p+q-2r >= 4 odd: g non-decreasing suffices
  SmallCase,     // C(2,2,1), C(2,3,1), Pf C(4,2): g(r)/r non-decreasing
  Unresolved,    // C(n,n,n-1), C(n,n+1,n-1), C(2n,2n-2), n >= 3
  Outside        // no slicing weights (Pfaffian with m - 2r = 1)
};

inline const char* to_string(SlicingCase c) {
  switch (c) {
    case SlicingCase::Monotone: return "monotone";
    case SlicingCase::MonotoneOdd: return "monotone_odd";
    case SlicingCase::SmallCase: return "small_case";
    case SlicingCase::Unresolved: return "unresolved";
    case SlicingCase::Outside: return "outside";
  }
  return "outside";
}

enum class ReducedInequality { Comf3, Comf4 };

struct SlicingClass {
  SlicingCase kind = SlicingCase::Outside;
  // Reduced inequality and its order n (= r + 1) for the hypersurface-type cases.
  std::optional<ReducedInequality> inequality;
  int n = 0;
};

inline SlicingClass classify_slicing(const ConeSpec& spec) {
  validate(spec);
  SlicingClass out;
  if (const auto* d = std::get_if<Determinantal>(&spec)) {
    const int gap = d->p + d->q - 2 * d->r;
    if (gap >= 4) {
      out.kind = (d->p + d->q) % 2 == 0 ? SlicingCase::Monotone : SlicingCase::MonotoneOdd;
      return out;
    }
    // gap 2 means q = p = r + 1; gap 3 means q = p + 1 = r + 2.
    out.n = d->r + 1;
    out.inequality = gap == 2 ? ReducedInequality::Comf3 : ReducedInequality::Comf4;
    out.kind = d->r == 1 ? SlicingCase::SmallCase : SlicingCase::Unresolved;
    return out;
  }
  if (const auto* p = std::get_if<Pfaffian>(&spec)) {
    const int r = p->half_rank();
    const int gap = p->m - 2 * r;
    if (gap >= 3) {
      out.kind = SlicingCase::Monotone;
      return out;
    }
    if (gap == 2) {
      out.n = r + 1;
      out.inequality = ReducedInequality::Comf3;
      out.kind = r == 1 ? SlicingCase::SmallCase : SlicingCase::Unresolved;
      return out;
    }
    return out;
  }
  throw std::invalid_argument("classify_slicing: not a determinantal or Pfaffian variety");
}

struct CounterexampleOptions {
  std::vector<double> t_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6};
  int delta_decades = 12;
};

struct CounterexampleResult {
  std::optional<SliceWitness> witness;
  std::size_t evaluations = 0;
  std::string schedule;
};

// Family c = (balanced entries, delta) with sum c_i^2 = 1 fixed, t fixed and
// delta = t 10^{-j} shrinking. Returns the first comf4 violation.
template <RadialProfile D>
CounterexampleResult counterexample_search(const D& d, int n, const CounterexampleOptions& opts = {}) {
  if (n < 3) throw std::invalid_argument("counterexample_search: n must be >= 3");
  CounterexampleResult out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "sigma1=1; t in {%g..%g} (%zu values); delta=t*10^-j, j=1..%d",
                opts.t_schedule.front(), opts.t_schedule.back(), opts.t_schedule.size(),
                opts.delta_decades);
  out.schedule = buf;
  for (double t : opts.t_schedule) {
    for (int j = 1; j <= opts.delta_decades; ++j) {
      const double delta = t * std::pow(10.0, -j);
      std::vector<double> c(n - 1);
      double sq = 0.0;
      for (int i = 0; i < n - 2; ++i) {
        c[i] = 1.0 + 0.01 * (n - 3 - i);
        sq += c[i] * c[i];
      }
      const double scale = std::sqrt((1.0 - delta * delta) / sq);
      for (int i = 0; i < n - 2; ++i) c[i] *= scale;
      c[n - 2] = delta;
      const auto s = comf4_sides(d, n, c, t);
      ++out.evaluations;
      if (s.margin() < -kViolationTol) {
        out.witness = SliceWitness{c, t, s.lhs, s.rhs, s.margin()};
        return out;
      }
    }
  }
  return out;
}

}  // namespace conecert
