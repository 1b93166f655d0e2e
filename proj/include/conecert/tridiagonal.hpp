#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conecert::tri {

// Symmetric tridiagonal matrix: diag[0..n), off[0..n-1) with off[i] = T(i, i+1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
};

// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
inline std::size_t sturm_count(const SymTridiagonal& t, double x) {
  constexpr double tiny = 1e-300;
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

inline std::pair<double, double> gershgorin(const SymTridiagonal& t) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(t.off[i - 1]);
    if (i + 1 < t.size()) radius += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  return {lo, hi};
}

// Smallest eigenvalue by bisection on the Sturm count, absolute tolerance `tol`.
inline double smallest_eigenvalue(const SymTridiagonal& t, double tol = 1e-10) {
  if (t.size() == 0 || t.off.size() + 1 != t.size())
    throw std::invalid_argument("smallest_eigenvalue: malformed tridiagonal matrix");
  auto [lo, hi] = gershgorin(t);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(t, mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves (T - sigma I) x = rhs by Thomas elimination; T - sigma I must be
// positive definite.
inline std::vector<double> solve_shifted(const SymTridiagonal& t, double sigma,
                                         const std::vector<double>& rhs) {
  const std::size_t n = t.size();
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double pivot = t.diag[0] - sigma;
  c[0] = n > 1 ? t.off[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = t.diag[i] - sigma - t.off[i - 1] * c[i - 1];
    if (i + 1 < n) c[i] = t.off[i] / pivot;
    d[i] = (rhs[i] - t.off[i - 1] * d[i - 1]) / pivot;
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// Unit eigenvector for the smallest eigenvalue `lambda` by inverse iteration
// with a shift just below it. Sign fixed so that the entries sum positive.
inline std::vector<double> lowest_eigenvector(const SymTridiagonal& t, double lambda,
                                              int iterations = 4) {
  const double sigma = lambda - (1e-8 * std::max(1.0, std::abs(lambda)) + 1e-9);
  std::vector<double> x(t.size(), 1.0);
  for (int it = 0; it < iterations; ++it) {
    x = solve_shifted(t, sigma, x);
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum < 0.0)
    for (double& v : x) v = -v;
  return x;
}

}  // namespace conecert::tri
