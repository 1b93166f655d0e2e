#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace conecert::num {

// Geometric grid from lo to hi (inclusive) with `per_decade` points per decade.
inline std::vector<double> log_grid(double lo, double hi, int per_decade) {
  const double decades = std::log10(hi / lo);
  const int count = static_cast<int>(std::ceil(decades * per_decade)) + 1;
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo * std::pow(10.0, decades * i / (count - 1));
  }
  out.back() = hi;
  return out;
}

// Brent minimisation on [lo, hi]; returns (argmin, min).
template <class F>
std::pair<double, double> minimize(F&& f, double lo, double hi, int bits = 40,
                                   std::uintmax_t max_iter = 200) {
  return boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter);
}

// Bisection for a sign change of f on [lo, hi] with f(lo) and f(hi) of
// opposite sign (zero counts as the `hi` side). Returns the bracket midpoint.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  const bool lo_negative = f(lo) < 0.0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace conecert::num
