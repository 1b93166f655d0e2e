#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "conecert/cones.hpp"
#include "conecert/density.hpp"
#include "conecert/errors.hpp"

using namespace conecert;

namespace {

// Marches the normal geodesics in both directions +-N, step 1e-4, and bisects
// the first return of factor 1's norm to r_1.
double marched_normal_radius(double r1, double r2) {
  const double step = 1e-4;
  double best = std::numbers::pi;
  for (double c1 : {r2, -r2}) {
    auto f = [&](double a) { return std::abs(r1 * std::cos(a) + c1 * std::sin(a)) - r1; };
    double lo = step;
    double f_lo = f(lo);
    for (double a = 2 * step; a <= best; a += step) {
      const double f_a = f(a);
      if ((f_lo < 0) != (f_a < 0)) {
        double hi = a;
        for (int i = 0; i < 80; ++i) {
          const double mid = 0.5 * (lo + hi);
          ((f(mid) < 0) == (f_lo < 0) ? lo : hi) = mid;
        }
        best = std::min(best, 0.5 * (lo + hi));
        break;
      }
      lo = a;
      f_lo = f_a;
    }
  }
  return best;
}

}  // namespace

TEST(ConeParse, RoundTripsCatalogSpecs) {
  for (const char* s : {"plane:3,4", "prod:3x3", "prod:2x2x2", "det:2,3,1", "pf:6,4"})
    EXPECT_EQ(to_string(parse_cone(s)), s);
  EXPECT_EQ(to_string(parse_cone("plane:3")), "plane:3,4");
}

TEST(ConeParse, RejectsInvalidSpecs) {
  EXPECT_THROW(parse_cone("det:3,2,1"), ParseError);   // p <= q
  EXPECT_THROW(parse_cone("det:2,3,2"), ParseError);   // r < p
  EXPECT_THROW(parse_cone("pf:4,3"), ParseError);      // odd rank
  EXPECT_THROW(parse_cone("pf:4,4"), ParseError);      // 2r < m
  EXPECT_THROW(parse_cone("prod:3x0"), ParseError);
  EXPECT_THROW(parse_cone("plane:3,3"), ParseError);   // n >= k+1
  EXPECT_THROW(parse_cone("torus:1"), ParseError);
}

TEST(BuildCone, ProductOfThreeSpheresPairs) {
  const auto m = build_cone(ProductOfSpheres{{3, 3}});
  EXPECT_EQ(m.dim_cone, 7);
  EXPECT_EQ(m.dim_ambient, 8);
  EXPECT_EQ(*m.link_A_sq, 6.0);
  ASSERT_EQ(m.factor_radii.size(), 2u);
  EXPECT_NEAR(m.factor_radii[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(m.factor_radii[1], std::sqrt(0.5), 1e-15);
}

TEST(BuildCone, PlaneHasFlatLink) {
  const auto m = build_cone(Plane{3, 4});
  EXPECT_EQ(*m.link_A_sq, 0.0);
  EXPECT_EQ(*m.normal_radius, std::numbers::pi);
  EXPECT_EQ(normal_radius(build_cone(Plane{4, 5})), std::numbers::pi);
}

TEST(BuildCone, DeterminantalAndPfaffianDimensions) {
  // Rank-1 2x3 matrices: u v^T up to scale, 2 + 3 - 1 parameters.
  const auto d = build_cone(Determinantal{2, 3, 1});
  EXPECT_EQ(d.dim_cone, 4);
  EXPECT_EQ(d.dim_ambient, 6);
  EXPECT_FALSE(d.has_link_geometry());
  // Rank-2 skew 4x4: the Pfaffian hypersurface in R^6.
  const auto p = build_cone(Pfaffian{4, 2});
  EXPECT_EQ(p.dim_cone, 5);
  EXPECT_EQ(p.dim_ambient, 6);
  EXPECT_THROW(build_cone(Determinantal{2, 3, 1}, true), std::invalid_argument);
}

TEST(BuildCone, CurvatureRequestNeedsTwoDimensionalLink) {
  EXPECT_THROW(build_cone(ProductOfSpheres{{1}}, true), std::invalid_argument);
  EXPECT_NO_THROW(build_cone(ProductOfSpheres{{1, 1}}, true));
}

TEST(ShapeEigenvalues, EqualFactors) {
  const auto m = build_cone(ProductOfSpheres{{3, 3}});
  const auto blocks = shape_eigenvalues(m, std::vector{1.0});
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_NEAR(blocks[0].eigenvalue, 1.0, 1e-12);
  EXPECT_EQ(blocks[0].multiplicity, 3);
  EXPECT_NEAR(blocks[1].eigenvalue, -1.0, 1e-12);
  EXPECT_EQ(blocks[1].multiplicity, 3);
}

TEST(ShapeEigenvalues, UnequalFactors) {
  const auto m = build_cone(ProductOfSpheres{{1, 5}});
  const auto blocks = shape_eigenvalues(m, std::vector{1.0});
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_NEAR(blocks[0].eigenvalue, std::sqrt(5.0), 1e-12);
  EXPECT_EQ(blocks[0].multiplicity, 1);
  EXPECT_NEAR(blocks[1].eigenvalue, -1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_EQ(blocks[1].multiplicity, 5);
  EXPECT_NEAR(shape_trace(blocks), 0.0, 1e-12);
}

TEST(ShapeEigenvalues, PlaneIsTotallyGeodesic) {
  const auto m = build_cone(Plane{5, 7});
  EXPECT_TRUE(shape_eigenvalues(m, std::vector{0.6, 0.8}).empty());
}

TEST(ShapeEigenvalues, MatchesEmbeddingFiniteDifference) {
  // Link S^3(r) x S^3(r) in S^7, normal N = (r2 w1, -r1 w2). Along a great
  // circle of the first factor, <d^2 x / ds^2, N> gives -lambda_1.
  const double r1 = std::sqrt(0.5), r2 = std::sqrt(0.5), h = 1e-4;
  auto x1 = [&](double s) { return std::vector{r1 * std::cos(s / r1), r1 * std::sin(s / r1)}; };
  const auto a = x1(h), b = x1(0), c = x1(-h);
  const double acc0 = (a[0] - 2 * b[0] + c[0]) / (h * h);
  const double acc1 = (a[1] - 2 * b[1] + c[1]) / (h * h);
  const double second_ff = acc0 * (r2 * b[0] / r1) + acc1 * (r2 * b[1] / r1);
  const auto m = build_cone(ProductOfSpheres{{3, 3}});
  EXPECT_NEAR(shape_eigenvalues(m, std::vector{1.0})[0].eigenvalue, -second_ff, 1e-7);
}

TEST(ShapeEigenvalues, RejectsNonUnitOrWrongDimension) {
  const auto m = build_cone(ProductOfSpheres{{2, 2, 2}});
  EXPECT_THROW(shape_eigenvalues(m, std::vector{1.0}), std::invalid_argument);
  EXPECT_THROW(shape_eigenvalues(m, std::vector{1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(shape_eigenvalues(build_cone(Determinantal{2, 2, 1}), std::vector{1.0}),
               std::invalid_argument);
}

TEST(NormalRadius, CliffordTorusMatchesMarching) {
  const auto m = build_cone(ProductOfSpheres{{1, 1}});
  const double oracle = marched_normal_radius(std::sqrt(0.5), std::sqrt(0.5));
  EXPECT_NEAR(*m.normal_radius, oracle, 1e-9);
  EXPECT_NEAR(*m.normal_radius, std::numbers::pi / 2, 1e-9);
}

TEST(NormalRadius, UnequalPairMatchesMarching) {
  const auto m = build_cone(ProductOfSpheres{{1, 5}});
  const double oracle = marched_normal_radius(std::sqrt(1.0 / 6), std::sqrt(5.0 / 6));
  EXPECT_NEAR(*m.normal_radius, oracle, 1e-9);
  EXPECT_NEAR(*m.normal_radius, std::acos(2.0 / 3.0), 1e-9);
}

TEST(NormalRadius, ThreeFactorsReenterAtReflectedPoint) {
  // Reflecting one factor of the base point (r, r, r), r^2 = 1/3.
  const auto m = build_cone(ProductOfSpheres{{2, 2, 2}});
  EXPECT_NEAR(*m.normal_radius, std::acos(1.0 / 3.0), 1e-9);
}

TEST(Stationarity, PlaneResidualVanishes) {
  const std::vector<std::vector<double>> pts{{1, 2, 3, 0}, {0.1, 0, 0, 0}};
  EXPECT_EQ(stationarity_residual(PlaneThroughOrigin{3}, RadialDensity(ExpPower{1, 2}), pts), 0.0);
}

TEST(Stationarity, SphereWithCriticalPowerIsStationary) {
  const std::vector<std::vector<double>> pts{{1, 0, 0, 0}, {0, 0.6, 0.8, 0}};
  EXPECT_NEAR(stationarity_residual(RoundSphere{2, 1.0}, RadialDensity(PowerLaw{-2}), pts), 0.0,
              1e-14);
}

TEST(Stationarity, SphereWithLinearDensity) {
  // |g H - g' x^perp / |x|| = |-2x - x| = 3 on |x| = 1.
  const std::vector<std::vector<double>> pts{{1, 0, 0, 0}};
  EXPECT_NEAR(stationarity_residual(RoundSphere{2, 1.0}, RadialDensity(PowerLaw{1}), pts), 3.0,
              1e-14);
}

TEST(Stationarity, OriginSampleRejected) {
  const std::vector<std::vector<double>> pts{{0, 0, 0}};
  EXPECT_THROW(stationarity_residual(RoundSphere{1, 1.0}, RadialDensity(PowerLaw{1}), pts),
               std::domain_error);
}
