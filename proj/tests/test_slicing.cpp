#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "conecert/errors.hpp"
#include "conecert/slicing.hpp"

using namespace conecert;

namespace {

SliceGrid single_point(std::vector<double> c, double t) {
  SliceGrid g;
  g.c_samples = {std::move(c)};
  g.t_fractions = {t / g.c_samples[0].back()};
  g.description = "point";
  return g;
}

}  // namespace

TEST(SymPolys, Examples) {
  EXPECT_EQ(sym_polys(std::vector{1.0, 1.0}), (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(sym_polys(std::vector{1.0, 2.0}), (std::vector<double>{1, 5, 4}));
  // (1 + z)(1 + 4z)(1 + 9z) = 1 + 14 z + 49 z^2 + 36 z^3.
  EXPECT_EQ(sym_polys(std::vector{1.0, 2.0, 3.0}), (std::vector<double>{1, 14, 49, 36}));
}

TEST(CompositeWeight, DeterminantalExamples) {
  EXPECT_DOUBLE_EQ(composite_weight_det(Determinantal{2, 2, 1}, {{1.0}, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(composite_weight_det(Determinantal{2, 3, 1}, {{1.0}, 0.0}), 1.0);
  const double direct = (4.0 - 1.0) * std::pow(2.0 * 1.0, -1) * (4.0 - 0.25) * (1.0 - 0.25) /
                        std::sqrt(1.0 + 0.25 / 4.0 + 0.25);
  EXPECT_NEAR(composite_weight_det(Determinantal{3, 3, 2}, {{2.0, 1.0}, 0.5}), direct, 1e-13);
  EXPECT_NEAR(direct, 3.68242, 1e-5);
}

TEST(CompositeWeight, PfaffianExamples) {
  EXPECT_DOUBLE_EQ(composite_weight_pfaff(Pfaffian{4, 2}, {{1.0}, 0.0}), 1.0);
  EXPECT_NEAR(composite_weight_pfaff(Pfaffian{6, 4}, {{2.0, 1.0}, 0.0}), 18.0, 1e-13);
  // Exponent 2m - 4r - 5 = -1 for m = 4, r = 1.
  const double direct = std::pow(2.0, -1) * (4.0 - 1.0) / std::sqrt(1.0 + 1.0 / 4.0);
  EXPECT_NEAR(composite_weight_pfaff(Pfaffian{4, 2}, {{2.0}, 1.0}), direct, 1e-14);
}

TEST(CompositeWeight, RejectsOutOfDomainPoints) {
  EXPECT_THROW(composite_weight_det(Determinantal{3, 3, 2}, {{1.0, 2.0}, 0.0}), std::domain_error);
  EXPECT_THROW(composite_weight_det(Determinantal{3, 3, 2}, {{2.0, 1.0}, 1.0}), std::domain_error);
  EXPECT_THROW(composite_weight_det(Determinantal{3, 3, 2}, {{2.0}, 0.0}), std::domain_error);
  EXPECT_THROW(composite_weight_pfaff(Pfaffian{5, 4}, {{2.0, 1.0}, 0.0}), std::domain_error);
}

TEST(Comf3, LinearDensityIsEqualityForPairs) {
  const auto rep = check_comf3_grid(RadialDensity(PowerLaw{1}), 2, coarse_slice_grid(2));
  EXPECT_NE(rep.verdict, ScanVerdict::ViolatedAt);
  EXPECT_NEAR(rep.min_margin, 0.0, 1e-14);
}

TEST(Comf3, SqrtDensityViolates) {
  const RadialDensity d(PowerLaw{0.5});
  const auto rep = check_comf3_grid(d, 2, single_point({1.0}, 0.5));
  ASSERT_EQ(rep.verdict, ScanVerdict::ViolatedAt);
  // (1.5)^0.5 * 1 versus 1 * 1.5.
  EXPECT_NEAR(rep.witness->lhs, std::sqrt(1.5), 1e-14);
  EXPECT_NEAR(rep.witness->rhs, 1.5, 1e-14);
}

TEST(Comf3, ThreeSliceMechanism) {
  const RadialDensity d(PowerLaw{1});
  const auto s = comf3_sides(d, 3, std::vector{1.0, 0.01}, 0.1);
  const double s1 = 1.0001, s2 = 1e-4, t2 = 0.01;
  EXPECT_NEAR(s.lhs, (s1 + 3 * t2) * s2, 1e-16);
  EXPECT_NEAR(s.rhs, s1 * (s2 + 2 * t2 * s1 + 3 * t2 * t2), 1e-14);
  EXPECT_LT(s.margin(), -kViolationTol);
}

TEST(Comf4, PairHolds) {
  const auto s = comf4_sides(RadialDensity(PowerLaw{1}), 2, std::vector{1.0}, 0.3);
  EXPECT_NEAR(s.lhs, 1.18, 1e-14);
  EXPECT_NEAR(s.rhs, 1.0 + 0.09 / 1.09, 1e-14);
  EXPECT_GT(s.margin(), 0.0);
}

TEST(Comf4, ImpossibilityPoint) {
  const auto s = comf4_sides(RadialDensity(PowerLaw{1}), 3, std::vector{1.0, 0.01}, 0.1);
  const double s1 = 1.0001;
  EXPECT_NEAR(s.lhs, s1 + 0.03, 1e-14);
  EXPECT_NEAR(s.rhs, s1 * (1 + 0.01 * (1 / 1.01 + 1 / 0.0101)), 1e-12);
  EXPECT_NEAR(s.lhs, 1.0301, 1e-12);
  EXPECT_NEAR(s.rhs, 2.0002, 1e-4);
  const auto rep = check_comf4_grid(RadialDensity(PowerLaw{1}), 3, single_point({1.0, 0.01}, 0.1));
  EXPECT_EQ(rep.verdict, ScanVerdict::ViolatedAt);
}

TEST(Comf4, ZeroOffsetIsEquality) {
  for (const RadialDensity& d : {RadialDensity(PowerLaw{-2}), RadialDensity(ExpPower{1, 2})}) {
    const auto s = comf4_sides(d, 4, std::vector{3.0, 2.0, 0.5}, 0.0);
    EXPECT_EQ(s.lhs, s.rhs);
  }
  const auto rep = check_comf4_grid(RadialDensity(PowerLaw{3}), 3,
                                    [] {
                                      auto g = coarse_slice_grid(3);
                                      g.t_fractions = {0.0};
                                      return g;
                                    }());
  EXPECT_EQ(rep.verdict, ScanVerdict::EqualityLocusConfirmed);
  EXPECT_LE(rep.max_abs_margin_t0, 1e-12);
}

TEST(SliceGrid, PresetShapeAndOrdering) {
  const auto g = preset_slice_grid(3);
  EXPECT_EQ(g.c_samples.size(), 41u * 40u / 2u);
  for (const auto& c : g.c_samples) {
    ASSERT_EQ(c.size(), 2u);
    EXPECT_GT(c[0] - c[1], 1e-6);
  }
  EXPECT_EQ(parse_slice_grid("log:0.1,10,5", 2).c_samples.size(), 5u);
  EXPECT_THROW(parse_slice_grid("log:10,0.1,5", 2), ParseError);
  EXPECT_THROW(parse_slice_grid("fine", 2), ParseError);
}

TEST(SmallCases, LinearAndQuadraticCertified) {
  for (double alpha : {1.0, 2.0}) {
    const auto verdicts = certify_small_cases(RadialDensity(PowerLaw{alpha}));
    ASSERT_EQ(verdicts.size(), 3u);
    for (const auto& v : verdicts) {
      EXPECT_TRUE(v.certified);
      EXPECT_EQ(v.theorem, tags::kSlicingSmallCases);
    }
  }
}

TEST(SmallCases, SqrtDensityNotCertified) {
  for (const auto& v : certify_small_cases(RadialDensity(PowerLaw{0.5}))) {
    EXPECT_FALSE(v.certified);
    ASSERT_TRUE(v.monotonicity.witness.has_value());
  }
}

TEST(Classify, CatalogCases) {
  EXPECT_EQ(classify_slicing(Determinantal{2, 2, 1}).kind, SlicingCase::SmallCase);
  EXPECT_EQ(classify_slicing(Determinantal{2, 3, 1}).kind, SlicingCase::SmallCase);
  EXPECT_EQ(classify_slicing(Pfaffian{4, 2}).kind, SlicingCase::SmallCase);
  EXPECT_EQ(classify_slicing(Determinantal{3, 3, 2}).kind, SlicingCase::Unresolved);
  EXPECT_EQ(classify_slicing(Determinantal{3, 4, 2}).kind, SlicingCase::Unresolved);
  EXPECT_EQ(classify_slicing(Pfaffian{6, 4}).kind, SlicingCase::Unresolved);
  EXPECT_EQ(classify_slicing(Determinantal{3, 3, 1}).kind, SlicingCase::Monotone);
  EXPECT_EQ(classify_slicing(Determinantal{3, 4, 1}).kind, SlicingCase::MonotoneOdd);
  EXPECT_EQ(classify_slicing(Pfaffian{5, 4}).kind, SlicingCase::Outside);  // m - 2r = 1
  EXPECT_EQ(classify_slicing(Pfaffian{5, 2}).kind, SlicingCase::Monotone);
  EXPECT_EQ(classify_slicing(Pfaffian{7, 2}).kind, SlicingCase::Monotone);
  EXPECT_EQ(classify_slicing(Determinantal{3, 3, 2}).n, 3);
  EXPECT_THROW(classify_slicing(Plane{3, 4}), std::invalid_argument);
}

TEST(Counterexample, LinearDensityOrderThree) {
  const auto res = counterexample_search(RadialDensity(PowerLaw{1}), 3);
  ASSERT_TRUE(res.witness.has_value());
  const auto& w = *res.witness;
  EXPECT_NEAR(w.t, 0.1, 1e-15);
  EXPECT_NEAR(w.c.back(), 0.01, 1e-15);
  const auto again = comf4_sides(RadialDensity(PowerLaw{1}), 3, w.c, w.t);
  EXPECT_LT(again.margin(), -kViolationTol);
}

TEST(Counterexample, QuinticPowerFoundWithinLinearSchedule) {
  const auto lin = counterexample_search(RadialDensity(PowerLaw{1}), 3);
  const auto quintic = counterexample_search(RadialDensity(PowerLaw{5}), 3);
  ASSERT_TRUE(quintic.witness.has_value());
  // (1 + 3 t^2)^5 = 1.159 at t = 0.1 is already below the limiting ratio 2.
  EXPECT_LE(quintic.witness->c.back(), lin.witness->c.back());
}

TEST(Counterexample, SteepPowerNeedsSmallerOffset) {
  // (1 + 3 t^2)^50 > 2 at t = 0.1, so the violation needs a smaller t.
  const auto lin = counterexample_search(RadialDensity(PowerLaw{1}), 3);
  const auto steep = counterexample_search(RadialDensity(PowerLaw{50}), 3);
  ASSERT_TRUE(steep.witness.has_value());
  EXPECT_LT(steep.witness->t, lin.witness->t);
  EXPECT_LT(steep.witness->c.back(), lin.witness->c.back());
  EXPECT_GT(steep.evaluations, lin.evaluations);
  EXPECT_LT(comf4_sides(RadialDensity(PowerLaw{50}), 3, steep.witness->c, steep.witness->t).margin(),
            -kViolationTol);
}

TEST(Counterexample, ExpPowerOrderFour) {
  const auto res = counterexample_search(RadialDensity(ExpPower{1, 2}), 4);
  ASSERT_TRUE(res.witness.has_value());
  EXPECT_LT(comf4_sides(RadialDensity(ExpPower{1, 2}), 4, res.witness->c, res.witness->t).margin(),
            -kViolationTol);
}

TEST(Counterexample, NeedsOrderThree) {
  EXPECT_THROW(counterexample_search(RadialDensity(PowerLaw{1}), 2), std::invalid_argument);
}
