// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "targets.hpp"

namespace rmc {
namespace {

using namespace rmc::testing;

const VarOrder kXY{"x", "y"};

Expression region(const char* text) { return Expression::parse(text, kXY); }
ScalarField integrand(const char* text) { return ScalarField::parse(text, kXY); }

TEST(Screened, WholeBoxRegionHasUnitFraction) {
  const auto g = integrand("1 + 0*x*y");
  for (const char* r : {"1", "x <= 4"}) {
    const auto est = integrate_screened(g, region(r), Box{{0, 4}, {0, 4}}, 2000, 3, 1);
    EXPECT_EQ(est.replications, 3u);
    for (double b : est.region_fractions) EXPECT_EQ(b, 1.0);
    for (double a : est.box_integrals) EXPECT_DOUBLE_EQ(a, 16.0);
    EXPECT_DOUBLE_EQ(est.value, 16.0);
    EXPECT_EQ(est.std_error, 0.0);
  }
}

TEST(Screened, HalfSquare) {
  const auto est = integrate_screened(integrand("1 + 0*x*y"), region("y < x"),
                                      Box{{0, 1}, {0, 1}}, 20'000, 10, 2);
  EXPECT_NEAR(est.value, 0.5, 4 * est.std_error + 1e-9);
  EXPECT_NEAR(est.value, 0.5, 0.01);
}

TEST(Screened, ParabolaRegion) {
  const auto est = integrate_screened(integrand("x*y"), region(kRegionD), parabola_box(),
                                      50'000, 10, 3);
  EXPECT_NEAR(est.value, kParabolaValue, 0.1);
  EXPECT_NEAR(est.value, kParabolaValue, 5 * est.std_error);
  EXPECT_EQ(est.n_uniform, 500'000u);
  EXPECT_EQ(est.n_screened, 500'000u);
  EXPECT_LE(est.n_in_region, est.n_screened);
  EXPECT_GE(est.proposals_drawn, est.n_screened);
  // box integral of xy over [0,4] x [0,2] is 16
  for (double a : est.box_integrals) EXPECT_NEAR(a, 16.0, 0.5);
  EXPECT_EQ(est.per_replication_values.size(), 10u);
}

TEST(Screened, OppositeLineInequalityIntegratesToFourteenThirds) {
  const auto est = integrate_screened(integrand("x*y"), region(kRegionOpposite),
                                      parabola_box(), 50'000, 10, 4);
  EXPECT_NEAR(est.value, 14.0 / 3, 0.1);
}

TEST(Screened, Deterministic) {
  const auto a = integrate_screened(integrand("x*y"), region(kRegionD), parabola_box(),
                                    5000, 4, 99);
  const auto b = integrate_screened(integrand("x*y"), region(kRegionD), parabola_box(),
                                    5000, 4, 99);
  EXPECT_EQ(a.per_replication_values, b.per_replication_values);
  EXPECT_EQ(a.proposals_drawn, b.proposals_drawn);
}

TEST(Screened, NegativeIntegrandIsAnError) {
  EXPECT_THROW(integrate_screened(integrand("x - 1 + 0*y"), region("1"),
                                  Box{{0, 2}, {0, 1}}, 100, 2, 1),
               ModelError);
}

TEST(Screened, NonIndicatorRegionIsAnError) {
  EXPECT_THROW(integrate_screened(integrand("1 + 0*x*y"), region("x + y"),
                                  Box{{0.5, 1}, {0.5, 1}}, 100, 1, 1),
               ModelError);
}

TEST(Screened, InputChecks) {
  const auto g = integrand("x*y");
  const auto r = region(kRegionD);
  EXPECT_THROW(integrate_screened(g, r, parabola_box(), 0, 1, 1), ModelError);
  EXPECT_THROW(integrate_screened(g, r, parabola_box(), 10, 0, 1), ModelError);
  EXPECT_THROW(integrate_screened(g, Expression::parse("x < 1", VarOrder{"x"}),
                                  parabola_box(), 10, 1, 1),
               ModelError);
}

TEST(Screened, NestedRegionsGiveOrderedEstimates) {
  // same seed, so S1 and S2 coincide and counts are monotone in the region
  const auto g = integrand("x*y");
  const auto small = integrate_screened(g, region("x < 1"), parabola_box(), 4000, 3, 5);
  const auto large = integrate_screened(g, region("x < 3"), parabola_box(), 4000, 3, 5);
  for (std::size_t r = 0; r < 3; ++r)
    EXPECT_LE(small.per_replication_values[r], large.per_replication_values[r]);
  EXPECT_LE(small.n_in_region, large.n_in_region);
}

TEST(Direct, ConstantAndZeroIntegrands) {
  const auto zero = integrate_direct(integrand("0*x*y"), region(kRegionD), parabola_box(),
                                     1000, 3, 1);
  EXPECT_EQ(zero.value, 0.0);
  const auto constant = integrate_direct(integrand("2.5 + 0*x*y"), region("1"),
                                         parabola_box(), 1000, 3, 1);
  EXPECT_DOUBLE_EQ(constant.value, 2.5 * 8);
  EXPECT_EQ(constant.n_uniform, 3000u);
  EXPECT_EQ(constant.n_screened, 0u);
}

TEST(Direct, ParabolaRegionAndSignedIntegrand) {
  const auto est = integrate_direct(integrand("x*y"), region(kRegionD), parabola_box(),
                                    100'000, 10, 7);
  EXPECT_NEAR(est.value, kParabolaValue, 5 * est.std_error);
  // integral of x - 2 over [0,4] x [0,2] is 0
  const auto signed_est = integrate_direct(integrand("x - 2 + 0*y"), region("1"),
                                           parabola_box(), 50'000, 10, 8);
  EXPECT_NEAR(signed_est.value, 0.0, 5 * signed_est.std_error);
}

}  // namespace
}  // namespace rmc
