// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rmc/random.hpp"
#include "rmc/stats.hpp"

namespace rmc {
namespace {

// Reference outputs computed with an independent Python port of the
// published splitmix64 (state += gamma; mix).
TEST(RandomStream, MatchesReferenceSequence) {
  auto s = make_stream(0);
  EXPECT_EQ(s.next_u64(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(s.next_u64(), 0x6E789E6AA1B965F4ull);
  EXPECT_EQ(s.next_u64(), 0x06C45D188009454Full);

  auto one = make_stream(1);
  EXPECT_EQ(one.next_u64(), 0x910A2DEC89025CC1ull);
  auto two = make_stream(2);
  EXPECT_EQ(two.next_u64(), 0x975835DE1C9756CEull);
}

TEST(RandomStream, SameSeedSameSequence) {
  auto a = make_stream(123456789);
  auto b = make_stream(123456789);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a, b);
}

TEST(RandomStream, UnitConversionEndpoints) {
  EXPECT_EQ(RandomStream::to_unit(0), 0.0);
  EXPECT_EQ(RandomStream::to_unit(~std::uint64_t{0}), 0.9999999999999999);
  EXPECT_EQ(RandomStream::to_unit(~std::uint64_t{0}),
            (std::ldexp(1.0, 53) - 1) / std::ldexp(1.0, 53));
  EXPECT_LT(RandomStream::to_unit(~std::uint64_t{0}), 1.0);
}

TEST(RandomStream, Uniform01ConsumesOneDraw) {
  auto a = make_stream(3);
  auto b = make_stream(3);
  const double u = a.uniform01();
  EXPECT_EQ(u, RandomStream::to_unit(b.next_u64()));
  EXPECT_EQ(a.state(), b.state());
}

TEST(RandomStream, MeanOfMillionDraws) {
  auto s = make_stream(2718);
  double sum = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = s.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 1e6, 0.5, 0.002);
}

TEST(RandomStream, ChiSquareUniformity) {
  auto s = make_stream(99);
  std::vector<double> observed(100, 0.0), expected(100, 1000.0);
  for (int i = 0; i < 100'000; ++i) observed[static_cast<std::size_t>(s.uniform01() * 100)] += 1;
  const auto r = chi_square_test(observed, expected);
  EXPECT_EQ(r.dof, 99u);
  EXPECT_TRUE(r.pass) << r.statistic << " vs " << r.threshold;
}

TEST(UniformBox, IdentityBoxReturnsDrawsInOrder) {
  const Box unit{{0, 1}, {0, 1}};
  auto a = make_stream(11);
  auto b = make_stream(11);
  const auto p = uniform_box(a, unit);
  EXPECT_EQ(p[0], b.uniform01());
  EXPECT_EQ(p[1], b.uniform01());
}

TEST(UniformBox, ConsumesExactlyDimsDraws) {
  for (std::size_t d = 1; d <= 5; ++d) {
    std::vector<Box::Interval> iv(d, {-1.0, 3.0});
    const Box box(iv);
    auto a = make_stream(d);
    auto b = make_stream(d);
    uniform_box(a, box);
    for (std::size_t i = 0; i < d; ++i) b.next_u64();
    EXPECT_EQ(a.state(), b.state()) << "d = " << d;
  }
}

TEST(UniformBox, StaysInHalfOpenBox) {
  const Box square{{-5, 5}, {-5, 5}};
  auto s = make_stream(8);
  std::vector<double> p(2);
  for (int i = 0; i < 100'000; ++i) {
    uniform_box(s, square, p);
    ASSERT_TRUE(square.contains(p));
  }
  const double eps = 1e-9;
  const Box thin{{2.0, 2.0 + eps}};
  for (int i = 0; i < 10'000; ++i) {
    const auto q = uniform_box(s, thin);
    ASSERT_GE(q[0], 2.0);
    ASSERT_LT(q[0], 2.0 + eps);
  }
}

TEST(UniformBox, TopDrawIsClampedBelowUpper) {
  // one ulp wide: lower + u*width rounds to upper for u near 1
  const double lo = 1.0, hi = std::nextafter(1.0, 2.0);
  EXPECT_EQ(affine_unit(0.9999999999999999, lo, hi - lo, hi), lo);
  EXPECT_LT(affine_unit(0.9999999999999999, -5, 10, 5), 5.0);
}

TEST(Substream, DeterministicAndDistinct) {
  EXPECT_EQ(substream(42, 7), substream(42, 7));
  auto a = substream(42, 0);
  auto b = substream(42, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
  // independent Python evaluation of mix(42 ^ gamma*(k+1))
  EXPECT_EQ(substream(42, 0).state(), 0xBDD732262FEB6E95ull);
  EXPECT_EQ(substream(42, 1).state(), 0xD9639A006C85ADB0ull);
  auto c = substream(42, 0);
  EXPECT_EQ(c.next_u64(), 0x57E1FABA65107204ull);
}

}  // namespace
}  // namespace rmc
