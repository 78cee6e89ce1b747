// SPDX-License-Identifier: Apache-2.0
//
// Reference targets shared by the test suites, with their analytic facts.
#pragma once

#include <cmath>
#include <numbers>

#include "rmc/rmc.hpp"

namespace rmc::testing {

inline constexpr double kPi = std::numbers::pi;

// f(x) = sin(x)/sqrt(2) on (pi/4, 3pi/4); integrates to 1.
inline constexpr const char* kSine = "sin(x)/sqrt(2)";
inline Box sine_box() { return Box{{kPi / 4, 3 * kPi / 4}}; }
inline double sine_cdf(double x) { return 0.5 - std::cos(x) / std::sqrt(2.0); }
inline const double kSineMax = 1.0 / std::sqrt(2.0);

inline ScalarField sine_field() { return ScalarField::parse(kSine, VarOrder{"x"}); }
inline TargetSpec sine_target(double c = 1.1) {
  return validate_target(sine_field(), sine_box(), c);
}

// Bivariate normal, unit variances, correlation 0.2:
// Sigma^-1 = [[1, -0.2], [-0.2, 1]] / 0.96.
inline constexpr const char* kGauss =
    "exp(-(x^2 + y^2 - 0.4*x*y) / 1.92) / (2*pi*sqrt(0.96))";
inline Box gauss_box() { return Box{{-5, 5}, {-5, 5}}; }
inline const double kGaussMax = 1.0 / (2 * kPi * std::sqrt(0.96));
inline constexpr double kGaussBound = 0.1657;

inline ScalarField gauss_field(double rho = 0.2) {
  const double det = 1 - rho * rho;
  const std::string text = "exp(-(x^2 + y^2 - " + format_number(2 * rho) +
                           "*x*y) / " + format_number(2 * det) + ") / (2*pi*sqrt(" +
                           format_number(det) + "))";
  return ScalarField::parse(text, VarOrder{"x", "y"});
}

// Parabola region: integral of xy over the region between x = y^2 and y = x - 2,
// y >= 0, inside S = [0,4] x [0,2]. Exact value 6.
inline constexpr const char* kRegionD = "y^2 <= x and y >= 0 and y >= x - 2";
// The same inequalities with the line inequality reversed; selects
// x >= y + 2 and integrates xy to 14/3 over S.
inline constexpr const char* kRegionOpposite = "y^2 <= x and y >= 0 and y <= x - 2";
inline Box parabola_box() { return Box{{0, 4}, {0, 2}}; }
inline constexpr double kParabolaValue = 6.0;

}  // namespace rmc::testing
