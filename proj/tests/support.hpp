#pragma once

#include <cmath>
#include <numbers>

#include "conslaw/torus_field.hpp"

namespace conslaw::test_support {

/// Standing Burgers shock 1 | -1 at x = 1/2. The opposite transition at
/// x = 0 is a smooth increasing ramp of width 0.4, so it spreads without
/// a sharp rarefaction and its plateau edges reach x = 1/2 only at t = 0.3.
inline ScalarField standing_shock(int n) {
  return sample_midpoint(make_grid(1, n), [](double x) {
    const double w = 0.4;
    const double s = x < 0.5 ? x : x - 1.0;
    if (std::abs(s) >= w / 2) return s > 0 ? 1.0 : -1.0;
    return std::sin(std::numbers::pi * s / w);
  });
}

inline constexpr double kStandingShockTime = 0.25;

}  // namespace conslaw::test_support
