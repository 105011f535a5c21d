#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

/// Small fixed vector for flux and velocity values; only the first dim()
/// components are meaningful.
using Vec2 = std::array<double, 2>;

/// Scalar profile g with A(xi) = direction * g(xi).
enum class FluxProfile { quadratic, cubic, linear };

/// x-independent flux A(xi) = direction * g(xi) on T^dim with its exact
/// derivative a(xi) = direction * g'(xi).
///
/// Every builtin is separable in this way, so each axis component is itself
/// a scalar flux with analytically known critical points.
class FluxModel {
 public:
  FluxModel(std::string label, FluxProfile profile, std::vector<double> direction, Interval range_hint)
      : label_(std::move(label)), profile_(profile), dim_(int(direction.size())), range_(range_hint) {
    if (dim_ != 1 && dim_ != 2) throw InputError("flux direction must have 1 or 2 components");
    for (int k = 0; k < dim_; ++k) direction_[k] = direction[k];
  }

  const std::string& label() const { return label_; }
  FluxProfile profile() const { return profile_; }
  int dim() const { return dim_; }
  const Interval& range_hint() const { return range_; }
  double direction(int axis) const { return direction_[axis]; }

  double g(double xi) const {
    switch (profile_) {
      case FluxProfile::quadratic:
        return 0.5 * xi * xi;
      case FluxProfile::cubic:
        return xi * xi * xi / 3.0;
      case FluxProfile::linear:
        return xi;
    }
    return 0.0;
  }
  double dg(double xi) const {
    switch (profile_) {
      case FluxProfile::quadratic:
        return xi;
      case FluxProfile::cubic:
        return xi * xi;
      case FluxProfile::linear:
        return 1.0;
    }
    return 0.0;
  }
  double d2g(double xi) const {
    switch (profile_) {
      case FluxProfile::quadratic:
        return 1.0;
      case FluxProfile::cubic:
        return 2.0 * xi;
      case FluxProfile::linear:
        return 0.0;
    }
    return 0.0;
  }

  double axis_flux(int axis, double xi) const { return direction_[axis] * g(xi); }
  double axis_velocity(int axis, double xi) const { return direction_[axis] * dg(xi); }

  Vec2 flux(double xi) const { return {axis_flux(0, xi), dim_ > 1 ? axis_flux(1, xi) : 0.0}; }
  Vec2 velocity(double xi) const { return {axis_velocity(0, xi), dim_ > 1 ? axis_velocity(1, xi) : 0.0}; }

  /// Interior critical points of g (where g' changes sign), used for the
  /// Godunov extremum and the Engquist-Osher splitting.
  std::vector<double> critical_points() const {
    if (profile_ == FluxProfile::quadratic) return {0.0};
    return {};
  }

  /// Points where g' vanishes or changes sign; splitting [a, b] there leaves
  /// segments on which g is monotone.
  std::vector<double> monotonicity_breaks() const {
    if (profile_ == FluxProfile::linear) return {};
    return {0.0};
  }

  /// sup |a'| on range_hint, Euclidean norm over axes.
  double lipschitz_bound() const {
    double dir = 0.0;
    for (int k = 0; k < dim_; ++k) dir += direction_[k] * direction_[k];
    dir = std::sqrt(dir);
    const double s = std::max(std::abs(d2g(range_.lo)), std::abs(d2g(range_.hi)));
    return dir * s;
  }

  /// max over axes and over xi in [lo, hi] of |a_axis(xi)|. |g'| is
  /// quasi-convex for every profile, so the endpoints suffice.
  double max_speed(double lo, double hi) const {
    double m = 0.0;
    for (int k = 0; k < dim_; ++k) m = std::max({m, std::abs(axis_velocity(k, lo)), std::abs(axis_velocity(k, hi))});
    return m;
  }

  void require_in_range(double xi) const {
    if (!(range_.lo <= xi && xi <= range_.hi))
      throw RangeError("state " + std::to_string(xi) + " outside range_hint of flux '" + label_ + "'");
  }

 private:
  std::string label_;
  FluxProfile profile_;
  int dim_;
  Vec2 direction_{0.0, 0.0};
  Interval range_;
};

/// Optional parameters for the parametrised builtins.
struct FluxParams {
  double alpha = 0.0;             // iso_burgers2d slope
  std::vector<double> c{1.0};     // linear velocity, 1 or 2 components
  Interval range{-2.0, 2.0};      // validity range of states
};

/// Builtins: burgers1d (xi^2/2), iso_burgers2d (xi^2/2 (1, alpha)),
/// linear (c xi), cubic1d (xi^3/3).
inline FluxModel builtin_flux(const std::string& name, const FluxParams& p = {}) {
  if (name == "burgers1d") return FluxModel("burgers1d", FluxProfile::quadratic, {1.0}, p.range);
  if (name == "iso_burgers2d")
    return FluxModel("iso_burgers2d(" + std::to_string(p.alpha) + ")", FluxProfile::quadratic, {1.0, p.alpha}, p.range);
  if (name == "linear") {
    if (p.c.empty() || p.c.size() > 2) throw InputError("linear flux needs 1 or 2 velocity components");
    return FluxModel("linear", FluxProfile::linear, p.c, p.range);
  }
  if (name == "cubic1d") return FluxModel("cubic1d", FluxProfile::cubic, {1.0}, p.range);
  throw InputError("unknown flux '" + name + "'");
}

}  // namespace conslaw
