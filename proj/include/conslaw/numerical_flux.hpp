#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

enum class NumericalFlux { godunov, engquist_osher };

inline NumericalFlux parse_numerical_flux(const std::string& s) {
  if (s == "godunov") return NumericalFlux::godunov;
  if (s == "engquist_osher") return NumericalFlux::engquist_osher;
  throw InputError("unknown numerical_flux '" + s + "'");
}

inline const char* to_string(NumericalFlux f) {
  return f == NumericalFlux::godunov ? "godunov" : "engquist_osher";
}

namespace detail {

/// Godunov flux without range checks: min of A_axis on [ul, ur] when
/// ul <= ur, max on [ur, ul] otherwise. Extrema sit at the endpoints or at
/// the analytic critical points of the profile.
inline double godunov_flux(double ul, double ur, int axis, const FluxModel& flux) {
  const double fl = flux.axis_flux(axis, ul);
  const double fr = flux.axis_flux(axis, ur);
  if (ul <= ur) {
    double m = std::min(fl, fr);
    for (double c : flux.critical_points())
      if (ul < c && c < ur) m = std::min(m, flux.axis_flux(axis, c));
    return m;
  }
  double m = std::max(fl, fr);
  for (double c : flux.critical_points())
    if (ur < c && c < ul) m = std::max(m, flux.axis_flux(axis, c));
  return m;
}

/// Engquist-Osher: A(ul) + integral from ul to ur of min(a_axis, 0).
inline double engquist_osher_flux(double ul, double ur, int axis, const FluxModel& flux) {
  const double lo = std::min(ul, ur);
  const double hi = std::max(ul, ur);
  double pts[4];
  int np = 0;
  pts[np++] = lo;
  for (double c : flux.monotonicity_breaks())
    if (lo < c && c < hi) pts[np++] = c;
  pts[np++] = hi;
  // Integral of min(a, 0) over [lo, hi]; A is monotone on each segment.
  double neg = 0.0;
  for (int k = 0; k + 1 < np; ++k) {
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    if (flux.axis_velocity(axis, mid) < 0.0) neg += flux.axis_flux(axis, pts[k + 1]) - flux.axis_flux(axis, pts[k]);
  }
  return flux.axis_flux(axis, ul) + (ul <= ur ? neg : -neg);
}

inline double face_flux_unchecked(double ul, double ur, int axis, const FluxModel& flux, NumericalFlux kind) {
  return kind == NumericalFlux::godunov ? godunov_flux(ul, ur, axis, flux) : engquist_osher_flux(ul, ur, axis, flux);
}

}  // namespace detail

/// Monotone numerical flux for the scalar component A_axis at a face with
/// left state ul and right state ur.
inline double numerical_face_flux(double ul, double ur, int axis, const FluxModel& flux,
                                  NumericalFlux kind = NumericalFlux::godunov) {
  if (axis < 0 || axis >= flux.dim()) throw InputError("axis out of range for flux dimension");
  flux.require_in_range(ul);
  flux.require_in_range(ur);
  return detail::face_flux_unchecked(ul, ur, axis, flux, kind);
}

/// One explicit step: the states on both sides and every face flux.
/// face_flux[axis][c] is the flux through the face between cell c and its
/// +1 neighbour along axis.
struct StepRecord {
  std::uint64_t index = 0;
  double t = 0.0;
  double dt = 0.0;
  ScalarField before;
  ScalarField after;
  std::vector<std::vector<double>> face_flux;
};

}  // namespace conslaw
