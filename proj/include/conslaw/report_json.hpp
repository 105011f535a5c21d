#pragma once

#include <iomanip>
#include <ostream>

#include "json.hpp"

#include "conslaw/degeneracy.hpp"
#include "conslaw/kinetic.hpp"
#include "conslaw/longtime.hpp"
#include "conslaw/transport.hpp"

namespace conslaw {

using nlohmann::json;

inline json mode_json(const Mode& n, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(n[k]);
  return a;
}

/// {T, E:[lo,hi], n_max, q, modes:[{n:[..], value}], sup_value}
inline json to_json(const DegeneracyReport& r) {
  json modes = json::array();
  for (const auto& mv : r.per_mode) modes.push_back({{"n", mode_json(mv.n, r.dim)}, {"value", mv.value}});
  return {{"T", r.T},
          {"E", {r.E.lo, r.E.hi}},
          {"n_max", r.n_max},
          {"q", r.quadrature_points},
          {"modes", modes},
          {"sup_value", r.sup_value}};
}

/// {total_mass, clip_mass, bounds:{pointwise, integral, profile}}
inline json to_json(const DefectCheckReport& r) {
  auto bound = [](const BoundCheck& b) { return json{{"holds", b.holds}, {"slack", b.slack}}; };
  return {{"total_mass", r.total_mass},
          {"clip_mass", r.clip_mass},
          {"tolerance", r.tolerance},
          {"bounds", {{"pointwise", bound(r.pointwise)}, {"integral", bound(r.integral)}, {"profile", bound(r.profile)}}}};
}

/// {T, E, lhs, rhs, slack, steps, n_max, q}
inline json to_json(const HomogenizationReport& r) {
  return {{"T", r.T},
          {"E", {r.E.lo, r.E.hi}},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"slack", r.slack},
          {"holds", r.holds},
          {"abar", r.abar},
          {"f0_norm_sq", r.f0_norm_sq},
          {"snap_distance", r.snap_distance},
          {"velocity_quadrature_error", r.velocity_quadrature_error},
          {"steps", r.steps},
          {"n_max", r.n_max},
          {"q", r.q}};
}

inline json to_json(const DecayReport& r) {
  json ratios = json::array();
  for (const auto& d : r.decade_ratios) ratios.push_back({{"t", d.t}, {"ratio", d.ratio}});
  return {{"initial", r.initial},
          {"final", r.final_value},
          {"monotone_violation", r.monotone_violation},
          {"limit_estimate", r.limit_estimate},
          {"decade_ratios", ratios}};
}

inline json to_json(const CounterexampleReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels) levels.push_back({{"N", l.N}, {"dt", l.dt}, {"residual", l.residual}});
  return {{"alpha_requested", r.alpha_requested},
          {"alpha_used", {{"p", r.alpha_used.p}, {"q", r.alpha_used.q}, {"value", r.alpha_used.value()}}},
          {"spectral_residual", r.spectral_residual},
          {"levels", levels},
          {"ratios", r.ratios}};
}

/// pi_# m as CSV rows "xi,value".
inline void write_projection_csv(std::ostream& os, const DefectCheckReport& r) {
  os << "xi,value\n" << std::setprecision(17);
  for (std::size_t b = 0; b < r.xi.size(); ++b) os << r.xi[b] << ',' << r.projection[b] << '\n';
}

}  // namespace conslaw
