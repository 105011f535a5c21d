#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/kinetic.hpp"
#include "conslaw/numerical_flux.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

struct SchemeConfig {
  double cfl = 0.45;
  double t_end = 1.0;
  int output_every = 1;
  NumericalFlux numerical_flux = NumericalFlux::godunov;

  /// cfl must lie in (0, 1]; the closed end admits the unit-Courant
  /// translation case of the linear flux.
  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw InputError("cfl must lie in (0, 1]");
    if (!(t_end > 0.0)) throw InputError("t_end must be positive");
    if (output_every < 1) throw InputError("output_every must be >= 1");
  }
};

/// Explicit time step for the current state: cfl h / (dim max|a|) over the
/// state range, or `remaining` when the state does not move.
inline double stable_dt(const ScalarField& u, const FluxModel& flux, double cfl, double remaining) {
  const double speed = flux.max_speed(u.min(), u.max());
  if (speed == 0.0) return remaining;
  const double dt = cfl * u.grid().cell_size() / (u.grid().dim() * speed);
  return std::min(dt, remaining);
}

/// Conservative update u_i - dt/h sum_axis (F_{i+1/2} - F_{i-1/2}) with a
/// prescribed dt. Every face flux is recorded.
inline StepRecord step_with_dt(const ScalarField& u, const FluxModel& flux, NumericalFlux kind, double dt,
                               std::uint64_t index = 0, double t = 0.0) {
  const auto& g = u.grid();
  if (g.dim() != flux.dim()) throw InputError("grid and flux dimensions differ");
  flux.require_in_range(u.min());
  flux.require_in_range(u.max());
  if (!(dt > 0.0)) throw RunError("time step underflow at step " + std::to_string(index));
  const std::size_t cells = g.cell_count();
  StepRecord rec{index, t, dt, u, u, std::vector<std::vector<double>>(g.dim(), std::vector<double>(cells))};
  const double ratio = dt / g.cell_size();
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto& F = rec.face_flux[axis];
    for (std::size_t c = 0; c < cells; ++c)
      F[c] = detail::face_flux_unchecked(u[c], u[g.neighbor(c, axis, 1)], axis, flux, kind);
  }
  for (std::size_t c = 0; c < cells; ++c) {
    double div = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
      const auto& F = rec.face_flux[axis];
      div += F[c] - F[g.neighbor(c, axis, -1)];
    }
    const double next = u[c] - ratio * div;
    if (!std::isfinite(next)) throw RunError("non-finite state at step " + std::to_string(index));
    rec.after[c] = next;
  }
  return rec;
}

/// One CFL-limited step, never past `remaining`.
inline StepRecord step(const ScalarField& u, const FluxModel& flux, const SchemeConfig& cfg, double remaining,
                       std::uint64_t index = 0, double t = 0.0) {
  cfg.validate();
  if (!(remaining > 0.0)) throw InputError("no time remaining for a step");
  return step_with_dt(u, flux, cfg.numerical_flux, stable_dt(u, flux, cfg.cfl, remaining), index, t);
}

struct SeriesScalars {
  double l1_to_mean = 0.0;
  double linf = 0.0;
  double tv = 0.0;
  double mass = 0.0;
};

inline SeriesScalars measure(const ScalarField& u, double mean_value) {
  return {lp_distance(u, mean_value, 1.0), linf_norm(u), bv_seminorm(u), mean(u)};
}

/// Snapshots and scalar diagnostics of a run, including t = 0 and t_end.
struct TimeSeries {
  std::vector<double> times;
  std::vector<ScalarField> snapshots;
  std::vector<SeriesScalars> scalars;

  std::size_t size() const { return times.size(); }
};

inline void write_series_csv(std::ostream& os, const TimeSeries& ts) {
  os << "t,l1_to_mean,linf,tv,mass\n" << std::setprecision(17);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto& s = ts.scalars[k];
    os << ts.times[k] << ',' << s.l1_to_mean << ',' << s.linf << ',' << s.tv << ',' << s.mass << '\n';
  }
}

struct EvolveResult {
  TimeSeries series;
  DefectMeasure defect;
  std::uint64_t steps = 0;
};

/// Kinetic grid used for the defect when none is given: the state range of
/// u0 (stationary under the maximum principle) split into 64 bins.
inline KineticGrid default_defect_grid(const ScalarField& u0, int bins = 64) {
  double lo = u0.min(), hi = u0.max();
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return KineticGrid(lo, hi, bins);
}

/// Runs the scheme from u0 to cfg.t_end, folding every step into the
/// entropy defect measure. The final step is truncated to land on t_end.
inline EvolveResult evolve(const ScalarField& u0, const FluxModel& flux, const SchemeConfig& cfg,
                           std::optional<KineticGrid> defect_grid = std::nullopt) {
  cfg.validate();
  if (u0.grid().dim() != flux.dim()) throw InputError("grid and flux dimensions differ");
  const KineticGrid kg = defect_grid.value_or(default_defect_grid(u0));
  DefectAccumulator acc(u0.grid(), kg, flux, cfg.numerical_flux);
  const double ubar = mean(u0);

  EvolveResult out{TimeSeries{}, DefectMeasure(kg, u0.grid().cell_size()), 0};
  auto record = [&](double t, const ScalarField& u) {
    out.series.times.push_back(t);
    out.series.snapshots.push_back(u);
    out.series.scalars.push_back(measure(u, ubar));
  };
  record(0.0, u0);

  ScalarField u = u0;
  double t = 0.0;
  std::uint64_t k = 0;
  while (t < cfg.t_end) {
    const double remaining = cfg.t_end - t;
    StepRecord rec = step(u, flux, cfg, remaining, k, t);
    acc.push(rec);
    const bool last = rec.dt >= remaining;
    t = last ? cfg.t_end : t + rec.dt;
    if (!last && t == rec.t) throw RunError("time step underflow at step " + std::to_string(k));
    u = std::move(rec.after);
    ++k;
    if (last || k % std::uint64_t(cfg.output_every) == 0) record(t, u);
  }
  out.defect = acc.take();
  out.steps = k;
  return out;
}

}  // namespace conslaw
