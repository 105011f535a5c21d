#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/numerical_flux.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

/// Equilibrium function: -1 on (alpha, 0), 1 on (0, alpha), 0 elsewhere
/// (including the endpoints xi = 0 and xi = alpha).
inline int chi(double alpha, double xi) {
  if (0.0 < xi && xi < alpha) return 1;
  if (alpha < xi && xi < 0.0) return -1;
  return 0;
}

/// Uniform partition of [xi_min, xi_max] into bins.
class KineticGrid {
 public:
  KineticGrid(double xi_min, double xi_max, int bins) : lo_(xi_min), hi_(xi_max), bins_(bins) {
    if (!(xi_min < xi_max)) throw InputError("kinetic grid needs xi_min < xi_max");
    if (bins < 2) throw InputError("kinetic grid needs at least 2 bins");
  }

  double xi_min() const { return lo_; }
  double xi_max() const { return hi_; }
  int bins() const { return bins_; }
  double dxi() const { return (hi_ - lo_) / bins_; }
  double edge(int b) const { return b == bins_ ? hi_ : lo_ + b * dxi(); }
  double center(int b) const { return lo_ + (b + 0.5) * dxi(); }
  bool covers(double lo, double hi) const { return lo_ <= lo && hi <= hi_; }

  bool operator==(const KineticGrid&) const = default;

 private:
  double lo_;
  double hi_;
  int bins_;
};

/// Values f(cell, bin) in [-1, 1], stored bin-major so that each xi-bin is a
/// contiguous x-slice.
class KineticField {
 public:
  KineticField(TorusGrid grid, KineticGrid kgrid)
      : grid_(grid), kgrid_(kgrid), values_(grid.cell_count() * std::size_t(kgrid.bins()), 0.0) {}

  KineticField(TorusGrid grid, KineticGrid kgrid, std::vector<double> values)
      : grid_(grid), kgrid_(kgrid), values_(std::move(values)) {
    if (values_.size() != grid.cell_count() * std::size_t(kgrid.bins()))
      throw InputError("kinetic field length does not match grids");
  }

  const TorusGrid& grid() const { return grid_; }
  const KineticGrid& kgrid() const { return kgrid_; }
  std::size_t cells() const { return grid_.cell_count(); }
  int bins() const { return kgrid_.bins(); }

  double operator()(std::size_t cell, int bin) const { return values_[std::size_t(bin) * cells() + cell]; }
  double& operator()(std::size_t cell, int bin) { return values_[std::size_t(bin) * cells() + cell]; }

  std::span<const double> slice(int bin) const { return {values_.data() + std::size_t(bin) * cells(), cells()}; }
  std::span<double> slice(int bin) { return {values_.data() + std::size_t(bin) * cells(), cells()}; }
  std::span<const double> values() const { return values_; }

  bool operator==(const KineticField&) const = default;

 private:
  TorusGrid grid_;
  KineticGrid kgrid_;
  std::vector<double> values_;
};

/// Bin average of chi_alpha over [lo, hi].
inline double chi_bin_average(double alpha, double lo, double hi) {
  const double width = hi - lo;
  if (alpha > 0.0) return std::max(0.0, std::min(hi, alpha) - std::max(lo, 0.0)) / width;
  if (alpha < 0.0) return -std::max(0.0, std::min(hi, 0.0) - std::max(lo, alpha)) / width;
  return 0.0;
}

/// chi_u per cell as exact bin averages. The grid must cover the range of
/// u; the bin-weighted integral recovers u(cell) when it also covers 0.
inline KineticField equilibrium_field(const ScalarField& u, const KineticGrid& kgrid) {
  if (!kgrid.covers(u.min(), u.max())) throw RangeError("kinetic grid does not cover the range of u");
  KineticField f(u.grid(), kgrid);
  for (int b = 0; b < kgrid.bins(); ++b) {
    const double lo = kgrid.edge(b);
    const double hi = kgrid.edge(b + 1);
    auto slice = f.slice(b);
    for (std::size_t c = 0; c < u.size(); ++c) slice[c] = chi_bin_average(u[c], lo, hi);
  }
  return f;
}

/// Bin-weighted integral over all xi of f(cell, .), per cell.
inline ScalarField xi_integral(const KineticField& f) {
  std::vector<double> out(f.cells());
  const double w = f.kgrid().dxi();
  for (std::size_t c = 0; c < f.cells(); ++c)
    out[c] = pairwise_sum(std::size_t(f.bins()), [&](std::size_t b) { return f(c, int(b)); }) * w;
  return ScalarField(f.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Entropy defect measure
// ---------------------------------------------------------------------------

/// Discrete non-negative measure m on (time step, xi bin), already summed
/// over cells. entry(step, bin) is the m-mass of the space-time slab of that
/// step and the bin (dt h^dim dxi weights included).
class DefectMeasure {
 public:
  DefectMeasure(KineticGrid kgrid, double cell_size) : kgrid_(kgrid), h_(cell_size) {}

  const KineticGrid& kgrid() const { return kgrid_; }
  double cell_size() const { return h_; }
  std::size_t steps() const { return dts_.size(); }
  int bins() const { return kgrid_.bins(); }

  double entry(std::size_t step, int bin) const { return entries_[step * std::size_t(bins()) + bin]; }
  double step_dt(std::size_t step) const { return dts_[step]; }
  /// Negative mass removed by clipping in a step (reported as a positive number).
  double step_clip(std::size_t step) const { return clip_[step]; }

  void append_step(double dt, std::span<const double> profile, double clip) {
    if (profile.size() != std::size_t(bins())) throw InputError("defect profile has wrong bin count");
    entries_.insert(entries_.end(), profile.begin(), profile.end());
    dts_.push_back(dt);
    clip_.push_back(clip);
  }

  /// Time marginal per bin (sum over steps on the fixed pairwise tree).
  std::vector<double> time_marginal() const {
    std::vector<double> out(bins());
    for (int b = 0; b < bins(); ++b)
      out[b] = pairwise_sum(steps(), [&](std::size_t s) { return entry(s, b); });
    return out;
  }

  /// pi_# m as a density in xi: time marginal per bin divided by dxi.
  std::vector<double> projection() const {
    auto out = time_marginal();
    for (double& v : out) v /= kgrid_.dxi();
    return out;
  }

  double total_mass() const {
    const auto tm = time_marginal();
    return pairwise_sum(tm);
  }

  double clip_mass() const { return pairwise_sum(clip_); }

  double duration() const { return pairwise_sum(dts_); }

  /// Coarsened copy where consecutive groups of `group` steps become one.
  /// For group = 2^k the time marginal of the copy is bitwise equal to the
  /// original's (see pairwise_sum).
  DefectMeasure merge_steps(std::size_t group) const {
    if (group == 0) throw InputError("merge group must be positive");
    DefectMeasure out(kgrid_, h_);
    std::vector<double> profile(bins());
    for (std::size_t s0 = 0; s0 < steps(); s0 += group) {
      const std::size_t len = std::min(group, steps() - s0);
      for (int b = 0; b < bins(); ++b)
        profile[b] = pairwise_sum(len, [&](std::size_t k) { return entry(s0 + k, b); });
      const double dt = pairwise_sum(len, [&](std::size_t k) { return dts_[s0 + k]; });
      const double clip = pairwise_sum(len, [&](std::size_t k) { return clip_[s0 + k]; });
      out.append_step(dt, profile, clip);
    }
    return out;
  }

 private:
  KineticGrid kgrid_;
  double h_;
  std::vector<double> entries_;
  std::vector<double> dts_;
  std::vector<double> clip_;
};

/// Sequential fold of solver steps into a DefectMeasure.
///
/// Per step, cell and bin centre xi:
///   m = -[(u_new - xi)^+ - (u_old - xi)^+ + dt/h sum_axis (Q_{+1/2} - Q_{-1/2})] h^dim dxi
/// with the numerical semi-Kruzhkov flux Q(ul, ur; xi) = F(max(ul, xi), max(ur, xi)) - A(xi)
/// built from the scheme's own face flux F.
class DefectAccumulator {
 public:
  DefectAccumulator(const TorusGrid& grid, const KineticGrid& kgrid, const FluxModel& flux, NumericalFlux kind)
      : grid_(grid), flux_(flux), kind_(kind), measure_(kgrid, grid.cell_size()) {}

  void push(const StepRecord& rec) {
    if (rec.index != next_index_)
      throw RunError("defect stream gap: expected step " + std::to_string(next_index_) + ", got " +
                     std::to_string(rec.index));
    ++next_index_;
    const auto& kg = measure_.kgrid();
    const int bins = kg.bins();
    const std::size_t cells = grid_.cell_count();
    const double ratio = rec.dt / grid_.cell_size();
    const double weight = grid_.cell_volume() * kg.dxi();
    std::vector<double> profile(bins);
    std::vector<double> density(cells);
    std::vector<double> q(cells);
    double clip = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double xi = kg.center(b);
      for (std::size_t c = 0; c < cells; ++c)
        density[c] = -(std::max(rec.after[c] - xi, 0.0) - std::max(rec.before[c] - xi, 0.0));
      for (int axis = 0; axis < grid_.dim(); ++axis) {
        const double a_xi = flux_.axis_flux(axis, xi);
        const auto& F = rec.face_flux[axis];
        for (std::size_t c = 0; c < cells; ++c) {
          const double ul = rec.before[c];
          const double ur = rec.before[grid_.neighbor(c, axis, 1)];
          if (xi >= std::max(ul, ur)) {
            q[c] = 0.0;
          } else if (xi <= std::min(ul, ur)) {
            q[c] = F[c] - a_xi;
          } else {
            q[c] = detail::face_flux_unchecked(std::max(ul, xi), std::max(ur, xi), axis, flux_, kind_) - a_xi;
          }
        }
        for (std::size_t c = 0; c < cells; ++c) density[c] -= ratio * (q[c] - q[grid_.neighbor(c, axis, -1)]);
      }
      double neg = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        if (density[c] < 0.0) {
          neg -= density[c];
          density[c] = 0.0;
        }
      }
      clip += neg * weight;
      profile[b] = pairwise_sum(density) * weight;
    }
    measure_.append_step(rec.dt, profile, clip);
  }

  const DefectMeasure& measure() const { return measure_; }
  DefectMeasure take() { return std::move(measure_); }

 private:
  TorusGrid grid_;
  FluxModel flux_;
  NumericalFlux kind_;
  DefectMeasure measure_;
  std::uint64_t next_index_ = 0;
};

inline DefectMeasure accumulate_defect(std::span<const StepRecord> run, const KineticGrid& kgrid,
                                       const FluxModel& flux, NumericalFlux kind = NumericalFlux::godunov) {
  if (run.empty()) throw InputError("empty step stream");
  DefectAccumulator acc(run.front().before.grid(), kgrid, flux, kind);
  for (const auto& rec : run) acc.push(rec);
  return acc.take();
}

/// One bound of the defect check: holds iff slack >= -tolerance.
struct BoundCheck {
  bool holds = true;
  double slack = 0.0;
};

struct DefectCheckReport {
  std::vector<double> xi;          // bin centres
  std::vector<double> projection; // pi_# m density per bin
  double total_mass = 0.0;
  double clip_mass = 0.0;
  double tolerance = 0.0;
  BoundCheck pointwise;  // pi_# m(xi) <= ||u0||_L1
  BoundCheck integral;   // int pi_# m <= ||u0||_L2^2 / 2
  BoundCheck profile;    // pi_# m(xi) <= int (u0 - xi)^+
};

/// xi-marginal of m and the three bounds it must satisfy. The tolerance is
/// 1e-8 plus h * max|u0|.
inline DefectCheckReport project_and_check_defect(const DefectMeasure& m, const ScalarField& u0) {
  DefectCheckReport r;
  const auto& kg = m.kgrid();
  r.projection = m.projection();
  r.total_mass = m.total_mass();
  r.clip_mass = m.clip_mass();
  r.tolerance = 1e-8 + m.cell_size() * linf_norm(u0);
  const double l1 = lp_distance(u0, 0.0, 1.0);
  const double l2 = lp_distance(u0, 0.0, 2.0);
  r.xi.resize(kg.bins());
  double pw = std::numeric_limits<double>::infinity();
  double pf = std::numeric_limits<double>::infinity();
  for (int b = 0; b < kg.bins(); ++b) {
    const double xi = kg.center(b);
    r.xi[b] = xi;
    const double excess = exact_sum(u0.size(), [&](std::size_t c) { return std::max(u0[c] - xi, 0.0); }) *
                          u0.grid().cell_volume();
    pw = std::min(pw, l1 - r.projection[b]);
    pf = std::min(pf, excess - r.projection[b]);
  }
  r.pointwise = {pw >= -r.tolerance, pw};
  const double integral = pairwise_sum(r.projection) * kg.dxi();
  const double in = 0.5 * l2 * l2 - integral;
  r.integral = {in >= -r.tolerance, in};
  r.profile = {pf >= -r.tolerance, pf};
  return r;
}

}  // namespace conslaw
