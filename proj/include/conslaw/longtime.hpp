#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/fv_solver.hpp"
#include "conslaw/torus_field.hpp"
#include "conslaw/transport.hpp"

namespace conslaw {

// ---------------------------------------------------------------------------
// Localized non-degeneracy estimate
// ---------------------------------------------------------------------------

/// |E|, the mean v_bar and the sup bound R, with E = [v_bar, v_bar + |E|]
/// strictly inside (0, R).
struct NdlocParams {
  double E_len = 0.0;
  double v_bar = 0.0;
  double R = 0.0;

  void validate() const {
    if (!(E_len > 0.0)) throw InputError("ndloc: |E| must be positive");
    if (!(v_bar > 0.0 && v_bar < R)) throw InputError("ndloc: mean must lie in (0, R)");
    if (!(v_bar + E_len < R)) throw InputError("ndloc: E = [v_bar, zeta] needs zeta < R");
  }
};

struct NdlocConstants {
  double delta0 = 0.0;
  double kappa = 0.0;  // root in [0, |E|] of kappa^2 = (|E| - kappa) v_bar
  double c = 0.0;      // |E| - kappa
};

inline NdlocConstants ndloc_delta0(const NdlocParams& p) {
  p.validate();
  const double e = p.E_len;
  const double v = p.v_bar;
  // Positive root of kappa^2 + v kappa - |E| v = 0, rationalised to avoid
  // cancellation when v is small.
  const double kappa = 2.0 * e * v / (v + std::sqrt(v * v + 4.0 * e * v));
  const double c = e - kappa;
  return {std::min(e / 4.0, c), kappa, c};
}

/// Shift making a field non-negative: v = u - min(u).
struct NonnegativeShift {
  ScalarField field;
  double shift = 0.0;  // subtracted value
};

inline NonnegativeShift normalize_nonnegative(const ScalarField& u) {
  const double s = u.min();
  std::vector<double> v(u.size());
  for (std::size_t c = 0; c < u.size(); ++c) v[c] = u[c] - s;
  return {ScalarField(u.grid(), std::move(v)), s};
}

struct NdlocResult {
  double lhs = 0.0;  // ||v - v_bar||_L1
  double rhs = 0.0;  // delta + 8 (1 + R / delta) ||v_E - mean(v_E)||_L1
  bool holds = false;
  double v_bar = 0.0;
  double vE_bar = 0.0;
  double snap_distance = 0.0;  // |E.lo - mean(v)|
  NdlocConstants constants;
  bool notallE_holds = false;  // mean(v_E) <= |E| - c
};

/// v_E(x) = |[v_bar, zeta] cap (0, v(x))| = (min(zeta, v(x)) - v_bar)^+.
inline ScalarField ndloc_density(const ScalarField& v, double v_bar, double zeta) {
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[c] = std::max(std::min(zeta, v[c]) - v_bar, 0.0);
  return ScalarField(v.grid(), std::move(out));
}

/// Both sides of the localized estimate for one field and one delta. E.lo
/// is replaced by mean(v); delta must lie in (0, delta0).
inline NdlocResult ndloc_check(const ScalarField& v, const Interval& E, double delta, double R) {
  if (v.min() < 0.0 || v.max() > R) throw RangeError("ndloc: field must satisfy 0 <= v <= R");
  const double vbar = mean(v);
  if (!(vbar > 0.0 && vbar < R)) throw InputError("ndloc: mean outside (0, R)");
  const double zeta = E.hi;
  if (!(zeta > vbar && zeta < R)) throw InputError("ndloc: zeta must lie in (mean(v), R)");
  NdlocResult r;
  r.v_bar = vbar;
  r.snap_distance = std::abs(E.lo - vbar);
  r.constants = ndloc_delta0({zeta - vbar, vbar, R});
  if (!(delta > 0.0 && delta < r.constants.delta0))
    throw InputError("ndloc: delta must lie in (0, delta0 = " + std::to_string(r.constants.delta0) + ")");
  const ScalarField vE = ndloc_density(v, vbar, zeta);
  r.vE_bar = mean(vE);
  r.lhs = lp_distance(v, vbar, 1.0);
  r.rhs = delta + 8.0 * (1.0 + R / delta) * lp_distance(vE, r.vE_bar, 1.0);
  r.holds = r.lhs <= r.rhs;
  r.notallE_holds = r.vE_bar <= (zeta - vbar) - r.constants.c;
  return r;
}

// ---------------------------------------------------------------------------
// Decay diagnostics
// ---------------------------------------------------------------------------

struct DecadeRatio {
  double t = 0.0;
  double ratio = 0.0;  // l1_to_mean(t) / l1_to_mean(t / 2)
};

struct DecayReport {
  double initial = 0.0;
  double final_value = 0.0;
  double monotone_violation = 0.0;  // largest increase between snapshots
  double limit_estimate = 0.0;      // mean of the last 10% of samples
  std::vector<DecadeRatio> decade_ratios;
};

/// Linear interpolation of samples (times increasing) at t.
inline double interpolate_series(const std::vector<double>& times, const std::vector<double>& values, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  if (it == times.end()) return values.back();
  const std::size_t k = std::size_t(it - times.begin());
  if (*it == t) return values[k];
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return (1.0 - w) * values[k - 1] + w * values[k];
}

inline DecayReport decay_report(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.empty() || times.size() != values.size()) throw InputError("decay_report needs a nonempty series");
  DecayReport r;
  r.initial = values.front();
  r.final_value = values.back();
  for (std::size_t k = 1; k < values.size(); ++k) r.monotone_violation = std::max(r.monotone_violation, values[k] - values[k - 1]);
  const std::size_t tail = std::max<std::size_t>(1, values.size() / 10);
  r.limit_estimate =
      pairwise_sum(tail, [&](std::size_t k) { return values[values.size() - tail + k]; }) / double(tail);
  // Dyadic ladder down from the last time while t/2 stays at or after the
  // first positive sample.
  const auto first_pos = std::find_if(times.begin(), times.end(), [](double t) { return t > 0.0; });
  if (first_pos != times.end()) {
    for (double t = times.back(); t / 2.0 >= *first_pos; t /= 2.0) {
      const double den = interpolate_series(times, values, t / 2.0);
      if (den <= 0.0) break;
      r.decade_ratios.push_back({t, interpolate_series(times, values, t) / den});
    }
  }
  return r;
}

inline DecayReport decay_report(const TimeSeries& ts) {
  std::vector<double> l1(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) l1[k] = ts.scalars[k].l1_to_mean;
  return decay_report(ts.times, l1);
}

// ---------------------------------------------------------------------------
// Degenerate stationary solutions U(y - alpha x)
// ---------------------------------------------------------------------------

/// p/q: the last continued-fraction convergent of x with q <= q_max.
struct Rational {
  long p = 0;
  long q = 1;
  double value() const { return double(p) / double(q); }
};

inline Rational best_rational(double x, long q_max) {
  if (q_max < 1) throw InputError("q_max must be >= 1");
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  Rational best{long(std::lround(x)), 1};
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    const long ai = long(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > q_max) break;
    best = {p2, q2};
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return best;
}

struct CounterexampleLevel {
  int N = 0;
  double dt = 0.0;
  double residual = 0.0;  // ||u_new - u||_L1 / dt after one step
};

struct CounterexampleReport {
  double alpha_requested = 0.0;
  Rational alpha_used;
  double spectral_residual = 0.0;  // max |u u_x + alpha u u_y| on the base grid
  std::vector<CounterexampleLevel> levels;
  std::vector<double> ratios;  // residual(N) / residual(2N)
};

/// Periodic representative of U(y - alpha x) on T^2: with alpha = p/q and a
/// 1-periodic profile V, u(x, y) = V(q y - p x).
inline ScalarField counterexample_field(const TorusGrid& grid, Rational alpha, const std::function<double(double)>& profile) {
  return sample_midpoint(grid, [&](double x, double y) { return profile(double(alpha.q) * y - double(alpha.p) * x); });
}

/// max |u u_x + alpha u u_y| with derivatives taken spectrally.
inline double spectral_stationarity_residual(const ScalarField& u, double alpha) {
  const auto& g = u.grid();
  if (g.dim() != 2) throw InputError("spectral residual needs a 2-D field");
  const int n = g.cells_per_axis();
  const std::size_t cells = g.cell_count();
  const std::size_t modes = std::size_t(n) * (n / 2 + 1);
  auto in = detail::fftw_buffer<double>(cells);
  auto spec = detail::fftw_buffer<fftw_complex>(modes);
  auto dspec = detail::fftw_buffer<fftw_complex>(modes);
  auto out = detail::fftw_buffer<double>(cells);
  detail::Plan fwd(fftw_plan_dft_r2c_2d(n, n, in.get(), spec.get(), FFTW_ESTIMATE));
  detail::Plan bwd(fftw_plan_dft_c2r_2d(n, n, dspec.get(), out.get(), FFTW_ESTIMATE));
  std::copy(u.values().begin(), u.values().end(), in.get());
  fftw_execute(fwd.get());
  // Directional derivative (d/dx + alpha d/dy) u; the Nyquist lines carry
  // no derivative information for a real field and are dropped.
  const int half = n / 2 + 1;
  for (std::size_t m = 0; m < modes; ++m) {
    const int ix = int(m / half);
    const int ky = int(m % half);
    const int kx = ix <= n / 2 ? ix : ix - n;
    const bool nyq = n % 2 == 0 && (std::abs(kx) == n / 2 || ky == n / 2);
    const double factor = nyq ? 0.0 : 2.0 * std::numbers::pi * (kx + alpha * ky) / double(cells);
    // multiply by i * factor
    dspec[m][0] = -factor * spec[m][1];
    dspec[m][1] = factor * spec[m][0];
  }
  fftw_execute(bwd.get());
  double worst = 0.0;
  for (std::size_t c = 0; c < cells; ++c) worst = std::max(worst, std::abs(u[c] * out[c]));
  return worst;
}

/// One-step residual of the scheme on a refinement ladder n, 2n, 4n, ...
/// for the stationary family u = U(y - alpha x), alpha replaced by its best
/// rational approximation with denominator <= q_max so that u is periodic.
inline CounterexampleReport counterexample_residual(double alpha, const std::function<double(double)>& profile, int n,
                                                    int levels = 3, long q_max = 5, double cfl = 0.45) {
  if (levels < 1) throw InputError("counterexample needs at least one level");
  CounterexampleReport r;
  r.alpha_requested = alpha;
  r.alpha_used = best_rational(alpha, q_max);
  const double a = r.alpha_used.value();
  r.spectral_residual = spectral_stationarity_residual(counterexample_field(TorusGrid(2, n), r.alpha_used, profile), a);
  for (int l = 0; l < levels; ++l) {
    const TorusGrid grid(2, n << l);
    const ScalarField u = counterexample_field(grid, r.alpha_used, profile);
    FluxParams fp;
    fp.alpha = a;
    fp.range = Interval(std::min(-2.0, u.min()), std::max(2.0, u.max()));
    const FluxModel flux = builtin_flux("iso_burgers2d", fp);
    SchemeConfig cfg;
    cfg.cfl = cfl;
    cfg.t_end = 1.0;
    const StepRecord rec = step(u, flux, cfg, cfg.t_end);
    r.levels.push_back({grid.cells_per_axis(), rec.dt, lp_distance(rec.after, u, 1.0) / rec.dt});
  }
  for (std::size_t l = 1; l < r.levels.size(); ++l) {
    const double den = r.levels[l].residual;
    r.ratios.push_back(den > 0.0 ? r.levels[l - 1].residual / den : std::numeric_limits<double>::infinity());
  }
  return r;
}

}  // namespace conslaw
