#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "conslaw/degeneracy.hpp"
#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/kinetic.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

namespace detail {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    if (p) fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

/// exp(-2 pi i x) with x reduced modulo 1 before scaling.
inline std::complex<double> unit_phase(double x) {
  const double r = x - std::floor(x);
  const double th = -2.0 * std::numbers::pi * r;
  return {std::cos(th), std::sin(th)};
}

}  // namespace detail

/// Real-to-complex spectra of every x-slice of a kinetic field.
///
/// Translating a slice by s multiplies mode k by exp(-2 pi i k.s). Modes on
/// the Nyquist line of an even grid (|k_axis| = N/2) have no real travelling
/// representative and are left in place, so each translation is a unitary
/// map and translations compose exactly as a group.
class SpectralSlices {
 public:
  explicit SpectralSlices(const KineticField& f) : grid_(f.grid()), kgrid_(f.kgrid()) {
    const int n = grid_.cells_per_axis();
    modes_ = grid_.dim() == 1 ? std::size_t(n / 2 + 1) : std::size_t(n) * (n / 2 + 1);
    spectra_.resize(std::size_t(f.bins()) * modes_);
    auto in = detail::fftw_buffer<double>(f.cells());
    auto out = detail::fftw_buffer<fftw_complex>(modes_);
    detail::Plan plan(grid_.dim() == 1 ? fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE)
                                       : fftw_plan_dft_r2c_2d(n, n, in.get(), out.get(), FFTW_ESTIMATE));
    for (int b = 0; b < f.bins(); ++b) {
      const auto slice = f.slice(b);
      std::copy(slice.begin(), slice.end(), in.get());
      fftw_execute(plan.get());
      for (std::size_t m = 0; m < modes_; ++m) spectra_[std::size_t(b) * modes_ + m] = {out[m][0], out[m][1]};
    }
  }

  const TorusGrid& grid() const { return grid_; }
  const KineticGrid& kgrid() const { return kgrid_; }
  std::size_t modes() const { return modes_; }
  std::complex<double> coeff(int bin, std::size_t m) const { return spectra_[std::size_t(bin) * modes_ + m]; }

  /// Signed wave vector of half-spectrum index m.
  Mode wave_vector(std::size_t m) const {
    const int n = grid_.cells_per_axis();
    if (grid_.dim() == 1) return {int(m), 0};
    const int half = n / 2 + 1;
    const int ix = int(m / half);
    const int ky = int(m % half);
    return {ix <= n / 2 ? ix : ix - n, ky};
  }

  bool is_nyquist(std::size_t m) const {
    const int n = grid_.cells_per_axis();
    if (n % 2 != 0) return false;
    const Mode k = wave_vector(m);
    return std::abs(k[0]) == n / 2 || (grid_.dim() == 2 && k[1] == n / 2);
  }

  /// Multiplicity of index m in the full spectrum (conjugate pairs of the
  /// real transform are stored once).
  double multiplicity(std::size_t m) const {
    const int n = grid_.cells_per_axis();
    const Mode k = wave_vector(m);
    const int last = grid_.dim() == 1 ? k[0] : k[1];
    return (last == 0 || (n % 2 == 0 && last == n / 2)) ? 1.0 : 2.0;
  }

  /// Field with every slice b translated by t * a(xi_b).
  KineticField advected(double t, const FluxModel& flux) const {
    const int n = grid_.cells_per_axis();
    const std::size_t cells = grid_.cell_count();
    std::vector<double> values(cells * kgrid_.bins());
    auto in = detail::fftw_buffer<fftw_complex>(modes_);
    auto out = detail::fftw_buffer<double>(cells);
    detail::Plan plan(grid_.dim() == 1 ? fftw_plan_dft_c2r_1d(n, in.get(), out.get(), FFTW_ESTIMATE)
                                       : fftw_plan_dft_c2r_2d(n, n, in.get(), out.get(), FFTW_ESTIMATE));
    const double scale = 1.0 / double(cells);
    for (int b = 0; b < kgrid_.bins(); ++b) {
      const Vec2 a = flux.velocity(kgrid_.center(b));
      const Vec2 s{t * a[0], t * a[1]};
      const Vec2 sr{s[0] - std::floor(s[0]), s[1] - std::floor(s[1])};
      for (std::size_t m = 0; m < modes_; ++m) {
        std::complex<double> c = coeff(b, m);
        if (!is_nyquist(m)) {
          const Mode k = wave_vector(m);
          c *= detail::unit_phase(k[0] * sr[0] + k[1] * sr[1]);
        }
        in[m][0] = c.real();
        in[m][1] = c.imag();
      }
      fftw_execute(plan.get());
      for (std::size_t c = 0; c < cells; ++c) values[std::size_t(b) * cells + c] = out[c] * scale;
    }
    return KineticField(grid_, kgrid_, std::move(values));
  }

 private:
  TorusGrid grid_;
  KineticGrid kgrid_;
  std::size_t modes_ = 0;
  std::vector<std::complex<double>> spectra_;
};

/// Solution of the free transport equation at time t with its initial datum.
struct TransportState {
  KineticField f;
  double t = 0.0;
  KineticField f0_ref;
};

/// f(t, x, xi) = f0(x - t a(xi), xi) by spectral translation of each slice
/// with its bin-centre velocity.
inline TransportState advect_exact(const KineticField& f0, double t, const FluxModel& flux) {
  if (!(t >= 0.0)) throw InputError("advect_exact needs t >= 0");
  if (f0.grid().dim() != flux.dim()) throw InputError("grid and flux dimensions differ");
  if (t == 0.0) return {f0, 0.0, f0};
  return {SpectralSlices(f0).advected(t, flux), t, f0};
}

/// Bin range [first, last) of E after snapping both endpoints to the
/// nearest bin edges.
struct SnappedInterval {
  int first_bin = 0;
  int last_bin = 0;
  Interval snapped{0.0, 1.0};
  double snap_distance = 0.0;
};

inline SnappedInterval snap_to_bins(const Interval& E, const KineticGrid& kg) {
  const double tol = 1e-12 * (std::abs(kg.xi_min()) + std::abs(kg.xi_max()) + 1.0);
  if (E.lo < kg.xi_min() - tol || E.hi > kg.xi_max() + tol) throw RangeError("interval E outside the kinetic grid");
  const int b0 = int(std::lround((E.lo - kg.xi_min()) / kg.dxi()));
  const int b1 = int(std::lround((E.hi - kg.xi_min()) / kg.dxi()));
  if (b1 <= b0) throw InputError("interval E is narrower than one kinetic bin");
  SnappedInterval s{b0, b1, Interval(kg.edge(b0), kg.edge(b1)), 0.0};
  s.snap_distance = std::max(std::abs(E.lo - s.snapped.lo), std::abs(E.hi - s.snapped.hi));
  return s;
}

struct DensityMass {
  ScalarField density;  // u_E(x) = int_E f(x, xi) dxi
  double mass = 0.0;    // mean of u_E
  SnappedInterval E;
};

inline DensityMass density_mass(const KineticField& f, const Interval& E) {
  const auto snap = snap_to_bins(E, f.kgrid());
  const double w = f.kgrid().dxi();
  std::vector<double> u(f.cells());
  const std::size_t nb = std::size_t(snap.last_bin - snap.first_bin);
  for (std::size_t c = 0; c < f.cells(); ++c)
    u[c] = pairwise_sum(nb, [&](std::size_t k) { return f(c, snap.first_bin + int(k)); }) * w;
  ScalarField density(f.grid(), std::move(u));
  const double m = mean(density);
  return {std::move(density), m, snap};
}

/// ||u_E(t) - mean||^2_L2 of the transported density, by Parseval on the
/// slice spectra (equal to advecting, integrating over E, and taking the
/// discrete L2 norm).
class DensityFluctuation {
 public:
  DensityFluctuation(const SpectralSlices& s, const SnappedInterval& E, const FluxModel& flux)
      : slices_(s), E_(E) {
    for (int b = E.first_bin; b < E.last_bin; ++b) velocities_.push_back(flux.velocity(s.kgrid().center(b)));
  }

  double operator()(double t) const {
    const auto& g = slices_.grid();
    const int n = g.cells_per_axis();
    const double w = slices_.kgrid().dxi();
    const std::size_t modes = slices_.modes();
    std::vector<std::complex<double>> acc(modes, {0.0, 0.0});
    std::vector<std::complex<double>> px(n + 1), py(n / 2 + 1);
    for (std::size_t k = 0; k < velocities_.size(); ++k) {
      const int b = E_.first_bin + int(k);
      const Vec2& a = velocities_[k];
      // Powers of the per-axis phase; index j holds signed wave number j - n/2.
      const auto base_x = detail::unit_phase(a[0] * t);
      if (g.dim() == 1) {
        std::complex<double> p{1.0, 0.0};
        for (std::size_t m = 0; m < modes; ++m) {
          const std::complex<double> mult = slices_.is_nyquist(m) ? std::complex<double>{1.0, 0.0} : p;
          acc[m] += w * slices_.coeff(b, m) * mult;
          p *= base_x;
        }
      } else {
        const auto base_y = detail::unit_phase(a[1] * t);
        const int half = n / 2;
        px[half] = {1.0, 0.0};
        for (int j = 1; j <= half; ++j) {
          px[half + j] = px[half + j - 1] * base_x;
          px[half - j] = px[half - j + 1] * std::conj(base_x);
        }
        py[0] = {1.0, 0.0};
        for (int j = 1; j <= half; ++j) py[j] = py[j - 1] * base_y;
        for (std::size_t m = 0; m < modes; ++m) {
          std::complex<double> mult{1.0, 0.0};
          if (!slices_.is_nyquist(m)) {
            const Mode kv = slices_.wave_vector(m);
            mult = px[half + kv[0]] * py[kv[1]];
          }
          acc[m] += w * slices_.coeff(b, m) * mult;
        }
      }
    }
    const double cells = double(g.cell_count());
    double energy = pairwise_sum(modes, [&](std::size_t m) {
      if (m == 0) return 0.0;
      return slices_.multiplicity(m) * std::norm(acc[m]);
    });
    return energy / (cells * cells);
  }

 private:
  const SpectralSlices& slices_;
  SnappedInterval E_;
  std::vector<Vec2> velocities_;
};

/// Allowance for time and xi quadrature in the homogenization inequality.
inline constexpr double kHomogenizationAllowance = 1e-6;

struct HomogenizationOptions {
  int steps = 256;  // midpoint time nodes
  int n_max = 8;
  int q = 256;
};

struct HomogenizationReport {
  double T = 0.0;
  Interval E{0.0, 1.0};  // snapped
  double snap_distance = 0.0;
  double lhs = 0.0;  // (1/T) int_0^T ||u_E(t) - mean||^2 dt
  double rhs = 0.0;  // |abar|(T; E) ||f0||^2_{L2(M x E)}
  double abar = 0.0;
  double f0_norm_sq = 0.0;
  double slack = 0.0;
  bool holds = false;
  int steps = 0;
  int n_max = 0;
  int q = 0;
  double velocity_quadrature_error = 0.0;  // dxi * lipschitz_bound
};

/// Time average of the squared density fluctuation on E compared with the
/// truncated non-degeneracy functional times ||f0||^2 on M x E.
inline HomogenizationReport homogenization_experiment(const KineticField& f0, const Interval& E, double T,
                                                      const FluxModel& flux, const HomogenizationOptions& opt = {}) {
  if (opt.steps < 16) throw InputError("homogenization needs at least 16 time nodes");
  if (!(T > 0.0)) throw InputError("homogenization needs T > 0");
  if (f0.grid().dim() != flux.dim()) throw InputError("grid and flux dimensions differ");
  const auto snap = snap_to_bins(E, f0.kgrid());
  const SpectralSlices slices(f0);
  const DensityFluctuation fluct(slices, snap, flux);

  HomogenizationReport r;
  r.T = T;
  r.E = snap.snapped;
  r.snap_distance = snap.snap_distance;
  r.steps = opt.steps;
  r.n_max = opt.n_max;
  r.q = opt.q;
  const double dt = T / opt.steps;
  r.lhs = pairwise_sum(std::size_t(opt.steps), [&](std::size_t j) { return fluct((j + 0.5) * dt); }) / opt.steps;

  const double w = f0.kgrid().dxi() * f0.grid().cell_volume();
  const std::size_t nb = std::size_t(snap.last_bin - snap.first_bin);
  r.f0_norm_sq = pairwise_sum(nb, [&](std::size_t k) {
                   const auto slice = f0.slice(snap.first_bin + int(k));
                   return exact_sum(slice.size(), [&](std::size_t c) { return slice[c] * slice[c]; });
                 }) *
                 w;
  r.abar = abar_report(T, snap.snapped, flux, opt.n_max, opt.q).sup_value;
  r.rhs = r.abar * r.f0_norm_sq;
  r.slack = r.rhs - r.lhs;
  r.holds = r.slack >= -kHomogenizationAllowance;
  r.velocity_quadrature_error = f0.kgrid().dxi() * flux.lipschitz_bound();
  return r;
}

}  // namespace conslaw
