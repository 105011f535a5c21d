#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/parallel.hpp"
#include "conslaw/torus_field.hpp"

namespace conslaw {

/// Integer Fourier mode on T^dim (first dim components used).
using Mode = std::array<int, 2>;

inline double mode_dot(const Mode& n, const Vec2& v, int dim) {
  double s = n[0] * v[0];
  if (dim > 1) s += n[1] * v[1];
  return s;
}

/// Below this |s| the kernel takes its limit value 1.
inline constexpr double kSincZero = 1e-14;

/// |sin(pi T s) / (pi T s)| with s = n . (a(xi) - a(zeta)); the modulus of
/// the time average over [0, T] of <e_n o flow_xi, e_n o flow_zeta>.
inline double sinc_kernel_s(double s, double T) {
  if (std::abs(s) < kSincZero) return 1.0;
  const double x = std::numbers::pi * T * s;
  return std::abs(std::sin(x) / x);
}

inline double sinc_kernel(const Mode& n, double xi, double zeta, double T, const FluxModel& flux) {
  if (!(T > 0.0)) throw InputError("sinc_kernel needs T > 0");
  const int d = flux.dim();
  const Vec2 a = flux.velocity(xi);
  const Vec2 b = flux.velocity(zeta);
  double s = n[0] * (a[0] - b[0]);
  if (d > 1) s += n[1] * (a[1] - b[1]);
  return sinc_kernel_s(s, T);
}

/// Minimum number of sample points for the quadratures below.
inline constexpr int kMinQuadrature = 16;

/// sup over zeta in E of the integral over E of sinc_kernel(n, xi, zeta).
///
/// zeta runs over q equispaced points of E including both endpoints; the
/// xi-integral is the composite midpoint rule with q cells.
inline double abar_n(double T, const Interval& E, const Mode& n, const FluxModel& flux, int q) {
  if (q < kMinQuadrature) throw InputError("abar_n needs q >= " + std::to_string(kMinQuadrature));
  if (!(T > 0.0)) throw InputError("abar_n needs T > 0");
  const int d = flux.dim();
  const double len = E.length();
  const double w = len / q;
  std::vector<double> proj_xi(q), proj_zeta(q);
  for (int i = 0; i < q; ++i) proj_xi[i] = mode_dot(n, flux.velocity(E.lo + (i + 0.5) * w), d);
  for (int j = 0; j < q; ++j) {
    const double zeta = (j == q - 1) ? E.hi : E.lo + j * len / (q - 1);
    proj_zeta[j] = mode_dot(n, flux.velocity(zeta), d);
  }
  double best = 0.0;
  for (int j = 0; j < q; ++j) {
    const double pz = proj_zeta[j];
    const double integral =
        pairwise_sum(std::size_t(q), [&](std::size_t i) { return sinc_kernel_s(proj_xi[i] - pz, T); }) * w;
    best = std::max(best, integral);
  }
  return std::min(best, len);
}

struct ModeValue {
  Mode n{0, 0};
  double value = 0.0;
};

/// Per-mode values of the truncated non-degeneracy functional.
struct DegeneracyReport {
  double T = 0.0;
  Interval E{0.0, 1.0};
  int dim = 1;
  int n_max = 1;
  int quadrature_points = kMinQuadrature;
  std::vector<ModeValue> per_mode;
  double sup_value = 0.0;
  Mode argmax{0, 0};
};

/// All nonzero modes with |n|_inf <= n_max, in lexicographic order.
inline std::vector<Mode> truncated_modes(int dim, int n_max) {
  std::vector<Mode> modes;
  if (dim == 1) {
    for (int a = -n_max; a <= n_max; ++a)
      if (a != 0) modes.push_back({a, 0});
  } else {
    for (int a = -n_max; a <= n_max; ++a)
      for (int b = -n_max; b <= n_max; ++b)
        if (a != 0 || b != 0) modes.push_back({a, b});
  }
  return modes;
}

/// Truncated sup over Fourier modes of abar_n. Modes are evaluated
/// independently (possibly in parallel); each writes only its own slot.
inline DegeneracyReport abar_report(double T, const Interval& E, const FluxModel& flux, int n_max, int q) {
  if (n_max < 1) throw InputError("abar_report needs n_max >= 1");
  DegeneracyReport r;
  r.T = T;
  r.E = E;
  r.dim = flux.dim();
  r.n_max = n_max;
  r.quadrature_points = q;
  const auto modes = truncated_modes(flux.dim(), n_max);
  r.per_mode.resize(modes.size());
  // Modes related by n -> -n give identical values; evaluate one of each.
  parallel_for(modes.size(), [&](std::size_t k) {
    const Mode& n = modes[k];
    const bool canonical = n[0] > 0 || (n[0] == 0 && n[1] > 0);
    r.per_mode[k].n = n;
    if (canonical) r.per_mode[k].value = abar_n(T, E, n, flux, q);
  });
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Mode& n = modes[k];
    const bool canonical = n[0] > 0 || (n[0] == 0 && n[1] > 0);
    if (!canonical) {
      const Mode m{-n[0], -n[1]};
      const auto it = std::find_if(r.per_mode.begin(), r.per_mode.end(), [&](const ModeValue& mv) { return mv.n == m; });
      r.per_mode[k].value = it->value;
    }
  }
  for (const auto& mv : r.per_mode) {
    if (mv.value > r.sup_value) {
      r.sup_value = mv.value;
      r.argmax = mv.n;
    }
  }
  return r;
}

/// sup over (alpha, beta) of |{xi in E : |beta . a(xi) - alpha| <= gamma}|.
///
/// alpha runs over q points of [-M-1, M+1] with M = max_E |a| plus the band
/// centres proj + gamma of every sample, beta over
/// {-1, 1} in 1-D and q angles of the unit circle in 2-D; the measure is
/// counted on the q midpoints of E.
inline double epsilon_gamma(double gamma, const Interval& E, const FluxModel& flux, int q) {
  if (!(gamma > 0.0)) throw InputError("epsilon_gamma needs gamma > 0");
  if (q < kMinQuadrature) throw InputError("epsilon_gamma needs q >= " + std::to_string(kMinQuadrature));
  const int d = flux.dim();
  const double w = E.length() / q;
  std::vector<Vec2> a(q);
  double M = 0.0;
  for (int i = 0; i < q; ++i) {
    a[i] = flux.velocity(E.lo + (i + 0.5) * w);
    M = std::max(M, std::hypot(a[i][0], a[i][1]));
  }
  for (double x : {E.lo, E.hi}) {
    const Vec2 v = flux.velocity(x);
    M = std::max(M, std::hypot(v[0], v[1]));
  }
  std::vector<Vec2> betas;
  if (d == 1) {
    betas = {{1.0, 0.0}, {-1.0, 0.0}};
  } else {
    for (int k = 0; k < q; ++k) {
      const double th = 2.0 * std::numbers::pi * k / q;
      betas.push_back({std::cos(th), std::sin(th)});
    }
  }
  int best = 0;
  std::vector<double> proj(q);
  for (const Vec2& beta : betas) {
    for (int i = 0; i < q; ++i) proj[i] = beta[0] * a[i][0] + (d > 1 ? beta[1] * a[i][1] : 0.0);
    auto count_at = [&](double alpha) {
      int count = 0;
      for (int i = 0; i < q; ++i) count += std::abs(proj[i] - alpha) <= gamma ? 1 : 0;
      best = std::max(best, count);
    };
    for (int j = 0; j < q; ++j) count_at(-M - 1.0 + j * (2.0 * M + 2.0) / (q - 1));
    // A band whose lower edge sits on a sample attains the sliding-window
    // maximum, so these centres make the sup exact on the sample set.
    for (int i = 0; i < q; ++i) count_at(std::clamp(proj[i] + gamma, -M - 1.0, M + 1.0));
  }
  return best * w;
}

/// Outcome of the classical (root-set) non-degeneracy test.
struct ClassicalCheck {
  bool nondegenerate = true;
  double worst_measure = 0.0;        // largest near-orthogonal set found
  std::array<double, 3> worst_nu{};  // direction attaining it
  double band = 0.0;                 // half-width of the near-orthogonality band
};

/// Tests that for every sampled nu in S^dim the set {xi in E : (1, a(xi)) . nu = 0}
/// is null, read as: the measure of {|(1, a(xi)) . nu| <= h_xi * lipschitz_bound}
/// never exceeds 3 cells of the q-point xi grid.
///
/// Directions come from a uniform sampling of the sphere plus, for every
/// grid xi (1-D) or pair of grid points (2-D), the direction orthogonal to
/// the corresponding (1, a(xi)) vectors, which contains every exactly
/// degenerate direction supported on more than dim grid points.
inline ClassicalCheck classical_nondegeneracy_check(const Interval& E, const FluxModel& flux, int q) {
  if (q < kMinQuadrature) throw InputError("classical check needs q >= " + std::to_string(kMinQuadrature));
  const int d = flux.dim();
  const double h = E.length() / q;
  std::vector<std::array<double, 3>> lifted(q);
  for (int i = 0; i < q; ++i) {
    const Vec2 a = flux.velocity(E.lo + (i + 0.5) * h);
    lifted[i] = {1.0, a[0], d > 1 ? a[1] : 0.0};
  }
  ClassicalCheck out;
  out.band = h * flux.lipschitz_bound();

  auto test = [&](std::array<double, 3> nu) {
    const double norm = std::sqrt(nu[0] * nu[0] + nu[1] * nu[1] + nu[2] * nu[2]);
    if (norm < 1e-300) return;
    for (double& c : nu) c /= norm;
    int count = 0;
    for (const auto& v : lifted) {
      const double dot = v[0] * nu[0] + v[1] * nu[1] + v[2] * nu[2];
      const double scale = std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]);
      count += std::abs(dot) <= out.band + 1e-12 * scale ? 1 : 0;
    }
    const double measure = count * h;
    if (measure > out.worst_measure) {
      out.worst_measure = measure;
      out.worst_nu = nu;
    }
  };

  if (d == 1) {
    for (int k = 0; k < 4 * q; ++k) {
      const double th = std::numbers::pi * k / (4 * q);
      test({std::cos(th), std::sin(th), 0.0});
    }
    for (const auto& v : lifted) test({-v[1], v[0], 0.0});
  } else {
    // Fibonacci lattice on the half sphere (nu and -nu are equivalent).
    const int samples = 4 * q * q;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < samples; ++k) {
      const double z = 1.0 - (k + 0.5) / samples;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      test({z, r * std::cos(golden * k), r * std::sin(golden * k)});
    }
    for (const auto& u : lifted) {
      test({0.0, -u[2], u[1]});
      test({u[2], 0.0, -u[0]});
      test({-u[1], u[0], 0.0});
    }
    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j < q; ++j) {
        const auto& u = lifted[i];
        const auto& v = lifted[j];
        test({u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]});
      }
    }
  }
  out.nondegenerate = out.worst_measure <= 3.0 * h * (1.0 + 1e-12);
  return out;
}

}  // namespace conslaw
