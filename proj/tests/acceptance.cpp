// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "conslaw/degeneracy.hpp"
#include "conslaw/fv_solver.hpp"
#include "conslaw/kinetic.hpp"
#include "conslaw/longtime.hpp"
#include "conslaw/transport.hpp"
#include "support.hpp"

using namespace conslaw;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ScalarField random_field(const TorusGrid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(g.cell_count());
  for (double& x : v) x = d(rng);
  return ScalarField(g, std::move(v));
}

KineticField random_kinetic(const TorusGrid& g, const KineticGrid& kg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(g.cell_count() * kg.bins());
  for (double& x : v) x = d(rng);
  return KineticField(g, kg, std::move(v));
}

// |(1/T) int_0^T exp(2 pi i s t) dt| by composite Simpson, step fine enough
// that the phase advances at most 0.02 rad per node.
double time_average_modulus(double s, double T) {
  int nodes = int(std::ceil(kTwoPi * std::abs(s) * T / 0.02));
  nodes = std::max(nodes + nodes % 2, 64);
  const double h = T / nodes;
  std::complex<double> acc{0.0, 0.0};
  for (int k = 0; k <= nodes; ++k) {
    const double w = (k == 0 || k == nodes) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * std::polar(1.0, kTwoPi * s * k * h);
  }
  return std::abs(acc * (h / 3.0) / T);
}

// C1: time quadrature of the mode correlation against the sinc closed form.
Outcome sinc_closed_form() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(-4, 4);
  std::uniform_real_distribution<double> xd(-1.0, 1.0), td(0.5, 20.0);
  double worst = 0.0;
  for (const char* name : {"burgers1d", "cubic1d"}) {
    const FluxModel flux = builtin_flux(name);
    for (int k = 0; k < 100; ++k) {
      int n = 0;
      while (n == 0) n = nd(rng);
      const double xi = xd(rng), zeta = xd(rng), T = td(rng);
      const double s = n * (flux.velocity(xi)[0] - flux.velocity(zeta)[0]);
      worst = std::max(worst, std::abs(time_average_modulus(s, T) - sinc_kernel({n, 0}, xi, zeta, T, flux)));
    }
  }
  return {worst <= 1e-8, fmt("max deviation %.3e over 200 tuples", worst)};
}

// C2: linear flux keeps sup = |E|; Burgers sup decays.
Outcome degenerate_vs_burgers() {
  FluxParams p;
  p.c = {1.0, 0.0};
  const Interval E(-1.0, 1.0);
  double lin_dev = 0.0;
  for (double T : {1.0, 10.0, 100.0})
    lin_dev = std::max(lin_dev, std::abs(abar_report(T, E, builtin_flux("linear", p), 4, 256).sup_value - E.length()));
  const FluxModel burgers = builtin_flux("burgers1d");
  std::vector<double> sups;
  for (double T : {10.0, 30.0, 100.0, 300.0, 1000.0}) sups.push_back(abar_report(T, E, burgers, 4, 8192).sup_value);
  bool decreasing = true;
  for (std::size_t k = 1; k < sups.size(); ++k) decreasing = decreasing && sups[k] < sups[k - 1];
  const double ratio = sups.back() / sups.front();
  return {lin_dev <= 1e-14 && decreasing && ratio < 0.1,
          fmt("linear deviation %.1e, burgers sup(10)=%.4f, sup(1000)/sup(10)=%.4f", lin_dev, sups.front(), ratio)};
}

// C3: homogenization inequality on random data plus the cosine closed form.
Outcome homogenization() {
  std::mt19937_64 rng(103);
  const FluxModel burgers = builtin_flux("burgers1d");
  const auto g = make_grid(1, 256);
  const KineticGrid kg(-1.0, 1.0, 64);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    const auto r = homogenization_experiment(random_kinetic(g, kg, rng), Interval(-1.0, 1.0), 10.0, burgers, {512, 8, 512});
    worst = std::min(worst, r.slack);
  }
  // f0 = cos(2 pi x) on [0, 1] in xi: lhs = (1/T) int_0^T sinc^2(t) / 2 dt.
  const auto gc = make_grid(1, 8);
  const KineticGrid kc(0.0, 1.0, 512);
  KineticField f0(gc, kc);
  for (int b = 0; b < kc.bins(); ++b)
    for (int i = 0; i < 8; ++i) f0(std::size_t(i), b) = std::cos(kTwoPi * gc.center(i));
  const double T = 10.0;
  const auto rc = homogenization_experiment(f0, Interval(0.0, 1.0), T, burgers, {2000, 8, 256});
  const int nodes = 2000000;
  const double h = T / nodes;
  auto sinc2 = [](double t) {
    if (t == 0.0) return 1.0;
    const double x = std::numbers::pi * t;
    return std::sin(x) * std::sin(x) / (x * x);
  };
  double s = sinc2(0.0) + sinc2(T);
  for (int k = 1; k < nodes; ++k) s += (k % 2 ? 4.0 : 2.0) * sinc2(k * h);
  const double analytic = s * h / 3.0 / T / 2.0;
  const double cos_err = std::abs(rc.lhs - analytic);
  return {worst >= -1e-6 && rc.slack >= -1e-6 && cos_err <= 1e-6,
          fmt("worst random slack %.3e, cosine lhs error %.2e, cosine slack %.3e", worst, cos_err, rc.slack)};
}

// C4: localized non-degeneracy lemma on random (field, delta) pairs.
Outcome localized_nondegeneracy() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  const auto g = make_grid(1, 256);
  int pairs = 0, violations = 0, notall_fail = 0;
  double kappa_res = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto v = normalize_nonnegative(random_field(g, rng, -1.0, 1.0)).field;
    const double R = v.max() + 0.1;
    const double vbar = mean(v);
    const double zeta = vbar + frac(rng) * (R - vbar);
    const auto c = ndloc_delta0({zeta - vbar, vbar, R});
    kappa_res = std::max(kappa_res, std::abs(c.kappa * c.kappa - (zeta - vbar - c.kappa) * vbar));
    for (int j = 1; j <= 10; ++j) {
      const auto r = ndloc_check(v, Interval(vbar, zeta), c.delta0 * j / 11.0, R);
      ++pairs;
      violations += !r.holds;
      notall_fail += !r.notallE_holds;
    }
  }
  return {pairs >= 1000 && violations == 0 && notall_fail == 0 && kappa_res <= 1e-13,
          fmt("%.0f pairs, %.0f violations, kappa residual %.1e", pairs, violations + notall_fail, kappa_res)};
}

// C5: bin-exact chi identities on all edge pairs of a 64-bin grid.
Outcome chi_identities() {
  const KineticGrid kg(-2.0, 2.0, 64);
  double worst = 0.0;
  for (int a = 0; a <= kg.bins(); ++a)
    for (int b = 0; b <= kg.bins(); ++b) {
      const double alpha = kg.edge(a), beta = kg.edge(b);
      double pos = 0.0, abs_ = 0.0;
      for (int k = 0; k < kg.bins(); ++k) {
        const double d = chi_bin_average(alpha, kg.edge(k), kg.edge(k + 1)) - chi_bin_average(beta, kg.edge(k), kg.edge(k + 1));
        pos += std::max(d, 0.0) * kg.dxi();
        abs_ += std::abs(d) * kg.dxi();
      }
      worst = std::max({worst, std::abs(pos - std::max(alpha - beta, 0.0)), std::abs(abs_ - std::abs(alpha - beta))});
    }
  return {worst <= 1e-14, fmt("max error %.1e over %.0f pairs", worst, 65.0 * 65.0)};
}

// C6: defect bounds on the sine run, standing-shock dissipation profile.
Outcome defect_bounds() {
  const FluxModel burgers = builtin_flux("burgers1d");
  const auto u0 = sample_midpoint(make_grid(1, 512), [](double x) { return 0.5 + 0.3 * std::sin(kTwoPi * x); });
  SchemeConfig cfg;
  cfg.t_end = 20.0;
  const auto run = evolve(u0, burgers, cfg);
  const auto rep = project_and_check_defect(run.defect, u0);
  const bool sine_ok = rep.profile.slack >= -1e-3 && rep.integral.slack >= -1e-3;

  bool shock_ok = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string errs;
  for (int n : {128, 256, 512}) {
    const auto s0 = test_support::standing_shock(n);
    SchemeConfig c;
    c.t_end = test_support::kStandingShockTime;
    const KineticGrid kg(-1.0, 1.0, 64);
    const auto r = project_and_check_defect(evolve(s0, burgers, c, kg).defect, s0);
    double err = 0.0;
    for (std::size_t b = 0; b < r.xi.size(); ++b)
      err += std::abs(r.projection[b] / c.t_end - 0.5 * (1.0 - r.xi[b] * r.xi[b])) * kg.dxi();
    shock_ok = shock_ok && err <= 5.0 / n && err < prev;
    prev = err;
    errs += fmt(" %.2e", err);
  }
  return {sine_ok && shock_ok, fmt("sine slacks profile %.3e integral %.3e;", rep.profile.slack, rep.integral.slack) +
                                   " shock L1 errors" + errs};
}

// C7: contraction, maximum principle, TVD and mass on random pairs.
Outcome solver_structure() {
  std::mt19937_64 rng(107);
  FluxParams p;
  p.alpha = 0.618;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int kind = trial % 3;
    const FluxModel f = builtin_flux(kind == 0 ? "burgers1d" : kind == 1 ? "cubic1d" : "iso_burgers2d", p);
    const auto g = kind == 2 ? make_grid(2, 16) : make_grid(1, 64);
    auto u = random_field(g, rng, -1.0, 1.0);
    auto v = random_field(g, rng, -1.0, 1.0);
    const double dt = 0.45 * g.cell_size() / (g.dim() * f.max_speed(-1.0, 1.0));
    const double mu = mean(u), mv = mean(v), lo = u.min(), hi = u.max();
    double d1 = lp_distance(u, v, 1.0), tv = bv_seminorm(u);
    for (int k = 0; k < 50; ++k) {
      u = step_with_dt(u, f, NumericalFlux::godunov, dt, std::uint64_t(k)).after;
      v = step_with_dt(v, f, NumericalFlux::godunov, dt, std::uint64_t(k)).after;
      const double nd1 = lp_distance(u, v, 1.0), ntv = bv_seminorm(u);
      worst = std::max({worst, nd1 - d1, ntv - tv, lo - u.min(), u.max() - hi});
      d1 = nd1;
      tv = ntv;
    }
    worst = std::max({worst, std::abs(mean(u) - mu), std::abs(mean(v) - mv)});
  }
  return {worst <= 1e-11, fmt("worst excess %.2e over 100 pairs", worst)};
}

// C8: qualitative decay of the Burgers sine run.
Outcome decay() {
  const auto u0 = sample_midpoint(make_grid(1, 512), [](double x) { return 0.5 + 0.3 * std::sin(kTwoPi * x); });
  SchemeConfig cfg;
  cfg.t_end = 20.0;
  cfg.output_every = 1;
  const auto rep = decay_report(evolve(u0, builtin_flux("burgers1d"), cfg).series);
  bool ratios_ok = !rep.decade_ratios.empty();
  double rmin = 1.0, rmax = 0.0;
  for (const auto& d : rep.decade_ratios) {
    rmin = std::min(rmin, d.ratio);
    rmax = std::max(rmax, d.ratio);
    ratios_ok = ratios_ok && d.ratio >= 0.25 && d.ratio <= 1.0;
  }
  const double frac = rep.final_value / rep.initial;
  return {rep.monotone_violation <= 1e-12 && frac < 0.1 && ratios_ok,
          fmt("final/initial %.4f, ratio range [%.3f, %.3f]", frac, rmin, rmax) +
              fmt(", violation %.1e", rep.monotone_violation)};
}

// C9: stationary U(y - alpha x) is not captured by the degenerate scheme at
// finite resolution, but its residual vanishes under refinement.
Outcome counterexample() {
  const auto r = counterexample_residual((std::sqrt(5.0) - 1.0) / 2.0,
                                         [](double s) { return 0.5 + 0.3 * std::sin(kTwoPi * s); }, 64, 3);
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (double q : r.ratios) worst_ratio = std::min(worst_ratio, q);
  return {r.spectral_residual < 1e-10 && r.ratios.size() == 2 && worst_ratio >= 1.7,
          fmt("spectral residual %.2e, min refinement ratio %.3f", r.spectral_residual, worst_ratio)};
}

// C10: exact transport is unitary per slice and a one-parameter group.
Outcome transport_group() {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> td(0.0, 50.0);
  FluxParams p;
  p.alpha = 0.618;
  double l2 = 0.0, group = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int dim = 1 + k % 2;
    const auto g = make_grid(dim, dim == 1 ? 128 : 16);
    const KineticGrid kg(-1.0, 1.0, 16);
    const FluxModel f = builtin_flux(dim == 1 ? (k % 4 ? "burgers1d" : "cubic1d") : "iso_burgers2d", p);
    const auto f0 = random_kinetic(g, kg, rng);
    const double s = td(rng), t = td(rng);
    const auto a = advect_exact(f0, s, f).f;
    const auto ab = advect_exact(a, t, f).f;
    const auto c = advect_exact(f0, s + t, f).f;
    for (int b = 0; b < kg.bins(); ++b) {
      double n0 = 0.0, n1 = 0.0;
      for (double x : f0.slice(b)) n0 += x * x;
      for (double x : a.slice(b)) n1 += x * x;
      l2 = std::max(l2, std::abs(std::sqrt(n1 * g.cell_volume()) - std::sqrt(n0 * g.cell_volume())));
    }
    for (std::size_t i = 0; i < ab.values().size(); ++i) group = std::max(group, std::abs(ab.values()[i] - c.values()[i]));
  }
  return {l2 <= 1e-10 && group <= 1e-10, fmt("slice L2 drift %.2e, group law deviation %.2e", l2, group)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "sinc closed form", 5, sinc_closed_form},
      {2, "degenerate vs non-degenerate flux", 30, degenerate_vs_burgers},
      {3, "homogenization inequality", 60, homogenization},
      {4, "localized non-degeneracy", 30, localized_nondegeneracy},
      {5, "kinetic identities", 0, chi_identities},
      {6, "defect measure bounds", 120, defect_bounds},
      {7, "solver structure", 0, solver_structure},
      {8, "qualitative decay", 60, decay},
      {9, "degenerate counterexample", 60, counterexample},
      {10, "transport unitarity and group law", 0, transport_group},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
