#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "conslaw/degeneracy.hpp"
#include "conslaw/error.hpp"
#include "conslaw/flux.hpp"
#include "conslaw/fv_solver.hpp"
#include "conslaw/kinetic.hpp"
#include "conslaw/longtime.hpp"
#include "conslaw/report_json.hpp"
#include "conslaw/torus_field.hpp"
#include "conslaw/transport.hpp"

namespace conslaw {

/// Exit codes of the experiment runner.
enum class ExitStatus : int { ok = 0, check_failed = 1, bad_input = 2 };

struct ExperimentResult {
  ExitStatus status = ExitStatus::ok;
  std::filesystem::path out_dir;
  std::vector<std::string> failed;  // names of failed checks
  std::string message;
};

namespace manifest {

inline const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw InputError("manifest: missing key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw InputError("manifest: key '" + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

inline int integer(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw InputError("manifest: key '" + key + "' must be an integer");
  return v.get<int>();
}

inline int integer_or(const json& j, const std::string& key, int fallback) {
  return j.contains(key) ? integer(j, key) : fallback;
}

inline std::string text_or(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw InputError("manifest: key '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline Interval interval(const json& j, const std::string& key) {
  const json& v = require(j, key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw InputError("manifest: key '" + key + "' must be [lo, hi]");
  try {
    return Interval(v[0].get<double>(), v[1].get<double>());
  } catch (const InputError&) {
    throw InputError("manifest: key '" + key + "' needs lo < hi");
  }
}

inline std::uint64_t seed_or(const json& j, std::uint64_t fallback) {
  if (!j.contains("seed")) return fallback;
  const json& s = j.at("seed");
  if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) throw InputError("manifest: key 'seed' must be a non-negative integer");
  return j.at("seed").get<std::uint64_t>();
}

inline FluxModel flux(const json& j) {
  const json& name = require(j, "flux");
  if (!name.is_string()) throw InputError("manifest: key 'flux' must be a string");
  FluxParams p;
  if (j.contains("alpha")) p.alpha = number(j, "alpha");
  if (j.contains("c")) {
    const json& c = j.at("c");
    if (c.is_number()) {
      p.c = {c.get<double>()};
    } else if (c.is_array() && !c.empty() && c.size() <= 2) {
      p.c.clear();
      for (const auto& x : c) {
        if (!x.is_number()) throw InputError("manifest: key 'c' must hold numbers");
        p.c.push_back(x.get<double>());
      }
    } else {
      throw InputError("manifest: key 'c' must be a number or an array of 1-2 numbers");
    }
  }
  if (j.contains("range")) p.range = interval(j, "range");
  try {
    return builtin_flux(name.get<std::string>(), p);
  } catch (const InputError& e) {
    throw InputError(std::string("manifest: key 'flux': ") + e.what());
  }
}

inline TorusGrid grid(const json& j, int flux_dim) {
  const int dim = integer_or(j, "dim", flux_dim);
  if (dim != flux_dim) throw InputError("manifest: key 'dim' does not match the flux dimension");
  const int n = integer(j, "N");
  if (n < 2) throw InputError("manifest: key 'N' must be >= 2");
  return TorusGrid(dim, n);
}

/// Initial profile: {"type": "sine", mean, amplitude, k:[kx, ky]}, {"type":
/// "random", lo, hi} (seeded by the manifest seed), or {"type": "step",
/// left, right} (left state on x < 1/2).
inline ScalarField initial_field(const json& j, const TorusGrid& g, std::uint64_t seed) {
  const json spec = j.contains("initial") ? j.at("initial") : json{{"type", "sine"}};
  if (!spec.is_object()) throw InputError("manifest: key 'initial' must be an object");
  const std::string type = text_or(spec, "type", "sine");
  if (type == "sine") {
    const double m = number_or(spec, "mean", 0.5);
    const double amp = number_or(spec, "amplitude", 0.3);
    int kx = 1, ky = 0;
    if (spec.contains("k")) {
      const json& k = spec.at("k");
      if (!k.is_array() || k.empty() || k.size() > 2) throw InputError("manifest: key 'k' must be [kx] or [kx, ky]");
      kx = k[0].get<int>();
      if (k.size() > 1) ky = k[1].get<int>();
    }
    if (g.dim() == 1)
      return sample_midpoint(g, [&](double x) { return m + amp * std::sin(2.0 * std::numbers::pi * kx * x); });
    return sample_midpoint(g, [&](double x, double y) {
      return m + amp * std::sin(2.0 * std::numbers::pi * (kx * x + ky * y));
    });
  }
  if (type == "random") {
    const double lo = number_or(spec, "lo", -1.0);
    const double hi = number_or(spec, "hi", 1.0);
    if (!(lo < hi)) throw InputError("manifest: key 'initial' needs lo < hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(g.cell_count());
    for (double& x : v) x = dist(rng);
    return ScalarField(g, std::move(v));
  }
  if (type == "step") {
    const double l = number(spec, "left");
    const double r = number(spec, "right");
    if (g.dim() == 1) return sample_midpoint(g, [&](double x) { return x < 0.5 ? l : r; });
    return sample_midpoint(g, [&](double x, double) { return x < 0.5 ? l : r; });
  }
  throw InputError("manifest: key 'initial' has unknown type '" + type + "'");
}

}  // namespace manifest

/// FNV-1a 64 of the canonical (sorted-key) manifest text, as 16 hex digits.
inline std::string manifest_hash(const json& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : m.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw RunError("cannot write " + p.string());
  os << text;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

struct Checks {
  json record = json::object();
  std::vector<std::string> failed;
  void add(const std::string& name, bool ok, double value) {
    record[name] = {{"holds", ok}, {"value", value}};
    if (!ok) failed.push_back(name);
  }
};

/// Smallest T on a bisection bracket with sup_value(T) * l1 < eps^2.
inline json t1_from_epsilon(const json& spec, const FluxModel& flux, double u0_l1) {
  const double eps = manifest::number(spec, "epsilon");
  if (!(eps > 0.0)) throw InputError("manifest: key 'epsilon' must be positive");
  const Interval E = manifest::interval(spec, "E");
  const int n_max = manifest::integer_or(spec, "n_max", 4);
  const int q = manifest::integer_or(spec, "q", 256);
  const double T_max = manifest::number_or(spec, "T_max", 1e4);
  const double target = eps * eps;
  auto value = [&](double T) { return abar_report(T, E, flux, n_max, q).sup_value * u0_l1; };
  json out{{"epsilon", eps}, {"E", {E.lo, E.hi}}, {"n_max", n_max}, {"q", q}, {"u0_l1", u0_l1}};
  double hi = 1.0;
  while (value(hi) >= target) {
    hi *= 2.0;
    if (hi > T_max) {
      out["found"] = false;
      return out;
    }
  }
  double lo = hi / 2.0;
  if (hi == 1.0) lo = 0.0;
  for (int it = 0; it < 40 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid > 0.0 && value(mid) < target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out["found"] = true;
  out["T1"] = hi;
  out["value_at_T1"] = value(hi);
  return out;
}

inline std::vector<std::string> run_solve(const json& m, const std::filesystem::path& dir) {
  const FluxModel flux = manifest::flux(m);
  const TorusGrid g = manifest::grid(m, flux.dim());
  SchemeConfig cfg;
  cfg.cfl = manifest::number_or(m, "cfl", 0.45);
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw InputError("manifest: key 'cfl' must lie in (0, 1]");
  cfg.t_end = manifest::number(m, "t_end");
  if (!(cfg.t_end > 0.0)) throw InputError("manifest: key 't_end' must be positive");
  cfg.output_every = manifest::integer_or(m, "output_every", 10);
  if (cfg.output_every < 1) throw InputError("manifest: key 'output_every' must be >= 1");
  try {
    cfg.numerical_flux = parse_numerical_flux(manifest::text_or(m, "numerical_flux", "godunov"));
  } catch (const InputError& e) {
    throw InputError(std::string("manifest: key 'numerical_flux': ") + e.what());
  }
  const ScalarField u0 = manifest::initial_field(m, g, manifest::seed_or(m, 0));
  try {
    flux.require_in_range(u0.min());
    flux.require_in_range(u0.max());
  } catch (const RangeError& e) {
    throw InputError(std::string("manifest: key 'initial': ") + e.what());
  }
  const int bins = manifest::integer_or(m, "xi_bins", 64);
  if (bins < 2) throw InputError("manifest: key 'xi_bins' must be >= 2");

  const EvolveResult run = evolve(u0, flux, cfg, default_defect_grid(u0, bins));
  const DefectCheckReport defect = project_and_check_defect(run.defect, u0);
  const DecayReport decay = decay_report(run.series);

  {
    std::ofstream os(dir / "series.csv", std::ios::binary);
    write_series_csv(os, run.series);
  }
  {
    std::ofstream os(dir / "pi_m.csv", std::ios::binary);
    write_projection_csv(os, defect);
  }
  {
    std::ofstream os(dir / "final_field.csv", std::ios::binary);
    write_field_csv(os, run.series.snapshots.back());
  }
  write_json(dir / "defect.json", to_json(defect));
  write_json(dir / "decay.json", to_json(decay));

  Checks checks;
  const double m0 = run.series.scalars.front().mass;
  double mass_drift = 0.0, tv_increase = 0.0, lo = u0.min(), hi = u0.max(), excursion = 0.0;
  for (std::size_t k = 0; k < run.series.size(); ++k) {
    mass_drift = std::max(mass_drift, std::abs(run.series.scalars[k].mass - m0));
    if (k > 0) tv_increase = std::max(tv_increase, run.series.scalars[k].tv - run.series.scalars[k - 1].tv);
    const auto& s = run.series.snapshots[k];
    excursion = std::max({excursion, lo - s.min(), s.max() - hi});
  }
  checks.add("mass_conservation", mass_drift <= 1e-11, mass_drift);
  checks.add("maximum_principle", excursion <= 1e-12, excursion);
  checks.add("tvd", tv_increase <= 1e-11, tv_increase);
  checks.add("monotone_decay", decay.monotone_violation <= 1e-12, decay.monotone_violation);
  checks.add("defect_pointwise", defect.pointwise.holds, defect.pointwise.slack);
  checks.add("defect_integral", defect.integral.holds, defect.integral.slack);
  checks.add("defect_profile", defect.profile.holds, defect.profile.slack);
  if (m.contains("t1_from_epsilon")) {
    const json t1 = t1_from_epsilon(m.at("t1_from_epsilon"), flux, lp_distance(u0, 0.0, 1.0));
    write_json(dir / "t1.json", t1);
    checks.add("t1_found", t1.at("found").get<bool>(), t1.value("T1", 0.0));
  }
  write_json(dir / "checks.json", {{"steps", run.steps}, {"checks", checks.record}});
  return checks.failed;
}

inline std::vector<std::string> run_degeneracy(const json& m, const std::filesystem::path& dir) {
  const FluxModel flux = manifest::flux(m);
  const double T = manifest::number(m, "T");
  if (!(T > 0.0)) throw InputError("manifest: key 'T' must be positive");
  const Interval E = manifest::interval(m, "E");
  const int n_max = manifest::integer_or(m, "n_max", 8);
  if (n_max < 1) throw InputError("manifest: key 'n_max' must be >= 1");
  const int q = manifest::integer_or(m, "q", 256);
  if (q < kMinQuadrature) throw InputError("manifest: key 'q' must be >= 16");

  const DegeneracyReport rep = abar_report(T, E, flux, n_max, q);
  const DegeneracyReport later = abar_report(10.0 * T, E, flux, n_max, q);
  const double ratio = rep.sup_value > 0.0 ? later.sup_value / rep.sup_value : 0.0;
  const std::string verdict = ratio > 0.9 ? "degenerate" : "non-degenerate";
  const ClassicalCheck classical = classical_nondegeneracy_check(E, flux, std::min(q, 128));

  json out = to_json(rep);
  out["flux"] = flux.label();
  out["decade_sup_value"] = later.sup_value;
  out["decade_ratio"] = ratio;
  out["verdict"] = verdict;
  out["classical_nondegenerate"] = classical.nondegenerate;
  out["classical_worst_measure"] = classical.worst_measure;
  if (m.contains("gammas")) {
    json eps = json::array();
    for (const auto& gj : m.at("gammas")) {
      if (!gj.is_number()) throw InputError("manifest: key 'gammas' must hold numbers");
      const double gamma = gj.get<double>();
      eps.push_back({{"gamma", gamma}, {"epsilon", epsilon_gamma(gamma, E, flux, q)}});
    }
    out["epsilon_gamma"] = eps;
  }
  write_json(dir / "report.json", out);

  std::vector<std::string> failed;
  if (m.contains("expect")) {
    const std::string expect = manifest::text_or(m, "expect", "");
    if (expect != "degenerate" && expect != "non-degenerate")
      throw InputError("manifest: key 'expect' must be 'degenerate' or 'non-degenerate'");
    if (expect != verdict) failed.push_back("verdict");
  }
  return failed;
}

inline std::vector<std::string> run_transport(const json& m, const std::filesystem::path& dir) {
  const FluxModel flux = manifest::flux(m);
  const TorusGrid g = manifest::grid(m, flux.dim());
  const Interval E = manifest::interval(m, "E");
  const Interval xr = m.contains("xi_range") ? manifest::interval(m, "xi_range") : E;
  const int bins = manifest::integer_or(m, "xi_bins", 64);
  if (bins < 2) throw InputError("manifest: key 'xi_bins' must be >= 2");
  const KineticGrid kg(xr.lo, xr.hi, bins);
  const double T = manifest::number(m, "T");
  if (!(T > 0.0)) throw InputError("manifest: key 'T' must be positive");
  HomogenizationOptions opt;
  opt.steps = manifest::integer_or(m, "steps", 256);
  opt.n_max = manifest::integer_or(m, "n_max", 8);
  opt.q = manifest::integer_or(m, "q", 256);
  if (opt.steps < 16) throw InputError("manifest: key 'steps' must be >= 16");
  if (opt.n_max < 1) throw InputError("manifest: key 'n_max' must be >= 1");
  if (opt.q < kMinQuadrature) throw InputError("manifest: key 'q' must be >= 16");

  const json f0spec = m.contains("f0") ? m.at("f0") : json{{"type", "cosine"}};
  const std::string type = manifest::text_or(f0spec, "type", "cosine");
  KineticField f0(g, kg);
  if (type == "cosine") {
    for (int b = 0; b < bins; ++b) {
      const double xi = kg.center(b);
      if (!E.contains(xi)) continue;
      auto slice = f0.slice(b);
      for (std::size_t c = 0; c < slice.size(); ++c) {
        const int i = g.dim() == 1 ? int(c) : int(c) / g.cells_per_axis();
        slice[c] = std::cos(2.0 * std::numbers::pi * g.center(i));
      }
    }
  } else if (type == "random") {
    std::mt19937_64 rng(manifest::seed_or(m, 0));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int b = 0; b < bins; ++b)
      for (double& v : f0.slice(b)) v = dist(rng);
  } else {
    throw InputError("manifest: key 'f0' has unknown type '" + type + "'");
  }
  const HomogenizationReport rep = homogenization_experiment(f0, E, T, flux, opt);
  write_json(dir / "report.json", to_json(rep));
  std::vector<std::string> failed;
  if (!rep.holds) failed.push_back("homogenization_inequality");
  return failed;
}

inline std::vector<std::string> run_ndloc(const json& m, const std::filesystem::path& dir) {
  const int n = manifest::integer_or(m, "N", 256);
  if (n < 2) throw InputError("manifest: key 'N' must be >= 2");
  const int samples = manifest::integer_or(m, "samples", 100);
  const int deltas = manifest::integer_or(m, "deltas", 10);
  if (samples < 1) throw InputError("manifest: key 'samples' must be >= 1");
  if (deltas < 1) throw InputError("manifest: key 'deltas' must be >= 1");
  const double zeta_fraction = manifest::number_or(m, "zeta_fraction", 0.5);
  if (!(zeta_fraction > 0.0 && zeta_fraction < 1.0)) throw InputError("manifest: key 'zeta_fraction' must lie in (0, 1)");
  const TorusGrid g(1, n);
  std::mt19937_64 rng(manifest::seed_or(m, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::ostringstream csv;
  csv << "sample,shift,R,v_bar,zeta,delta,lhs,rhs,holds,notallE\n" << std::setprecision(17);
  int pairs = 0, violations = 0, notallE_violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    // Raw field of random sign, then shifted to be non-negative.
    const double p = unit(rng);
    std::vector<double> raw(g.cell_count());
    for (double& x : raw) x = unit(rng) < p ? -1.0 + unit(rng) : 2.0 * unit(rng);
    const NonnegativeShift shifted = normalize_nonnegative(ScalarField(g, std::move(raw)));
    const ScalarField& v = shifted.field;
    const double R = v.max();
    const double vbar = mean(v);
    if (!(vbar > 0.0 && vbar < R)) continue;
    const double zeta = vbar + zeta_fraction * (R - vbar);
    const NdlocConstants k = ndloc_delta0({zeta - vbar, vbar, R});
    for (int d = 0; d < deltas; ++d) {
      const double delta = k.delta0 * (d + 1.0) / (deltas + 1.0);
      const NdlocResult r = ndloc_check(v, Interval(vbar, zeta), delta, R);
      ++pairs;
      violations += r.holds ? 0 : 1;
      notallE_violations += r.notallE_holds ? 0 : 1;
      worst_margin = std::min(worst_margin, r.rhs - r.lhs);
      csv << s << ',' << shifted.shift << ',' << R << ',' << vbar << ',' << zeta << ',' << delta << ',' << r.lhs << ','
          << r.rhs << ',' << (r.holds ? 1 : 0) << ',' << (r.notallE_holds ? 1 : 0) << '\n';
    }
  }
  write_text(dir / "ndloc.csv", csv.str());
  write_json(dir / "ndloc.json", {{"pairs", pairs},
                                  {"violations", violations},
                                  {"notallE_violations", notallE_violations},
                                  {"worst_margin", pairs ? worst_margin : 0.0}});
  std::vector<std::string> failed;
  if (violations > 0) failed.push_back("ndloc_inequality");
  if (notallE_violations > 0) failed.push_back("notallE");
  return failed;
}

inline std::vector<std::string> run_counterexample(const json& m, const std::filesystem::path& dir) {
  const double alpha = manifest::number_or(m, "alpha", (std::sqrt(5.0) - 1.0) / 2.0);
  const int n = manifest::integer_or(m, "n", 64);
  const int levels = manifest::integer_or(m, "levels", 3);
  const int q_max = manifest::integer_or(m, "q_max", 5);
  if (n < 4) throw InputError("manifest: key 'n' must be >= 4");
  if (levels < 1) throw InputError("manifest: key 'levels' must be >= 1");
  if (q_max < 1) throw InputError("manifest: key 'q_max' must be >= 1");
  const json prof = m.contains("profile") ? m.at("profile") : json::object();
  const double pm = manifest::number_or(prof, "mean", 0.5);
  const double pa = manifest::number_or(prof, "amplitude", 0.3);
  const auto profile = [pm, pa](double s) { return pm + pa * std::sin(2.0 * std::numbers::pi * s); };
  const CounterexampleReport rep = counterexample_residual(alpha, profile, n, levels, q_max);
  write_json(dir / "counterexample.json", to_json(rep));
  std::ostringstream csv;
  csv << "N,dt,residual\n" << std::setprecision(17);
  for (const auto& l : rep.levels) csv << l.N << ',' << l.dt << ',' << l.residual << '\n';
  write_text(dir / "residuals.csv", csv.str());

  std::vector<std::string> failed;
  if (!(rep.spectral_residual < 1e-10)) failed.push_back("spectral_residual");
  const bool stationary = rep.levels.front().residual <= 1e-13;
  if (!stationary) {
    for (double r : rep.ratios)
      if (!(r >= 1.7)) {
        failed.push_back("refinement_ratio");
        break;
      }
  }
  return failed;
}

}  // namespace detail

inline const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> cmds{"solve", "degeneracy", "transport", "ndloc", "counterexample"};
  return cmds;
}

/// Runs one manifest, writing artifacts under out_root/<manifest hash>/.
/// Bad input maps to exit 2, failed checks to exit 1.
inline ExperimentResult run_experiment(const std::string& command, const json& m, const std::filesystem::path& out_root) {
  ExperimentResult res;
  try {
    if (!m.is_object()) throw InputError("manifest: top level must be an object");
    if (m.contains("command")) {
      if (!m.at("command").is_string()) throw InputError("manifest: key 'command' must be a string");
      if (m.at("command").get<std::string>() != command)
        throw InputError("manifest: key 'command' is '" + m.at("command").get<std::string>() + "' but '" + command +
                         "' was requested");
    }
    res.out_dir = out_root / manifest_hash(m);
    std::filesystem::create_directories(res.out_dir);
    if (command == "solve") {
      res.failed = detail::run_solve(m, res.out_dir);
    } else if (command == "degeneracy") {
      res.failed = detail::run_degeneracy(m, res.out_dir);
    } else if (command == "transport") {
      res.failed = detail::run_transport(m, res.out_dir);
    } else if (command == "ndloc") {
      res.failed = detail::run_ndloc(m, res.out_dir);
    } else if (command == "counterexample") {
      res.failed = detail::run_counterexample(m, res.out_dir);
    } else {
      throw InputError("unknown command '" + command + "'");
    }
    detail::write_json(res.out_dir / "manifest.json", m);
    res.status = res.failed.empty() ? ExitStatus::ok : ExitStatus::check_failed;
    if (!res.failed.empty()) {
      res.message = "check failed:";
      for (const auto& f : res.failed) res.message += " " + f;
    }
  } catch (const InputError& e) {
    res.status = ExitStatus::bad_input;
    res.message = e.what();
  } catch (const json::exception& e) {
    res.status = ExitStatus::bad_input;
    res.message = std::string("manifest: ") + e.what();
  }
  return res;
}

inline ExperimentResult run_experiment(const json& m, const std::filesystem::path& out_root) {
  if (!m.is_object() || !m.contains("command") || !m.at("command").is_string()) {
    ExperimentResult res;
    res.status = ExitStatus::bad_input;
    res.message = "manifest: missing key 'command'";
    return res;
  }
  return run_experiment(m.at("command").get<std::string>(), m, out_root);
}

}  // namespace conslaw
