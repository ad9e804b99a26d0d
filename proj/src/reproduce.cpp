#include "ndtrap/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "ndtrap/fitters.hpp"
#include "ndtrap/io.hpp"
#include "ndtrap/signal.hpp"
#include "ndtrap/trap.hpp"

namespace ndtrap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string prefix(const Scenario& s) { return s.name.empty() ? std::string("run") : s.name; }

ordered_json scenario_header(const Scenario& s) {
  return {{"scenario", s.name}, {"kind", to_string(s.run.kind)}, {"seed", s.run.seed}};
}

void add_file(RunOutput& out, const fs::path& path, std::string_view content) {
  io::write_text(path, content);
  out.files.push_back(path);
}

// ---------------------------------------------------------------------------

struct SurvivalOutcome {
  SurvivalCurve curve;
  std::optional<FitResult> fit;
  std::string fit_error;
};

SurvivalOutcome survival(const Scenario& s) {
  SurvivalOutcome o;
  o.curve = simulate_survival(s.make_particle(), s.make_sampler(), s.trap, s.emission, s.uv, s.make_survival_run());
  o.curve.scenario = s.name;
  try {
    o.fit = fit_exponential(o.curve);
  } catch (const FitError& e) {
    o.fit_error = e.what();
  }
  return o;
}

RunOutput write_survival(const Scenario& s, const SurvivalOutcome& o, const fs::path& dir) {
  RunOutput out;
  ordered_json j = io::survival_json(o.curve);
  j["losses"] = o.curve.n0 - o.curve.n_alive.back();
  if (o.fit) {
    j["fit"] = io::fit_json(*o.fit);
    out.headline = fmt::format("tau = {:.4g} +- {:.2g} s{}", o.fit->value("tau"), o.fit->error("tau"),
                               o.fit->has_flag("no_decay") ? " (no decay)" : "");
  } else {
    j["fit_error"] = o.fit_error;
    out.headline = fmt::format("fit failed: {}", o.fit_error);
  }
  add_file(out, dir / (prefix(s) + "_survival.csv"), io::survival_csv(o.curve));
  add_file(out, dir / (prefix(s) + "_survival.json"), io::dump_json(j));
  out.summary = j;
  return out;
}

struct SweepOutcome {
  SweepOutput sweep;
  std::optional<FitResult> fit;
  std::vector<FitResult> fixed; // size sweeps: exponent -1 and -2
  std::string fit_error;
};

SweepOutcome wavelength_sweep(const Scenario& s) {
  SweepOutcome o;
  o.sweep = lifetime_vs_wavelength_sweep(s.run.wavelengths_nm, s.make_sweep());
  try {
    o.fit = fit_sigmoid(o.sweep.table);
  } catch (const FitError& e) {
    o.fit_error = e.what();
  }
  return o;
}

SweepOutcome size_sweep(const Scenario& s) {
  SweepOutcome o;
  o.sweep = lifetime_vs_size_sweep(s.run.diameters, s.make_sweep());
  try {
    o.fit = fit_powerlaw(o.sweep.table);
    for (double p : {-1.0, -2.0}) o.fixed.push_back(fit_powerlaw(o.sweep.table, PowerLawFitOptions{p}));
  } catch (const FitError& e) {
    o.fit_error = e.what();
  }
  return o;
}

RunOutput write_sweep(const Scenario& s, const SweepOutcome& o, const fs::path& dir) {
  RunOutput out;
  const bool by_wavelength = s.run.kind == ScenarioKind::WavelengthSweep;
  ordered_json j = scenario_header(s);
  j["points"] = o.sweep.table.size();
  j["failed_points"] = std::count_if(o.sweep.table.begin(), o.sweep.table.end(), [](const auto& p) { return !p.ok; });
  add_file(out, dir / (prefix(s) + "_sweep.csv"), io::lifetime_csv(o.sweep.table, by_wavelength ? "wavelength_nm" : "diameter_m"));
  if (o.fit) {
    j["fit"] = io::fit_json(*o.fit);
    if (by_wavelength) {
      add_file(out, dir / (prefix(s) + "_band.csv"), io::band_csv(*o.fit));
      out.headline = fmt::format("center = {:.2f} nm, width = {:.2f} nm, threshold = {:.2f} nm ({:.3f} eV)",
                                 o.fit->derived.at("center"), o.fit->derived.at("width"), o.fit->derived.at("threshold"),
                                 o.fit->derived.count("threshold_energy_ev") ? o.fit->derived.at("threshold_energy_ev") : NAN);
    } else {
      ordered_json fixed = ordered_json::array();
      for (const auto& f : o.fixed) fixed.push_back(io::fit_json(f));
      j["fixed_exponent_fits"] = fixed;
      out.headline = fmt::format("exponent = {:.3f} +- {:.3f}", o.fit->value("exponent"), o.fit->error("exponent"));
    }
  } else {
    j["fit_error"] = o.fit_error;
    out.headline = fmt::format("fit failed: {}", o.fit_error);
  }
  add_file(out, dir / (prefix(s) + "_sweep.json"), io::dump_json(j));
  out.summary = j;
  return out;
}

struct LatticeOutcome {
  ChargeTrajectory trajectory;
  FrequencyTrace trace;
  std::vector<ChargeCount> truth; // |charge| at each kept point
  std::optional<FitResult> fit;
  std::string fit_error;
};

std::pair<double, double> lattice_range(const Scenario& s) {
  const double lo = s.run.delta_f_min > 0.0 ? s.run.delta_f_min : 0.5 * s.run.delta_f;
  const double hi = s.run.delta_f_max > 0.0 ? s.run.delta_f_max : 1.5 * s.run.delta_f;
  return {lo, hi};
}

LatticeOutcome lattice(const Scenario& s, std::uint64_t seed) {
  LatticeOutcome o;
  o.trajectory = lattice_trajectory(s, seed);
  const auto schedule = lattice_schedule(s);
  o.trace = synthesize_frequency_trace(o.trajectory, s.run.delta_f, s.run.noise_sigma, schedule, derive_seed(seed, 1));
  o.trace.scenario = s.name;
  for (const auto& p : o.trace.points) o.truth.push_back(std::llabs(o.trajectory.charge_at(p.exposure)));
  const auto [lo, hi] = lattice_range(s);
  try {
    o.fit = fit_charge_lattice(o.trace, lo, hi);
  } catch (const FitError& e) {
    o.fit_error = e.what();
  }
  return o;
}

RunOutput write_lattice(const Scenario& s, const LatticeOutcome& o, const fs::path& dir) {
  RunOutput out;
  ordered_json j = io::frequency_json(o.trace);
  j["delta_f_true_hz"] = s.run.delta_f;
  j["noise_sigma_hz"] = s.run.noise_sigma;
  j["trajectory"] = io::trajectory_json(o.trajectory);
  if (o.fit) {
    j["fit"] = io::fit_json(*o.fit);
    j["charges_exact"] = o.fit->charges == o.truth;
    out.headline = fmt::format("delta_f = {:.4g} Hz, N0 = {}", o.fit->value("delta_f"), o.fit->charges.front());
  } else {
    j["fit_error"] = o.fit_error;
    out.headline = fmt::format("lattice fit failed: {}", o.fit_error);
  }
  add_file(out, dir / (prefix(s) + "_frequency.csv"), io::frequency_csv(o.trace));
  add_file(out, dir / (prefix(s) + "_charge.csv"), io::trajectory_csv(o.trajectory));
  add_file(out, dir / (prefix(s) + "_frequency.json"), io::dump_json(j));
  out.summary = j;
  return out;
}

struct PulsesOutcome {
  PulseExposureRun run;
  std::optional<FitResult> fit;
  std::string fit_error;
};

PulsesOutcome pulses(const Scenario& s) {
  PulsesOutcome o;
  PulseExposureOptions opts;
  opts.exposures = s.run.exposures;
  opts.electrons_per_pulse = s.run.electrons_per_pulse;
  opts.delta_f = s.run.delta_f;
  opts.noise_sigma = s.run.noise_sigma;
  o.run = simulate_pulse_exposures(s.make_particle().charge_count(), s.picker, opts, s.run.seed);
  o.run.trace.scenario = s.name;
  const auto [lo, hi] = lattice_range(s);
  try {
    o.fit = fit_charge_lattice(o.run.trace, lo, hi);
  } catch (const FitError& e) {
    o.fit_error = e.what();
  }
  return o;
}

RunOutput write_pulses(const Scenario& s, const PulsesOutcome& o, const fs::path& dir) {
  RunOutput out;
  ordered_json j = io::frequency_json(o.run.trace);
  j["delta_f_true_hz"] = s.run.delta_f;
  j["pulses_per_exposure"] = o.run.pulses;
  j["charges"] = o.run.charges;
  if (o.fit) {
    j["fit"] = io::fit_json(*o.fit);
    out.headline = fmt::format("delta_f = {:.4g} Hz, N0 = {}", o.fit->value("delta_f"), o.fit->charges.front());
  } else {
    j["fit_error"] = o.fit_error;
    out.headline = fmt::format("lattice fit failed: {}", o.fit_error);
  }
  std::string table = "exposure,pulses,charge\n";
  for (std::size_t k = 0; k < o.run.charges.size(); ++k) {
    table += fmt::format("{},{},{}\n", k, k == 0 ? 0 : o.run.pulses[k - 1], o.run.charges[k]);
  }
  add_file(out, dir / (prefix(s) + "_frequency.csv"), io::frequency_csv(o.run.trace));
  add_file(out, dir / (prefix(s) + "_exposures.csv"), table);
  add_file(out, dir / (prefix(s) + "_frequency.json"), io::dump_json(j));
  out.summary = j;
  return out;
}

RunOutput write_picker(const Scenario& s, const PulseCountStats& stats, const fs::path& dir) {
  RunOutput out;
  std::string table = "pulses,exposures\n";
  for (std::size_t n = 0; n < stats.histogram.size(); ++n) table += fmt::format("{},{}\n", n, stats.histogram[n]);
  ordered_json j = scenario_header(s);
  j["trials"] = stats.trials;
  j["mean_pulses"] = stats.mean;
  j["variance"] = stats.variance;
  j["analytic_mean_pulses"] = analytic_mean_pulses(s.picker);
  j["min_pulses"] = stats.min_count;
  j["max_pulses"] = stats.max_count;
  j["histogram"] = stats.histogram;
  add_file(out, dir / (prefix(s) + "_picker.csv"), table);
  add_file(out, dir / (prefix(s) + "_picker.json"), io::dump_json(j));
  out.summary = j;
  out.headline = fmt::format("mean pulses/exposure = {:.4f} (analytic {:.4f})", stats.mean, analytic_mean_pulses(s.picker));
  return out;
}

RunOutput run_trajectory(const Scenario& s, const fs::path& dir) {
  RunOutput out;
  const ChargeTrajectory traj = lattice_trajectory(s, s.run.seed);
  ordered_json j = scenario_header(s);
  j["trajectory"] = io::trajectory_json(traj);
  add_file(out, dir / (prefix(s) + "_charge.csv"), io::trajectory_csv(traj));
  add_file(out, dir / (prefix(s) + "_charge.json"), io::dump_json(j));
  out.summary = j;
  out.headline = fmt::format("charge {} -> {} in {} events", traj.initial_charge, traj.final_charge(), traj.events.size());
  return out;
}

RunOutput run_motion(const Scenario& s, const fs::path& dir) {
  RunOutput out;
  const Particle particle = s.make_particle();
  MotionOptions opts;
  opts.duration = s.run.motion_duration;
  opts.damping = damping_rate(particle, s.trap.pressure, s.trap.gas_temperature);
  opts.thermal_noise = s.run.thermal_noise;
  opts.gas_temperature = s.trap.gas_temperature;
  opts.seed = s.run.seed;
  opts.x0 = 1e-3 * s.trap.characteristic_radius;
  const MotionResult result = integrate_motion(particle, s.trap, opts);
  ordered_json j = scenario_header(s);
  if (const auto* lost = std::get_if<ParticleLost>(&result)) {
    j["lost"] = true;
    j["escape_time_s"] = lost->escape_time;
    j["q"] = lost->q;
    out.headline = fmt::format("particle lost at t = {:.4g} s (q = {:.3f})", lost->escape_time, lost->q);
  } else {
    const auto& trace = std::get<MotionTrace>(result);
    j = io::motion_json(trace);
    j["scenario"] = s.name;
    j["lost"] = false;
    const double f_sec = secular_frequency_from_q(trace.q, trace.drive_frequency);
    j["secular_frequency_first_order_hz"] = f_sec;
    try {
      const FrequencyEstimate est = estimate_secular_frequency(trace, 0.5 * f_sec, 1.5 * f_sec);
      j["secular_frequency_hz"] = est.found ? io::json_number(est.frequency) : ordered_json(nullptr);
      j["secular_frequency_error_hz"] = est.error;
      j["peak_snr"] = est.snr;
      out.headline = est.found ? fmt::format("secular peak {:.4g} +- {:.2g} Hz (first order {:.4g} Hz)", est.frequency, est.error, f_sec)
                               : std::string("no secular peak found");
    } catch (const std::invalid_argument& e) {
      j["secular_frequency_error"] = e.what();
      out.headline = fmt::format("trace too short for a periodogram: {}", e.what());
    }
    add_file(out, dir / (prefix(s) + "_motion.csv"), io::motion_csv(trace));
  }
  add_file(out, dir / (prefix(s) + "_motion.json"), io::dump_json(j));
  out.summary = j;
  return out;
}

// ---------------------------------------------------------------------------

Scenario bundled(std::string_view name, std::optional<std::uint64_t> seed) {
  Scenario s = load_scenario(bundled_scenario_path(name));
  if (seed) s.run.seed = *seed;
  return s;
}

Check within(std::string name, double value, double target, double tol, int digits = 3) {
  return {std::move(name), value, fmt::format("{:.{}f} +- {:.{}f}", target, digits, tol, digits),
          std::abs(value - target) <= tol};
}

Check range(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, fmt::format("[{}, {}]", lo, hi), value >= lo && value <= hi};
}

Check info(std::string name, double value, std::string note = {}) { return {std::move(name), value, std::move(note), std::nullopt}; }

void merge(Report& r, const RunOutput& out) { r.files.insert(r.files.end(), out.files.begin(), out.files.end()); }

Report reproduce_fig5(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario decay = bundled("fig5_decay", seed);
  r.seed = decay.run.seed;
  const SurvivalOutcome o = survival(decay);
  merge(r, write_survival(decay, o, dir));
  const double tau = o.fit ? o.fit->value("tau") : NAN;
  r.checks.push_back(range("fig5 fitted tau [s]", tau, 32.0, 49.0));
  r.checks.push_back(info("fig5 tau standard error [s]", o.fit ? o.fit->error("tau") : NAN, "reference 40.7 +- 0.4 s"));

  std::size_t in_band = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    Scenario s = decay;
    s.run.seed = decay.run.seed + k;
    const SurvivalOutcome ok = survival(s);
    if (ok.fit && std::abs(ok.fit->value("tau") / 40.7 - 1.0) <= 0.2) ++in_band;
  }
  r.checks.push_back({"fig5 seeded runs with tau within 20% of 40.7 s", static_cast<double>(in_band), "10 of 10", in_band == 10});

  const Scenario control = bundled("control_no_uv", seed);
  const SurvivalOutcome c = survival(control);
  merge(r, write_survival(control, c, dir));
  const double losses = static_cast<double>(c.curve.n0 - c.curve.n_alive.back());
  r.checks.push_back({"control losses without UV", losses, "0", losses == 0.0});
  r.checks.push_back({"control simulated duration [s]", c.curve.t.back(), ">= 8000", c.curve.t.back() >= 8000.0});
  return r;
}

Report reproduce_fig7(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario s = bundled("fig7", seed);
  r.seed = s.run.seed;
  const SweepOutcome o = wavelength_sweep(s);
  merge(r, write_sweep(s, o, dir));
  auto d = [&](const char* k) { return o.fit && o.fit->derived.count(k) ? o.fit->derived.at(k) : NAN; };
  r.checks.push_back(within("lifetime sigmoid center [nm]", d("center"), 280.0, 2.0, 1));
  r.checks.push_back(within("lifetime sigmoid 10-90% width [nm]", d("width"), 10.0, 2.0, 1));
  r.checks.push_back(within("high-efficiency threshold [nm]", d("threshold"), 270.0, 3.0, 1));
  r.checks.push_back(within("threshold photon energy [eV]", d("threshold_energy_ev"), 4.59, 0.05, 2));
  r.checks.push_back(within("rate lambda0 vs recovered center [nm]", s.emission.lambda0_nm - d("center"), 0.0, 5.0, 1));
  double lo = INFINITY, hi = 0.0;
  for (const auto& p : o.sweep.table) {
    if (!p.ok) continue;
    lo = std::min(lo, p.tau);
    hi = std::max(hi, p.tau);
  }
  r.checks.push_back({"lifetime span max/min", hi / lo, ">= 100", hi / lo >= 100.0});
  return r;
}

Report reproduce_fig8(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario s = bundled("fig8", seed);
  r.seed = s.run.seed;
  const SweepOutcome o = size_sweep(s);
  merge(r, write_sweep(s, o, dir));
  const double rss = o.fit ? o.fit->residual_norm : NAN;
  r.checks.push_back(within("size exponent", o.fit ? o.fit->value("exponent") : NAN, -s.emission.size_exponent, 0.15));
  r.checks.push_back({"forced d^-1 residual > free residual", o.fixed.size() == 2 ? o.fixed[0].residual_norm : NAN,
                      fmt::format("> {}", io::format_number(rss)), o.fixed.size() == 2 && o.fixed[0].residual_norm > rss});
  r.checks.push_back({"forced d^-2 residual > free residual", o.fixed.size() == 2 ? o.fixed[1].residual_norm : NAN,
                      fmt::format("> {}", io::format_number(rss)), o.fixed.size() == 2 && o.fixed[1].residual_norm > rss});
  for (double alpha : {1.0, 2.0}) {
    Scenario v = s;
    v.name = fmt::format("{}_alpha{}", s.name, alpha);
    v.emission.size_exponent = alpha;
    const SweepOutcome ov = size_sweep(v);
    merge(r, write_sweep(v, ov, dir));
    r.checks.push_back(within(fmt::format("size exponent with alpha = {}", alpha), ov.fit ? ov.fit->value("exponent") : NAN, -alpha, 0.15));
  }
  return r;
}

Report reproduce_fig9(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario s = bundled("fig9", seed);
  r.seed = s.run.seed;
  const LatticeOutcome o = lattice(s, s.run.seed);
  merge(r, write_lattice(s, o, dir));
  const double df = o.fit ? o.fit->value("delta_f") : NAN;
  r.checks.push_back(within("lattice delta_f [Hz]", df, s.run.delta_f, 0.02 * s.run.delta_f, 2));
  r.checks.push_back({"charge sequence exact", o.fit && o.fit->charges == o.truth ? 1.0 : 0.0, "1", o.fit && o.fit->charges == o.truth});
  r.checks.push_back(info("fitted initial charge", o.fit ? o.fit->derived.at("initial_charge") : NAN));
  const double rate = lattice_success_rate(s, 100);
  r.checks.push_back({"lattice success rate over 100 seeds", rate, ">= 0.95", rate >= 0.95});
  return r;
}

Report reproduce_fig10(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  // Caption arithmetic.
  const double df = 204.6, first_shift = 1750.0, exposure_ms = 12.0;
  const double electrons = first_shift / df;
  r.checks.push_back(within("first shift 1750 Hz / 204.6 Hz [e]", electrons, 8.55, 0.005, 3));
  r.checks.push_back(within("neutralization time per electron [ms]", exposure_ms / electrons, 1.40, 0.005, 3));
  const double f0 = 69.0 * df;
  const double lb_df = 3.0 * df; // smallest observed step read as one electron
  const double lb_n0 = std::round(f0 / lb_df);
  const double lb_first = std::round(electrons / 3.0);
  r.checks.push_back({"lower-bound initial charge [e]", lb_n0, "23", lb_n0 == 23.0});
  r.checks.push_back({"lower-bound first step [e]", lb_first, "3", lb_first == 3.0});
  r.checks.push_back(within("lower-bound time per electron [ms]", exposure_ms / lb_first, 4.0, 1e-9, 1));

  // Simulated trace.
  const Scenario s = bundled("fig10", seed);
  r.seed = s.run.seed;
  const LatticeOutcome o = lattice(s, s.run.seed);
  merge(r, write_lattice(s, o, dir));
  if (!o.fit || o.fit->charges.size() < 3) {
    r.checks.push_back({"simulated lattice fit", NAN, "detected", false});
    return r;
  }
  const auto& n = o.fit->charges;
  const double step_ms = s.run.exposure_step * 1e3;
  r.checks.push_back(within("simulated delta_f [Hz]", o.fit->value("delta_f"), s.run.delta_f, 0.02 * s.run.delta_f, 1));
  r.checks.push_back(info("simulated initial charge [e]", static_cast<double>(n.front())));
  r.checks.push_back(info("simulated first step [e]", static_cast<double>(n[0] - n[1])));
  // Per-electron rate from the whole trace: log-linear fit of N(t).
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] <= 0) continue;
    const double t = o.trace.points[i].exposure, y = std::log(static_cast<double>(n[i]));
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    m += 1;
  }
  const double rate = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double expected_first = static_cast<double>(n.front()) * (1.0 - std::exp(-rate * s.run.exposure_step));
  r.checks.push_back(range("first-exposure time per electron [ms]", step_ms / expected_first, 1.0, 2.0));
  r.checks.push_back(info("observed first-exposure time per electron [ms]", step_ms / static_cast<double>(n[0] - n[1])));
  ChargeCount smallest = 0;
  for (auto st : o.fit->steps) {
    const ChargeCount a = std::llabs(st);
    if (a > 0 && (smallest == 0 || a < smallest)) smallest = a;
  }
  if (smallest > 0) {
    const double k = static_cast<double>(smallest);
    r.checks.push_back(info("smallest simulated step [e]", k));
    r.checks.push_back(info("lower-bound reading: initial charge [e]", std::round(static_cast<double>(n.front()) / k)));
    r.checks.push_back(info("lower-bound reading: time per electron [ms]", step_ms / std::round(static_cast<double>(n[0] - n[1]) / k)));
  }
  return r;
}

Report reproduce_fig12(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario s = bundled("fig12", seed);
  r.seed = s.run.seed;
  const PulsesOutcome o = pulses(s);
  merge(r, write_pulses(s, o, dir));
  r.checks.push_back(within("lattice delta_f [Hz]", o.fit ? o.fit->value("delta_f") : NAN, s.run.delta_f, 0.02 * s.run.delta_f, 1));
  std::size_t single = 0, stepped = 0;
  for (std::size_t k = 0; k < o.run.pulses.size(); ++k) {
    const bool step = o.run.charges[k + 1] != o.run.charges[k];
    if (step) ++stepped;
    if (step && o.run.pulses[k] == 1) ++single;
  }
  r.checks.push_back({"single-pulse exposures with a frequency step", static_cast<double>(single), ">= 1", single >= 1});
  r.checks.push_back(info("exposures with a frequency step", static_cast<double>(stepped)));
  r.checks.push_back(info("exposures", static_cast<double>(o.run.pulses.size())));
  return r;
}

Report reproduce_picker(const fs::path& dir, std::optional<std::uint64_t> seed) {
  Report r;
  const Scenario s = bundled("picker", seed);
  r.seed = s.run.seed;
  const PulseCountStats stats = monte_carlo_pulse_count(s.picker, s.run.trials, s.run.seed);
  merge(r, write_picker(s, stats, dir));
  const double analytic = analytic_mean_pulses(s.picker);
  r.checks.push_back(info("Monte Carlo mean pulses per exposure", stats.mean, fmt::format("analytic {:.4f}", analytic)));
  r.checks.push_back(info("relative deviation from analytic", stats.mean / analytic - 1.0));
  r.checks.push_back(info("measured mean pulses per exposure", 0.7,
                          fmt::format("support [{}, {}]", stats.min_count, stats.max_count)));
  return r;
}

} // namespace

RunOutput run_scenario(const Scenario& s, const fs::path& dir) {
  switch (s.run.kind) {
  case ScenarioKind::Survival: return write_survival(s, survival(s), dir);
  case ScenarioKind::WavelengthSweep: return write_sweep(s, wavelength_sweep(s), dir);
  case ScenarioKind::SizeSweep: return write_sweep(s, size_sweep(s), dir);
  case ScenarioKind::Trajectory: return run_trajectory(s, dir);
  case ScenarioKind::Motion: return run_motion(s, dir);
  case ScenarioKind::Lattice: return write_lattice(s, lattice(s, s.run.seed), dir);
  case ScenarioKind::Pulses: return write_pulses(s, pulses(s), dir);
  case ScenarioKind::Picker: return write_picker(s, monte_carlo_pulse_count(s.picker, s.run.trials, s.run.seed), dir);
  }
  throw std::invalid_argument("unknown scenario kind");
}

ChargeTrajectory lattice_trajectory(const Scenario& s, std::uint64_t seed) {
  const Particle particle = s.make_particle();
  const double rate = emission_rate(s.emission, s.uv, particle);
  const bool negative = particle.charge_count() < 0;
  const JumpRate jumps = negative ? JumpRate::per_charge(rate) : JumpRate::constant(rate);
  double duration = s.run.duration;
  if (s.run.kind == ScenarioKind::Lattice || !(duration > 0.0)) {
    duration = s.run.exposure_step * static_cast<double>(std::max<std::size_t>(s.run.exposures, 1));
  }
  return simulate_charge_trajectory(particle, jumps, duration, negative ? ChargeDirection::Emit : ChargeDirection::Capture,
                                    derive_seed(seed, 0));
}

std::vector<double> lattice_schedule(const Scenario& s) { return exposure_schedule(0.0, s.run.exposure_step, s.run.exposures); }

double lattice_success_rate(const Scenario& scenario, std::size_t seeds, double rel_tol) {
  std::size_t ok = 0;
  for (std::size_t k = 0; k < seeds; ++k) {
    const LatticeOutcome o = lattice(scenario, scenario.run.seed + k);
    if (o.fit && std::abs(o.fit->value("delta_f") / scenario.run.delta_f - 1.0) <= rel_tol && o.fit->charges == o.truth) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(seeds);
}

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig5", "fig7", "fig8", "fig9", "fig10", "fig12", "picker"};
  return ids;
}

Report reproduce(std::string_view figure, const fs::path& out_dir, std::optional<std::uint64_t> seed) {
  const fs::path dir = out_dir / std::string(figure);
  Report r;
  if (figure == "fig5") r = reproduce_fig5(dir, seed);
  else if (figure == "fig7") r = reproduce_fig7(dir, seed);
  else if (figure == "fig8") r = reproduce_fig8(dir, seed);
  else if (figure == "fig9") r = reproduce_fig9(dir, seed);
  else if (figure == "fig10") r = reproduce_fig10(dir, seed);
  else if (figure == "fig12") r = reproduce_fig12(dir, seed);
  else if (figure == "picker") r = reproduce_picker(dir, seed);
  else throw std::invalid_argument(fmt::format("unknown figure '{}'", figure));
  r.figure = std::string(figure);
  const fs::path report = dir / (r.figure + "_report.json");
  io::write_json(report, r.json());
  r.files.push_back(report);
  return r;
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass.value_or(true); });
}

std::string Report::text() const {
  std::string out = fmt::format("reproduce {} (seed {})\n", figure, seed);
  for (const auto& c : checks) {
    const char* verdict = !c.pass ? "INFO" : (*c.pass ? "PASS" : "FAIL");
    out += fmt::format("  [{}] {}: {}{}\n", verdict, c.name, io::format_number(c.value),
                       c.expected.empty() ? std::string{} : fmt::format(" (expected {})", c.expected));
  }
  return out;
}

ordered_json Report::json() const {
  ordered_json checks_json = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json j{{"name", c.name}, {"value", io::json_number(c.value)}, {"expected", c.expected}};
    j["pass"] = c.pass ? ordered_json(*c.pass) : ordered_json(nullptr);
    checks_json.push_back(j);
  }
  ordered_json files_json = ordered_json::array();
  for (const auto& f : files) files_json.push_back(f.filename().string());
  return {{"figure", figure}, {"seed", seed}, {"passed", passed()}, {"checks", checks_json}, {"files", files_json}};
}

} // namespace ndtrap
