// Acceptance suite: one PASS/FAIL line per criterion. Exits 1 when any
// criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "ndtrap/ensemble.hpp"
#include "ndtrap/fitters.hpp"
#include "ndtrap/io.hpp"
#include "ndtrap/photoemission.hpp"
#include "ndtrap/reproduce.hpp"
#include "ndtrap/scenario.hpp"
#include "ndtrap/signal.hpp"
#include "ndtrap/trap.hpp"

namespace fs = std::filesystem;
using namespace ndtrap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

template <class F>
void criterion(int id, const char* title, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("threw: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  fmt::print("{} {:2d} {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail, secs);
  std::fflush(stdout);
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

// Independent evaluation with the constants written out.
double hand_q() {
  const double pi = 3.14159265358979323846;
  const double e = 1.602176634e-19;
  const double d = 1e-6, rho = 3520.0;
  const double m = rho * pi / 6.0 * d * d * d;
  const double omega = 2.0 * pi * 140.0;
  return 2.0 * 100.0 * e * 2250.0 / (m * omega * omega * 3e-3 * 3e-3);
}

Outcome stability_pin() {
  const Particle p = Particle::from_diameter(1e-6, 100);
  TrapConfig t;
  t.voltage_amplitude = 2250.0;
  t.drive_frequency = 140.0;
  t.geometry_factor = 1.0;
  t.characteristic_radius = 3e-3;
  const double q = stability_parameter(p, t);
  const double ref = hand_q();
  return {near(q, 5.62, 0.01 * 5.62) && near(q, ref, 1e-9 * ref), fmt::format("q = {:.6f}, hand = {:.6f}", q, ref)};
}

Outcome iid_round_trip() {
  std::string detail;
  bool pass = true;
  for (double tau : {5.0, 40.7, 1000.0}) {
    int ok = 0;
    const int runs = 200;
    for (int k = 0; k < runs; ++k) {
      SurvivalRun r;
      r.frame_count = 400;
      r.seed = derive_seed(20240, static_cast<std::uint64_t>(k));
      const FitResult f = fit_exponential(simulate_iid_survival(100, tau, r));
      if (std::abs(f.value("tau") - tau) <= 3.0 * f.error("tau")) ++ok;
    }
    const double frac = static_cast<double>(ok) / runs;
    pass = pass && frac >= 0.95;
    detail += fmt::format("{}tau {} s: {:.3f}", detail.empty() ? "" : ", ", tau, frac);
  }
  return {pass, detail + " within 3 SE (need >= 0.95)"};
}

Outcome wavelength_round_trip() {
  const Scenario s = load_scenario(bundled_scenario_path("fig7"));
  const SweepOutput out = lifetime_vs_wavelength_sweep(s.run.wavelengths_nm, s.make_sweep());
  const FitResult f = fit_sigmoid(out.table);
  const double c = f.derived.at("center"), w = f.derived.at("width"), th = f.derived.at("threshold");
  const double ev = f.derived.at("threshold_energy_ev");
  const bool pass = near(c, 280.0, 2.0) && near(w, 10.0, 2.0) && near(th, 270.0, 3.0) && near(ev, 4.59, 0.05) &&
                    near(photon_energy_ev(270.0), 4.59, 0.005);
  return {pass, fmt::format("center {:.2f} nm, width {:.2f} nm, threshold {:.2f} nm, {:.3f} eV", c, w, th, ev)};
}

Outcome size_round_trip() {
  Scenario s = load_scenario(bundled_scenario_path("fig8"));
  const std::vector<double> d{75e-9, 150e-9, 300e-9, 600e-9, 1200e-9};
  bool same_grid = s.run.diameters.size() == d.size();
  for (std::size_t i = 0; same_grid && i < d.size(); ++i) same_grid = near(s.run.diameters[i], d[i], 1e-15);
  s.emission.size_exponent = 1.3;
  const SweepOutput out = lifetime_vs_size_sweep(d, s.make_sweep());
  const FitResult free = fit_powerlaw(out.table);
  const FitResult m1 = fit_powerlaw(out.table, {-1.0});
  const FitResult m2 = fit_powerlaw(out.table, {-2.0});
  const double p = free.value("exponent");
  const bool pass = same_grid && near(p, -1.3, 0.15) && m1.residual_norm > free.residual_norm &&
                    m2.residual_norm > free.residual_norm;
  return {pass, fmt::format("exponent {:.3f}, residuals free {:.4g} < d^-1 {:.4g}, d^-2 {:.4g}", p,
                            free.residual_norm, m1.residual_norm, m2.residual_norm)};
}

Outcome lattice_success() {
  const Scenario s = load_scenario(bundled_scenario_path("fig9"));
  const bool setup = near(s.run.delta_f, 76.4, 1e-12) && near(s.run.noise_sigma, 0.15 * 76.4, 1e-9) &&
                     near(s.particle.diameter, 250e-9, 1e-15) && near(s.trap.pressure, 0.5 * 101325.0 / 760.0, 1e-6);
  const double rate = lattice_success_rate(s, 100, 0.02);
  return {setup && rate >= 0.95, fmt::format("{:.2f} of 100 seeds exact within 2% (need >= 0.95)", rate)};
}

Outcome fast_neutralization_pins() {
  const double electrons = 1750.0 / 204.6;
  const double per_electron = 12.0 / electrons;
  const double n0_lb = std::round(69.0 * 204.6 / (3.0 * 204.6));
  const double per_electron_lb = 12.0 / std::round(electrons / 3.0);
  // the lattice fit reads the same trace either way
  const std::vector<ChargeCount> charges{69, 60, 54, 48, 45, 39, 33, 30, 24, 18};
  FrequencyTrace tr;
  for (std::size_t i = 0; i < charges.size(); ++i) tr.points.push_back({static_cast<double>(i), 204.6 * charges[i], 0.0});
  const FitResult coarse = fit_charge_lattice(tr, 400.0, 800.0);
  const bool pass = near(electrons, 8.55, 0.005) && near(per_electron, 1.40, 0.005) && n0_lb == 23.0 &&
                    near(per_electron_lb, 4.0, 1e-12) && coarse.charges.front() == 23 && coarse.steps.front() == -3;
  return {pass, fmt::format("{:.3f} e, {:.3f} ms/e; lower bound {} e, {} ms/e", electrons, per_electron, n0_lb,
                            per_electron_lb)};
}

Outcome scaling_pins() {
  const double factor = required_intensity_scaling(10e-3, 500.0);
  const double spot = spot_for_power(10e-3, 5e5) * 1e6; // 5e4 mW/cm^2 = 5e5 W/m^2
  return {factor == 50000.0 && spot >= 130.0 && spot <= 170.0,
          fmt::format("factor {}, spot {:.1f} um", factor, spot)};
}

Outcome picker() {
  const PulseTrain train;
  const auto stats = monte_carlo_pulse_count(train, 20000, 1);
  const double analytic = analytic_mean_pulses(train);
  const double rel = stats.mean / analytic - 1.0;
  const bool pass = stats.trials >= 10000 && std::abs(rel) <= 0.05 && stats.min_count <= 0.7 && stats.max_count >= 0.7;
  return {pass, fmt::format("MC mean {:.4f} vs analytic {:.4f}; 0.7 in support [{}, {}]", stats.mean, analytic,
                            stats.min_count, stats.max_count)};
}

Outcome integrator() {
  const double qb = find_mathieu_boundary();
  bool pass = near(qb, 0.908, 0.01);
  std::string detail = fmt::format("boundary {:.4f}", qb);
  for (double q : {0.1, 0.2, 0.3}) {
    const double f_drive = 1000.0;
    const double f_sec = secular_frequency_from_q(q, f_drive);
    MotionOptions o;
    o.duration = 40.0 / f_sec;
    o.x0 = 1e-6;
    const auto m = integrate_mathieu(q, f_drive, o, 1.0);
    if (!std::holds_alternative<MotionTrace>(m)) return {false, fmt::format("q = {} lost", q)};
    const auto e = estimate_secular_frequency(std::get<MotionTrace>(m), 0.5 * f_sec, 1.5 * f_sec);
    const double bins = e.found ? std::abs(e.frequency - f_sec) / e.bin_width : INFINITY;
    pass = pass && bins <= 1.0;
    detail += fmt::format(", q {} off by {:.2f} bin", q, bins);
  }
  return {pass, detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", NDTRAP_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<fs::path, std::string> snapshot(const fs::path& root) {
  std::map<fs::path, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root)] = io::read_text(e.path());
  }
  return files;
}

Outcome determinism(const fs::path& out) {
  std::vector<std::map<fs::path, std::string>> runs;
  for (const char* tag : {"a", "b"}) {
    const fs::path dir = out / "determinism" / tag;
    fs::remove_all(dir);
    const int rc = run_cli(fmt::format("reproduce all --out-dir \"{}\"", dir.string()));
    if (rc != 0 && rc != 1) return {false, fmt::format("reproduce exited {}", rc)};
    runs.push_back(snapshot(dir));
  }
  std::size_t csv = 0, json = 0;
  for (const auto& [name, _] : runs[0]) {
    if (name.extension() == ".csv") ++csv;
    if (name.extension() == ".json") ++json;
  }
  const bool same = runs[0] == runs[1];
  return {same && csv > 0 && json > 0, fmt::format("{} CSV and {} JSON files {}", csv, json,
                                                   same ? "byte-identical across two runs" : "differ")};
}

} // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ndtrap_acceptance";
  fs::create_directories(out);

  criterion(1, "stability parameter pin", stability_pin);
  criterion(2, "exponential lifetime round trip", iid_round_trip);
  criterion(3, "wavelength sweep round trip", wavelength_round_trip);
  criterion(4, "size sweep round trip", size_round_trip);
  criterion(5, "charge lattice recovery", lattice_success);
  criterion(6, "fast neutralization arithmetic", fast_neutralization_pins);
  criterion(7, "intensity scaling and spot size", scaling_pins);
  criterion(8, "pulse picker statistics", picker);
  criterion(9, "integrator validation", integrator);
  criterion(10, "reproduce determinism", [&] { return determinism(out); });

  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
