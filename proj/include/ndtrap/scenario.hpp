#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ndtrap/core.hpp"
#include "ndtrap/ensemble.hpp"
#include "ndtrap/photoemission.hpp"

namespace ndtrap {

enum class ScenarioKind {
  Survival,        // ensemble survival curve
  WavelengthSweep, // lifetime vs wavelength
  SizeSweep,       // lifetime vs diameter
  Trajectory,      // one charge trajectory
  Motion,          // integrated particle motion
  Lattice,         // charge steps sampled as a frequency trace
  Pulses,          // shutter exposures through the pulse picker
  Picker,          // Monte Carlo pulse count per exposure
};

std::string_view to_string(ScenarioKind kind);

struct ParticleSpec {
  double diameter = 1e-6; // m
  double density = constants::diamond_density;
  std::optional<ChargeCount> charge; // fixed initial charge; default draws from the envelope
  int sign = -1;
  double envelope_band = default_envelope_band;

  friend bool operator==(const ParticleSpec&, const ParticleSpec&) = default;
};

struct RunSpec {
  ScenarioKind kind = ScenarioKind::Survival;
  std::uint64_t seed = 1;

  // survival and sweeps
  std::int64_t n0 = 100;
  double duration = 0.0; // s, <= 0 automatic
  double frame_rate = 10.0;
  std::size_t frame_count = 0;
  double uv_on_time = 0.0;
  LossCriterion loss = LossCriterion::Band;
  std::vector<double> wavelengths_nm;
  std::vector<double> diameters; // m

  // frequency traces
  double delta_f = 0.0;     // Hz
  double noise_sigma = 0.0; // Hz
  double exposure_step = 0.0; // s
  std::size_t exposures = 0;
  double delta_f_min = 0.0; // lattice search range, Hz
  double delta_f_max = 0.0;
  double electrons_per_pulse = 0.0;

  // motion
  double motion_duration = 0.0; // s
  bool thermal_noise = false;

  // picker
  std::size_t trials = 10000;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct Scenario {
  std::string name;
  ParticleSpec particle;
  TrapConfig trap;
  UVSource uv;
  EmissionModel emission;
  PulseTrain picker;
  RunSpec run;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  Particle make_particle() const;
  ChargeSampler make_sampler() const;
  SurvivalRun make_survival_run() const;
  SweepScenario make_sweep() const;
};

/// INI-style text: optional top-level `name = ...`, then sections
/// [particle] [trap] [uv] [emission] [picker] [run] of `key = value unit`
/// lines. Lists take comma-separated values with the unit on the last
/// item ("75, 150, 300 nm") or a range "start:step:stop unit". '#' starts a
/// comment. Throws io::ParseError naming the line and field.
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Every field in canonical units; parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// Bundled scenario by name (file scenarios/<name>.scn).
std::filesystem::path bundled_scenario_path(std::string_view name);

} // namespace ndtrap
