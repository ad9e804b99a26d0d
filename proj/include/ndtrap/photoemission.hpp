#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ndtrap/core.hpp"

namespace ndtrap {

/// Per-electron photoemission rate model:
///
///   rate = (I / I_ref) (d / d_ref)^alpha (R0 S(lambda) + floor)
///
/// with S the decreasing logistic 1 / (1 + exp(k (lambda - lambda0))). The
/// floor is the sub-threshold plateau; it vanishes in the dark like the rest.
struct EmissionModel {
  double lambda0_nm = 280.0;
  double steepness_per_nm = 0.43944491546724385; // 2 ln 9 / 10 nm
  double rate_scale = 1.0;                        // R0, 1/s
  double size_exponent = 1.3;                     // alpha
  double floor_rate = 0.0;                        // 1/s at I_ref, d_ref
  double reference_diameter = 1e-6;               // m
  double reference_intensity = 10.0;              // W/m^2 (1 mW/cm^2)

  /// 10%-90% width of the logistic step, (2 ln 9) / k.
  double transition_width_nm() const;
  static double steepness_for_width(double width_nm);

  double wavelength_response(double wavelength_nm) const;

  void validate() const;

  friend bool operator==(const EmissionModel&, const EmissionModel&) = default;
};

/// Per-electron jump rate (1/s) for a particle under the given source.
double emission_rate(const EmissionModel& model, const UVSource& source, const Particle& particle);

/// Jump intensity of the charge process. `rate(t, charge)` is the
/// instantaneous rate; `bound(charge)` must dominate it for all t while the
/// charge stays at that value, and is the thinning majorant.
struct JumpRate {
  std::function<double(double, ChargeCount)> rate;
  std::function<double(ChargeCount)> bound;

  static JumpRate constant(double r);
  /// r_e |charge|: each excess elementary charge leaves independently.
  static JumpRate per_charge(double rate_per_charge);
  /// Linear in time from r_start at t0 to r_end at t1, zero outside.
  static JumpRate ramp(double r_start, double r_end, double t0, double t1);
  /// Rate switched on at `t_on`.
  static JumpRate switched_on(JumpRate inner, double t_on);
};

/// Emit removes an electron (charge_count + 1); Capture adds one
/// (charge_count - 1).
enum class ChargeDirection { Emit, Capture };

struct ChargeEvent {
  double t;
  ChargeCount charge_after;

  friend bool operator==(const ChargeEvent&, const ChargeEvent&) = default;
};

struct ChargeTrajectory {
  ChargeCount initial_charge = 0;
  std::uint64_t seed = 0;
  std::vector<ChargeEvent> events;
  bool terminated = false; // stopped by the terminal condition, not the horizon

  ChargeCount final_charge() const { return events.empty() ? initial_charge : events.back().charge_after; }
  ChargeCount charge_at(double t) const;
  /// Time of the terminal event, when terminated.
  std::optional<double> termination_time() const;

  friend bool operator==(const ChargeTrajectory&, const ChargeTrajectory&) = default;
};

struct TrajectoryOptions {
  double start_time = 0.0;
  /// Charge at which the process stops. When unset, a process moving toward
  /// zero stops at neutrality and one moving away from zero never stops.
  std::optional<ChargeCount> floor;
  bool stop_at_floor = true;
  /// Extra terminal condition evaluated after every jump (e.g. trap loss).
  std::function<bool(ChargeCount)> stop_when;
};

/// Inhomogeneous Poisson jump process sampled by thinning.
ChargeTrajectory simulate_charge_trajectory(const Particle& particle, const JumpRate& rate, double duration,
                                            ChargeDirection direction, std::uint64_t seed,
                                            const TrajectoryOptions& options = {});

// ---------------------------------------------------------------------------
// Pulsed laser gated by a mechanical shutter and a slotted chopper.

struct PulsePhases {
  double shutter = 0.0; // shutter opening at shutter * chopper period
  double chopper = 0.0; // chopper windows open at (k + chopper) * chopper period
  double laser = 0.0;   // pulses at (m + laser) / repetition rate

  friend bool operator==(const PulsePhases&, const PulsePhases&) = default;
};

struct PulseTrain {
  double repetition_rate = 9.2e3; // Hz
  double pulse_duration = 0.5e-9; // s
  double shutter_open = 4e-3;     // s
  double chopper_frequency = 250.0;
  double chopper_duty = 0.013;

  void validate() const;

  double laser_period() const { return 1.0 / repetition_rate; }
  double chopper_period() const { return 1.0 / chopper_frequency; }
  double chopper_window() const { return chopper_duty / chopper_frequency; }

  friend bool operator==(const PulseTrain&, const PulseTrain&) = default;
};

/// Laser pulse times that fall inside both the shutter exposure and a
/// chopper window. Times are absolute in the phase frame above.
std::vector<double> pick_pulses(const PulseTrain& train, const PulsePhases& phases);

/// Phases drawn uniformly in [0, 1).
std::vector<double> pick_pulses(const PulseTrain& train, std::uint64_t seed);

/// Expected pulses per exposure for uniformly random phases:
/// shutter_open * duty * repetition_rate.
double analytic_mean_pulses(const PulseTrain& train);

struct PulseCountStats {
  std::size_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  int min_count = 0;
  int max_count = 0;
  std::vector<std::size_t> histogram; // histogram[n] = exposures with n pulses
};

PulseCountStats monte_carlo_pulse_count(const PulseTrain& train, std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Intensity scaling for a target neutralization time, assuming rate is
// linear in intensity.

double required_intensity_scaling(double target_time, double measured_time);

/// Beam diameter (m) that concentrates `power` (W) to `target_intensity`
/// (W/m^2): 2 sqrt(P / (pi I)).
double spot_for_power(double power, double target_intensity);

} // namespace ndtrap
