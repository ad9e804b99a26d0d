#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ndtrap/core.hpp"

namespace ndtrap {

struct StabilityReport {
  double q = 0.0;
  bool stable = false;
  double secular_frequency = 0.0; // Hz
  bool secular_approximate = false; // q >= 0.4: first-order formula degrades
};

/// Mathieu q = 2|Q|V eta / (m Omega^2 r0^2).
double stability_parameter(const Particle& particle, const TrapConfig& trap);

/// Inclusive band check.
bool is_stable(double q, const StabilityBand& band);

/// First-order secular frequency (q / (2 sqrt 2)) f_drive, in Hz.
double secular_frequency(const Particle& particle, const TrapConfig& trap);
double secular_frequency_from_q(double q, double drive_frequency);

StabilityReport analyze_stability(const Particle& particle, const TrapConfig& trap);

/// Epstein (free-molecular) damping rate of a sphere in room air, 1/s.
double damping_rate(const Particle& particle, double pressure, double gas_temperature = constants::room_temperature);

/// Smallest |charge_count| that keeps q >= q_min and largest that keeps
/// q <= q_max, for a particle of this size in this trap. min > max means the
/// trap cannot hold the particle at any integer charge.
struct StableChargeRange {
  ChargeCount min_count;
  ChargeCount max_count;
  bool empty() const { return min_count > max_count; }
};
StableChargeRange stable_charge_range(const Particle& particle, const TrapConfig& trap);

/// Stability parameter of a single elementary charge on this particle.
double q_per_charge(const Particle& particle, const TrapConfig& trap);

// ---------------------------------------------------------------------------
// Time-domain integration of the radial equation of motion
//
//   x'' + gamma x' + (omega0^2 + (q Omega^2 / 2) cos(Omega t)) x = xi(t)
//
// with a fixed-step RK4 integrator. omega0 is zero for a pure Paul trap and
// only used to check the integrator against the harmonic limit.

struct MotionOptions {
  double duration = 0.0;    // s
  double damping = 0.0;     // gamma, 1/s
  double x0 = 0.0;          // m
  double v0 = 0.0;          // m/s
  bool thermal_noise = false;
  double gas_temperature = constants::room_temperature;
  std::uint64_t seed = 0;
  int steps_per_period = 400; // RK4 steps per drive period, >= 200
  int output_stride = 8;      // integrator steps per output sample
};

struct MotionTrace {
  double sample_rate = 0.0; // Hz
  std::vector<double> t;
  std::vector<double> x;

  // metadata
  double q = 0.0;
  double drive_frequency = 0.0;
  double damping = 0.0;
  double particle_radius = 0.0;
  ChargeCount charge_count = 0;
  bool thermal_noise = false;
  std::uint64_t seed = 0;
};

struct ParticleLost {
  double escape_time = 0.0; // s
  double q = 0.0;
};

using MotionResult = std::variant<MotionTrace, ParticleLost>;

MotionResult integrate_motion(const Particle& particle, const TrapConfig& trap, const MotionOptions& options);

/// Same integration parameterized directly by q and the drive frequency.
/// `noise_accel_density` is the one-sided acceleration noise strength
/// 2 gamma kT / m (m^2/s^3); zero disables noise.
MotionResult integrate_mathieu(double q, double drive_frequency, const MotionOptions& options,
                               double loss_radius, double noise_accel_density = 0.0);

/// One RK4 step of x'' = -gamma x' - (omega0^2 + kappa cos(Omega t)) x.
struct LinearOscillator {
  double omega0_sq = 0.0;
  double kappa = 0.0;
  double drive_angular = 0.0;
  double damping = 0.0;

  void step(double t, double dt, double& x, double& v) const;
  double energy(double x, double v) const { return 0.5 * v * v + 0.5 * omega0_sq * x * x; }
};

/// Floquet test: trace of the one-period monodromy matrix of the undamped
/// a = 0 Mathieu equation, computed with the RK4 integrator.
double mathieu_monodromy_trace(double q, int steps_per_period = 400);
bool mathieu_stable(double q, int steps_per_period = 400);

/// Bisects the first a = 0 stability boundary inside [lo, hi].
double find_mathieu_boundary(double lo = 0.5, double hi = 1.2, double tolerance = 1e-6,
                             int steps_per_period = 400);

} // namespace ndtrap
