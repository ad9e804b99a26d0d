#include "ndtrap/trap.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace ndtrap {

double q_per_charge(const Particle& particle, const TrapConfig& trap) {
  const double m = particle.mass();
  if (!(m > 0.0)) throw std::domain_error("particle mass must be positive");
  const double omega = trap.angular_frequency();
  const double r0 = trap.characteristic_radius;
  return 2.0 * constants::elementary_charge * trap.voltage_amplitude * trap.geometry_factor /
         (m * omega * omega * r0 * r0);
}

double stability_parameter(const Particle& particle, const TrapConfig& trap) {
  return q_per_charge(particle, trap) * static_cast<double>(std::llabs(particle.charge_count()));
}

bool is_stable(double q, const StabilityBand& band) { return q >= band.q_min && q <= band.q_max; }

double secular_frequency_from_q(double q, double drive_frequency) {
  return q / (2.0 * std::sqrt(2.0)) * drive_frequency;
}

double secular_frequency(const Particle& particle, const TrapConfig& trap) {
  return secular_frequency_from_q(stability_parameter(particle, trap), trap.drive_frequency);
}

StabilityReport analyze_stability(const Particle& particle, const TrapConfig& trap) {
  StabilityReport r;
  r.q = stability_parameter(particle, trap);
  r.stable = is_stable(r.q, trap.band);
  r.secular_frequency = secular_frequency_from_q(r.q, trap.drive_frequency);
  r.secular_approximate = r.q >= 0.4;
  return r;
}

double damping_rate(const Particle& particle, double pressure, double gas_temperature) {
  if (pressure < 0.0) throw std::domain_error("pressure must be non-negative");
  if (!(gas_temperature > 0.0)) throw std::domain_error("gas temperature must be positive");
  if (pressure == 0.0) return 0.0;
  const double momentum_flux =
      pressure * std::sqrt(8.0 * constants::air_molecular_mass / (constants::pi * constants::boltzmann * gas_temperature));
  return constants::epstein_coefficient * momentum_flux / (particle.density() * particle.radius());
}

StableChargeRange stable_charge_range(const Particle& particle, const TrapConfig& trap) {
  const double per_charge = q_per_charge(particle, trap);
  constexpr double slack = 1e-12;
  const double lo = std::ceil(trap.band.q_min / per_charge * (1.0 - slack));
  const double hi = std::floor(trap.band.q_max / per_charge * (1.0 + slack));
  const double cap = static_cast<double>(particle.charge_cap());
  return {static_cast<ChargeCount>(std::min(std::max(lo, 1.0), cap + 1.0)),
          static_cast<ChargeCount>(std::min(hi, cap))};
}

void LinearOscillator::step(double t, double dt, double& x, double& v) const {
  auto accel = [this](double time, double pos, double vel) {
    return -damping * vel - (omega0_sq + kappa * std::cos(drive_angular * time)) * pos;
  };
  const double h2 = 0.5 * dt;
  const double k1x = v;
  const double k1v = accel(t, x, v);
  const double k2x = v + h2 * k1v;
  const double k2v = accel(t + h2, x + h2 * k1x, v + h2 * k1v);
  const double k3x = v + h2 * k2v;
  const double k3v = accel(t + h2, x + h2 * k2x, v + h2 * k2v);
  const double k4x = v + dt * k3v;
  const double k4v = accel(t + dt, x + dt * k3x, v + dt * k3v);
  x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

MotionResult integrate_mathieu(double q, double drive_frequency, const MotionOptions& options, double loss_radius,
                               double noise_accel_density) {
  if (!(options.duration > 0.0)) throw std::invalid_argument("integration duration must be positive");
  if (!(drive_frequency > 0.0)) throw std::invalid_argument("drive frequency must be positive");
  if (options.steps_per_period < 200) {
    throw std::invalid_argument("integrator needs at least 200 steps per drive period");
  }
  if (options.output_stride < 1) throw std::invalid_argument("output stride must be >= 1");

  const double omega = 2.0 * constants::pi * drive_frequency;
  const LinearOscillator osc{0.0, 0.5 * q * omega * omega, omega, options.damping};
  const double dt = 1.0 / (drive_frequency * options.steps_per_period);
  const auto n_steps = static_cast<std::int64_t>(std::ceil(options.duration / dt));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double kick = std::sqrt(noise_accel_density * dt);

  MotionTrace trace;
  trace.sample_rate = 1.0 / (dt * options.output_stride);
  trace.q = q;
  trace.drive_frequency = drive_frequency;
  trace.damping = options.damping;
  trace.thermal_noise = noise_accel_density > 0.0;
  trace.seed = options.seed;
  const auto n_samples = static_cast<std::size_t>(n_steps / options.output_stride) + 1;
  trace.t.reserve(n_samples);
  trace.x.reserve(n_samples);

  double x = options.x0;
  double v = options.v0;
  trace.t.push_back(0.0);
  trace.x.push_back(x);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    osc.step(t, dt, x, v);
    if (kick > 0.0) v += kick * normal(rng);
    if (!std::isfinite(x) || std::abs(x) > loss_radius) {
      return ParticleLost{t + dt, q};
    }
    if ((i + 1) % options.output_stride == 0) {
      trace.t.push_back(static_cast<double>(i + 1) * dt);
      trace.x.push_back(x);
    }
  }
  return trace;
}

MotionResult integrate_motion(const Particle& particle, const TrapConfig& trap, const MotionOptions& options) {
  trap.validate();
  const double q = stability_parameter(particle, trap);
  double noise = 0.0;
  if (options.thermal_noise) {
    noise = 2.0 * options.damping * constants::boltzmann * options.gas_temperature / particle.mass();
  }
  auto result = integrate_mathieu(q, trap.drive_frequency, options, 100.0 * trap.characteristic_radius, noise);
  if (auto* trace = std::get_if<MotionTrace>(&result)) {
    trace->particle_radius = particle.radius();
    trace->charge_count = particle.charge_count();
  }
  return result;
}

double mathieu_monodromy_trace(double q, int steps_per_period) {
  // Unit drive period: Omega = 2 pi.
  const double omega = 2.0 * constants::pi;
  const LinearOscillator osc{0.0, 0.5 * q * omega * omega, omega, 0.0};
  const double dt = 1.0 / steps_per_period;
  double x1 = 1.0, v1 = 0.0, x2 = 0.0, v2 = 1.0;
  for (int i = 0; i < steps_per_period; ++i) {
    const double t = i * dt;
    osc.step(t, dt, x1, v1);
    osc.step(t, dt, x2, v2);
  }
  return x1 + v2;
}

bool mathieu_stable(double q, int steps_per_period) {
  return std::abs(mathieu_monodromy_trace(q, steps_per_period)) < 2.0;
}

double find_mathieu_boundary(double lo, double hi, double tolerance, int steps_per_period) {
  if (!mathieu_stable(lo, steps_per_period) || mathieu_stable(hi, steps_per_period)) {
    throw std::invalid_argument("bisection bracket must go from stable to unstable");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mathieu_stable(mid, steps_per_period)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace ndtrap
