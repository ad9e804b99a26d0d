#include "ndtrap/core.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace ndtrap {
namespace {

constexpr double kEnvelopeSmallDiameter = 75e-9;
constexpr double kEnvelopeSmallCharge = 10.0;
constexpr double kEnvelopeLargeDiameter = 10e-6;
constexpr double kEnvelopeLargeCharge = 1000.0;

constexpr double kEnvelopeMinRadius = 10e-9;
constexpr double kEnvelopeMaxRadius = 20e-6;

double sphere_volume(double radius) { return 4.0 / 3.0 * constants::pi * radius * radius * radius; }

} // namespace

Particle::Particle(double radius, ChargeCount charge_count, double density, ChargeCount charge_cap)
    : radius_(radius), charge_count_(charge_count), density_(density), charge_cap_(charge_cap) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::domain_error("particle radius must be positive");
  if (!(density > 0.0)) throw std::domain_error("particle density must be positive");
  if (charge_cap <= 0) throw std::invalid_argument("charge cap must be positive");
  if (std::llabs(charge_count) > charge_cap) {
    throw std::domain_error("|charge_count| " + std::to_string(charge_count) + " exceeds cap " +
                            std::to_string(charge_cap));
  }
}

Particle Particle::from_diameter(double diameter, ChargeCount charge_count, double density) {
  return Particle(0.5 * diameter, charge_count, density);
}

double Particle::mass() const { return mass_from_radius(radius_, density_); }

Particle Particle::with_charge(ChargeCount charge_count) const {
  return Particle(radius_, charge_count, density_, charge_cap_);
}

void TrapConfig::validate() const {
  if (!(voltage_amplitude > 0.0)) throw std::invalid_argument("trap voltage amplitude must be positive");
  if (!(drive_frequency > 0.0)) throw std::invalid_argument("trap drive frequency must be positive");
  if (!(characteristic_radius > 0.0)) throw std::invalid_argument("trap characteristic radius must be positive");
  if (!(geometry_factor > 0.0)) throw std::invalid_argument("trap geometry factor must be positive");
  if (pressure < 0.0) throw std::invalid_argument("trap pressure must be non-negative");
  if (!(gas_temperature > 0.0)) throw std::invalid_argument("gas temperature must be positive");
  if (!(band.q_min > 0.0 && band.q_min < band.q_max)) {
    throw std::invalid_argument("stability band must satisfy 0 < q_min < q_max");
  }
}

void UVSource::validate() const {
  if (!(wavelength_nm >= 100.0 && wavelength_nm <= 1000.0)) {
    throw std::invalid_argument("UV wavelength must lie in [100, 1000] nm");
  }
  if (bandwidth_nm < 0.0) throw std::invalid_argument("UV bandwidth must be non-negative");
  if (intensity < 0.0 || average_power < 0.0) throw std::invalid_argument("UV power must be non-negative");
  if (mode == UVMode::Pulsed) {
    if (!(repetition_rate > 0.0)) throw std::invalid_argument("pulsed source needs a positive repetition rate");
    if (!(pulse_duration > 0.0)) throw std::invalid_argument("pulsed source needs a positive pulse duration");
    if (!(spot_diameter > 0.0)) throw std::invalid_argument("pulsed source needs a positive spot diameter");
  }
}

double UVSource::pulse_energy() const {
  if (mode != UVMode::Pulsed) return 0.0;
  return average_power / repetition_rate;
}

double UVSource::peak_intensity() const {
  if (mode != UVMode::Pulsed) return intensity;
  const double spot_area = constants::pi * 0.25 * spot_diameter * spot_diameter;
  return pulse_energy() / (pulse_duration * spot_area);
}

double UVSource::mean_intensity() const {
  if (mode != UVMode::Pulsed) return intensity;
  const double spot_area = constants::pi * 0.25 * spot_diameter * spot_diameter;
  return average_power / spot_area;
}

double mass_from_radius(double radius, double density) {
  if (!(radius > 0.0)) throw std::domain_error("radius must be positive");
  if (!(density > 0.0)) throw std::domain_error("density must be positive");
  return density * sphere_volume(radius);
}

std::int64_t atom_count_from_radius(double radius) {
  if (!(radius > 0.0)) throw std::domain_error("radius must be positive");
  return std::llround(sphere_volume(radius) / constants::diamond_atom_volume);
}

ChargeEnvelope charge_envelope(double radius, double band_factor) {
  if (!(radius >= kEnvelopeMinRadius && radius <= kEnvelopeMaxRadius)) {
    throw std::domain_error("charge envelope supports radii in [10 nm, 20 um]");
  }
  if (!(band_factor >= 1.0)) throw std::invalid_argument("envelope band factor must be >= 1");
  const double slope = std::log(kEnvelopeLargeCharge / kEnvelopeSmallCharge) /
                       std::log(kEnvelopeLargeDiameter / kEnvelopeSmallDiameter);
  const double center = kEnvelopeSmallCharge * std::pow(2.0 * radius / kEnvelopeSmallDiameter, slope);
  return {center / band_factor, center, center * band_factor};
}

double photon_energy_ev(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) throw std::domain_error("wavelength must be positive");
  return constants::hc_ev_nm / wavelength_nm;
}

} // namespace ndtrap

namespace ndtrap {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (index + 0x632be59bd9b4e019ULL));
}

} // namespace ndtrap
