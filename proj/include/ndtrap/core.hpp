#pragma once

#include <cstdint>
#include <string_view>

#include "ndtrap/constants.hpp"

namespace ndtrap {

/// Signed number of elementary charges. Negative means excess electrons.
using ChargeCount = std::int64_t;

inline constexpr ChargeCount default_charge_cap = 1'000'000;

/// Spherical particle. Mass is always derived from radius and density.
class Particle {
public:
  Particle(double radius, ChargeCount charge_count, double density = constants::diamond_density,
           ChargeCount charge_cap = default_charge_cap);

  static Particle from_diameter(double diameter, ChargeCount charge_count,
                                double density = constants::diamond_density);

  double radius() const { return radius_; }
  double diameter() const { return 2.0 * radius_; }
  double density() const { return density_; }
  ChargeCount charge_count() const { return charge_count_; }
  ChargeCount charge_cap() const { return charge_cap_; }

  double mass() const;
  double charge() const { return static_cast<double>(charge_count_) * constants::elementary_charge; }

  Particle with_charge(ChargeCount charge_count) const;

  friend bool operator==(const Particle&, const Particle&) = default;

private:
  double radius_;
  ChargeCount charge_count_;
  double density_;
  ChargeCount charge_cap_;
};

struct StabilityBand {
  double q_min = 0.1;
  double q_max = 0.9;

  friend bool operator==(const StabilityBand&, const StabilityBand&) = default;
};

/// Paul-trap drive and geometry. The voltage is zero-to-peak; peak-to-peak
/// values are converted when parsed (see units::parse_quantity).
struct TrapConfig {
  double voltage_amplitude = 0.0;     // V
  double drive_frequency = 0.0;       // Hz
  double geometry_factor = 1.0;       // eta
  double characteristic_radius = 0.0; // r0, m
  double pressure = 0.0;              // Pa
  double gas_temperature = constants::room_temperature;
  StabilityBand band{};

  double angular_frequency() const { return 2.0 * constants::pi * drive_frequency; }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  friend bool operator==(const TrapConfig&, const TrapConfig&) = default;
};

enum class UVMode { Continuous, Pulsed };

/// Illumination source. Wavelengths are carried in nm since every model
/// parameter attached to them (sigmoid center, steepness) is quoted in nm.
struct UVSource {
  UVMode mode = UVMode::Continuous;
  double wavelength_nm = 264.0;
  double bandwidth_nm = 5.0;
  double intensity = 0.0; // W/m^2, continuous mode

  // Pulsed mode.
  double average_power = 0.0;   // W
  double repetition_rate = 0.0; // Hz
  double pulse_duration = 0.0;  // s
  double spot_diameter = 0.0;   // m

  void validate() const;

  double pulse_energy() const;   // J
  double peak_intensity() const; // W/m^2
  /// Time-averaged intensity at the particle: the continuous intensity, or
  /// average power over the spot area for pulsed sources.
  double mean_intensity() const;

  friend bool operator==(const UVSource&, const UVSource&) = default;
};

double mass_from_radius(double radius, double density = constants::diamond_density);

/// Number of carbon atoms in a sphere of the given radius, rounded.
std::int64_t atom_count_from_radius(double radius);

struct ChargeEnvelope {
  double min_count;
  double center_count;
  double max_count;
};

inline constexpr double default_envelope_band = 3.0;

/// Typical magnitude of the charge carried by a trapped particle: log-log
/// interpolation between 10 e at 75 nm and 1000 e at 10 um particle
/// diameter, widened by `band_factor` each way. Supported radii are
/// [10 nm, 20 um].
ChargeEnvelope charge_envelope(double radius, double band_factor = default_envelope_band);

/// Photon energy in eV for a wavelength in nm.
double photon_energy_ev(double wavelength_nm);

} // namespace ndtrap

namespace ndtrap {

/// Deterministic sub-seed for stream `index` of a run seeded with `master`
/// (splitmix64 finalizer over both words).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace ndtrap
