#pragma once

// Physical constants and fixed material data. SI throughout.

namespace ndtrap::constants {

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double boltzmann = 1.380649e-23;             // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg

inline constexpr double diamond_density = 3.52e3;       // kg/m^3
inline constexpr double diamond_atom_volume = 5.67e-30; // m^3 per carbon atom

// Photon energy E[eV] = hc / lambda[nm].
inline constexpr double hc_ev_nm = 1239.84;

inline constexpr double pascal_per_torr = 101325.0 / 760.0;

inline constexpr double air_molecular_mass = 28.97 * atomic_mass_unit;
inline constexpr double room_temperature = 295.0; // K

// Free-molecular drag coefficient for diffuse reflection with full accommodation.
inline constexpr double epstein_coefficient = 1.0 + pi / 8.0;

} // namespace ndtrap::constants
