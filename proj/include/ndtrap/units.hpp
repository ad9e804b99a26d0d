#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ndtrap::units {

/// Physical dimension of a configuration quantity. Each dimension has one
/// canonical (SI, or SI-scaled where noted) unit used for storage and
/// serialization.
enum class Dimension {
  Length,        // m
  Time,          // s
  Frequency,     // Hz
  Voltage,       // V (zero-to-peak)
  Pressure,      // Pa
  Intensity,     // W/m^2
  Power,         // W
  Density,       // kg/m^3
  Rate,          // 1/s
  Wavelength,    // nm
  InverseLength, // 1/nm (sigmoid steepness)
  Temperature,   // K
  Dimensionless,
};

class UnitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string_view canonical_unit(Dimension dim);

/// Parses "<number> <unit>" into the canonical unit of `dim`. Peak-to-peak
/// voltages ("4.5 kVpp", "4.5 kV P-P") are halved here, and only here.
/// Dimensionless quantities must carry no unit; every other dimension
/// requires one.
double parse_quantity(std::string_view text, Dimension dim);

/// Inverse of parse_quantity: "<value> <canonical unit>" with round-trip
/// precision.
std::string format_quantity(double value, Dimension dim);

inline constexpr double torr_to_pa(double torr) { return torr * (101325.0 / 760.0); }
inline constexpr double pa_to_torr(double pa) { return pa / (101325.0 / 760.0); }

// 1 mW/cm^2 = 10 W/m^2
inline constexpr double mw_per_cm2_to_w_per_m2(double v) { return v * 10.0; }
inline constexpr double w_per_m2_to_mw_per_cm2(double v) { return v / 10.0; }

} // namespace ndtrap::units
