#include "ndtrap/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <utility>

#include <fmt/format.h>

namespace ndtrap::units {
namespace {

struct UnitEntry {
  std::string_view name;
  double factor;
};

constexpr std::array kLength{UnitEntry{"m", 1.0}, UnitEntry{"cm", 1e-2}, UnitEntry{"mm", 1e-3},
                             UnitEntry{"um", 1e-6}, UnitEntry{"µm", 1e-6}, UnitEntry{"nm", 1e-9}};
constexpr std::array kTime{UnitEntry{"s", 1.0},  UnitEntry{"ms", 1e-3},  UnitEntry{"us", 1e-6},
                           UnitEntry{"µs", 1e-6}, UnitEntry{"ns", 1e-9}, UnitEntry{"min", 60.0},
                           UnitEntry{"h", 3600.0}};
constexpr std::array kFrequency{UnitEntry{"Hz", 1.0}, UnitEntry{"kHz", 1e3}, UnitEntry{"MHz", 1e6}};
constexpr std::array kVoltage{UnitEntry{"V", 1.0}, UnitEntry{"kV", 1e3}, UnitEntry{"mV", 1e-3}};
constexpr std::array kPressure{UnitEntry{"Pa", 1.0},
                               UnitEntry{"kPa", 1e3},
                               UnitEntry{"Torr", 101325.0 / 760.0},
                               UnitEntry{"mTorr", 101325.0 / 760.0 * 1e-3},
                               UnitEntry{"mbar", 100.0},
                               UnitEntry{"atm", 101325.0}};
constexpr std::array kIntensity{UnitEntry{"W/m2", 1.0}, UnitEntry{"W/m^2", 1.0},
                                UnitEntry{"mW/cm2", 10.0}, UnitEntry{"mW/cm^2", 10.0},
                                UnitEntry{"W/cm2", 1e4}, UnitEntry{"W/cm^2", 1e4}};
constexpr std::array kPower{UnitEntry{"W", 1.0}, UnitEntry{"mW", 1e-3}, UnitEntry{"uW", 1e-6},
                            UnitEntry{"µW", 1e-6}};
constexpr std::array kDensity{UnitEntry{"kg/m3", 1.0}, UnitEntry{"kg/m^3", 1.0},
                              UnitEntry{"g/cm3", 1e3}, UnitEntry{"g/cm^3", 1e3}};
constexpr std::array kRate{UnitEntry{"1/s", 1.0}, UnitEntry{"/s", 1.0}, UnitEntry{"s^-1", 1.0},
                           UnitEntry{"1/ms", 1e3}, UnitEntry{"1/min", 1.0 / 60.0}};
constexpr std::array kWavelength{UnitEntry{"nm", 1.0}, UnitEntry{"um", 1e3}, UnitEntry{"µm", 1e3}};
constexpr std::array kInverseLength{UnitEntry{"1/nm", 1.0}, UnitEntry{"/nm", 1.0}};
constexpr std::array kTemperature{UnitEntry{"K", 1.0}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <std::size_t N>
double lookup(const std::array<UnitEntry, N>& table, std::string_view unit, Dimension dim) {
  for (const auto& e : table) {
    if (e.name == unit) return e.factor;
  }
  throw UnitError(fmt::format("unknown unit '{}' (expected e.g. '{}')", unit, canonical_unit(dim)));
}

// Strips a peak-to-peak marker ("pp", "PP", "P-P", "p-p", "_pp") from a
// voltage unit. Returns true when one was present.
bool strip_peak_to_peak(std::string& unit) {
  std::string compact;
  for (char c : unit) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  for (std::string_view marker : {"_pp", "P-P", "p-p", "pp", "PP"}) {
    if (compact.size() > marker.size() && compact.ends_with(marker)) {
      unit = compact.substr(0, compact.size() - marker.size());
      return true;
    }
  }
  unit = compact;
  return false;
}

} // namespace

std::string_view canonical_unit(Dimension dim) {
  switch (dim) {
  case Dimension::Length: return "m";
  case Dimension::Time: return "s";
  case Dimension::Frequency: return "Hz";
  case Dimension::Voltage: return "V";
  case Dimension::Pressure: return "Pa";
  case Dimension::Intensity: return "W/m2";
  case Dimension::Power: return "W";
  case Dimension::Density: return "kg/m3";
  case Dimension::Rate: return "1/s";
  case Dimension::Wavelength: return "nm";
  case Dimension::InverseLength: return "1/nm";
  case Dimension::Temperature: return "K";
  case Dimension::Dimensionless: return "";
  }
  return "";
}

double parse_quantity(std::string_view text, Dimension dim) {
  text = trim(text);
  if (text.empty()) throw UnitError("empty quantity");

  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{}) throw UnitError(fmt::format("'{}' does not start with a number", text));
  std::string unit{trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)))};

  if (dim == Dimension::Dimensionless) {
    if (!unit.empty()) throw UnitError(fmt::format("dimensionless value carries unit '{}'", unit));
    return value;
  }
  if (unit.empty()) {
    throw UnitError(fmt::format("missing unit on '{}' (expected e.g. '{}')", text, canonical_unit(dim)));
  }

  switch (dim) {
  case Dimension::Length: return value * lookup(kLength, unit, dim);
  case Dimension::Time: return value * lookup(kTime, unit, dim);
  case Dimension::Frequency: return value * lookup(kFrequency, unit, dim);
  case Dimension::Voltage: {
    const bool pp = strip_peak_to_peak(unit);
    const double v = value * lookup(kVoltage, unit, dim);
    return pp ? 0.5 * v : v;
  }
  case Dimension::Pressure: return value * lookup(kPressure, unit, dim);
  case Dimension::Intensity: return value * lookup(kIntensity, unit, dim);
  case Dimension::Power: return value * lookup(kPower, unit, dim);
  case Dimension::Density: return value * lookup(kDensity, unit, dim);
  case Dimension::Rate: return value * lookup(kRate, unit, dim);
  case Dimension::Wavelength: return value * lookup(kWavelength, unit, dim);
  case Dimension::InverseLength: return value * lookup(kInverseLength, unit, dim);
  case Dimension::Temperature: return value * lookup(kTemperature, unit, dim);
  case Dimension::Dimensionless: break;
  }
  return value;
}

std::string format_quantity(double value, Dimension dim) {
  if (dim == Dimension::Dimensionless) return fmt::format("{}", value);
  return fmt::format("{} {}", value, canonical_unit(dim));
}

} // namespace ndtrap::units
