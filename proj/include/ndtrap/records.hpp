#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ndtrap {

/// Trapped-particle count sampled over time.
struct SurvivalCurve {
  std::vector<double> t;             // s
  std::vector<std::int64_t> n_alive; // same length as t
  std::int64_t n0 = 0;
  double uv_on_time = 0.0;

  // scenario metadata
  std::string scenario;
  double wavelength_nm = 0.0;
  double diameter = 0.0; // m
  std::uint64_t seed = 0;

  std::size_t size() const { return t.size(); }
};

enum class ExposureUnit { Seconds, ShutterCount };

struct FrequencyPoint {
  double exposure = 0.0;
  double frequency = 0.0;       // Hz
  double frequency_error = 0.0; // Hz
};

struct FrequencyTrace {
  std::vector<FrequencyPoint> points;
  ExposureUnit exposure_unit = ExposureUnit::Seconds;

  // metadata
  std::string scenario;
  int charge_sign = +1; // the frequency alone cannot tell the sign
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
};

/// One row of a lifetime sweep: x is the swept quantity (wavelength in nm,
/// or diameter in m).
struct LifetimePoint {
  double x = 0.0;
  double tau = 0.0;
  double tau_error = 0.0;
  bool ok = true;
  std::string flag;
};

using LifetimeTable = std::vector<LifetimePoint>;

} // namespace ndtrap
