#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ndtrap/photoemission.hpp"
#include "ndtrap/records.hpp"
#include "ndtrap/trap.hpp"

namespace ndtrap {

struct PeriodogramOptions {
  /// Peak power over the median power in the search band.
  double snr_threshold = 30.0;
};

struct FrequencyEstimate {
  bool found = false; // false: no peak above the SNR threshold
  double frequency = 0.0; // Hz
  double error = 0.0;     // Hz, half a bin
  double snr = 0.0;
  double bin_width = 0.0; // Hz
};

/// Hann-windowed periodogram over the largest power-of-two prefix of the
/// samples, with quadratic interpolation of log power around the peak bin.
/// Throws std::invalid_argument when the band is empty or above Nyquist, or
/// when the segment cannot hold 20 periods of the highest band frequency.
FrequencyEstimate estimate_peak_frequency(std::span<const double> samples, double sample_rate, double band_lo,
                                          double band_hi, const PeriodogramOptions& options = {});

FrequencyEstimate estimate_secular_frequency(const MotionTrace& trace, double band_lo, double band_hi,
                                             const PeriodogramOptions& options = {});

/// f = delta_f |charge(t)| + offset + N(0, noise_sigma) at each exposure.
/// Exposures at which the particle is neutral, and points whose frequency
/// comes out non-positive, are dropped.
FrequencyTrace synthesize_frequency_trace(const ChargeTrajectory& trajectory, double delta_f, double noise_sigma,
                                          const std::vector<double>& exposures, std::uint64_t seed,
                                          double offset = 0.0);

/// Evenly spaced schedule: first, first + step, ..., count values.
std::vector<double> exposure_schedule(double first, double step, std::size_t count);

struct PulseExposureOptions {
  std::size_t exposures = 100;
  /// Mean electrons removed per laser pulse that reaches the particle.
  double electrons_per_pulse = 0.1;
  double delta_f = 0.0;     // Hz
  double noise_sigma = 0.0; // Hz
};

struct PulseExposureRun {
  FrequencyTrace trace;             // exposure index 0..exposures
  std::vector<int> pulses;          // pulses reaching the particle per exposure
  std::vector<ChargeCount> charges; // charge after each exposure, charges[0] initial
};

/// Repeated shutter exposures through the pulse picker. Exposure k passes
/// pick_pulses(train, derive_seed(seed, k)) pulses; each pulse removes a
/// Poisson(electrons_per_pulse) number of excess electrons, never past
/// neutral. Positive particles are left unchanged.
PulseExposureRun simulate_pulse_exposures(ChargeCount initial_charge, const PulseTrain& train,
                                          const PulseExposureOptions& options, std::uint64_t seed);

} // namespace ndtrap
