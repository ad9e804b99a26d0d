#include "ndtrap/signal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fftw3.h>

namespace ndtrap {

FrequencyEstimate estimate_peak_frequency(std::span<const double> samples, double sample_rate, double band_lo,
                                          double band_hi, const PeriodogramOptions& options) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(band_lo >= 0.0 && band_hi > band_lo)) throw std::invalid_argument("search band must satisfy 0 <= lo < hi");
  if (band_hi > 0.5 * sample_rate) throw std::invalid_argument("search band exceeds the Nyquist frequency");
  if (samples.size() < 8) throw std::invalid_argument("too few samples for a periodogram");

  std::size_t n = 1;
  while (n * 2 <= samples.size()) n *= 2;
  if (static_cast<double>(n) / sample_rate * band_hi < 20.0) {
    throw std::invalid_argument("trace shorter than 20 periods of the search band");
  }

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += samples[i];
  mean /= static_cast<double>(n);

  std::vector<double> in(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n));
    in[i] = (samples[i] - mean) * w;
  }
  const std::size_t n_out = n / 2 + 1;
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_out));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> power(n_out);
  for (std::size_t k = 0; k < n_out; ++k) power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  fftw_destroy_plan(plan);
  fftw_free(out);

  const double bin = sample_rate / static_cast<double>(n);
  const auto k_lo = static_cast<std::size_t>(std::ceil(band_lo / bin));
  const auto k_hi = std::min(n_out - 1, static_cast<std::size_t>(std::floor(band_hi / bin)));
  FrequencyEstimate est;
  est.bin_width = bin;
  est.error = 0.5 * bin;
  if (k_lo > k_hi) return est;

  std::size_t k_peak = k_lo;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    if (power[k] > power[k_peak]) k_peak = k;
  }
  std::vector<double> band(power.begin() + static_cast<long>(k_lo), power.begin() + static_cast<long>(k_hi) + 1);
  std::nth_element(band.begin(), band.begin() + static_cast<long>(band.size() / 2), band.end());
  const double median = band[band.size() / 2];
  est.snr = median > 0.0 ? power[k_peak] / median : (power[k_peak] > 0.0 ? INFINITY : 0.0);

  double delta = 0.0;
  if (k_peak > 0 && k_peak + 1 < n_out && power[k_peak - 1] > 0.0 && power[k_peak + 1] > 0.0) {
    const double a = std::log(power[k_peak - 1]);
    const double b = std::log(power[k_peak]);
    const double c = std::log(power[k_peak + 1]);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  est.frequency = (static_cast<double>(k_peak) + delta) * bin;
  est.found = est.snr >= options.snr_threshold;
  return est;
}

FrequencyEstimate estimate_secular_frequency(const MotionTrace& trace, double band_lo, double band_hi,
                                             const PeriodogramOptions& options) {
  return estimate_peak_frequency(trace.x, trace.sample_rate, band_lo, band_hi, options);
}

FrequencyTrace synthesize_frequency_trace(const ChargeTrajectory& trajectory, double delta_f, double noise_sigma,
                                          const std::vector<double>& exposures, std::uint64_t seed, double offset) {
  if (!(delta_f > 0.0)) throw std::invalid_argument("delta_f must be positive");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!std::is_sorted(exposures.begin(), exposures.end())) throw std::invalid_argument("exposures must be non-decreasing");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  FrequencyTrace trace;
  trace.seed = seed;
  trace.charge_sign = trajectory.initial_charge >= 0 ? 1 : -1;
  for (double t : exposures) {
    const ChargeCount n = std::llabs(trajectory.charge_at(t));
    if (n == 0) continue; // a neutral particle has no secular motion
    const double clean = delta_f * static_cast<double>(n) + offset;
    const double f = clean + (noise_sigma > 0.0 ? noise_sigma * noise(rng) : 0.0);
    if (f > 0.0) trace.points.push_back({t, f, noise_sigma});
  }
  return trace;
}

std::vector<double> exposure_schedule(double first, double step, std::size_t count) {
  if (!(step >= 0.0)) throw std::invalid_argument("exposure step must be >= 0");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = first + step * static_cast<double>(i);
  return t;
}

PulseExposureRun simulate_pulse_exposures(ChargeCount initial_charge, const PulseTrain& train,
                                          const PulseExposureOptions& options, std::uint64_t seed) {
  train.validate();
  if (!(options.delta_f > 0.0)) throw std::invalid_argument("delta_f must be positive");
  if (!(options.electrons_per_pulse >= 0.0)) throw std::invalid_argument("electrons per pulse must be >= 0");
  if (!(options.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");

  PulseExposureRun run;
  run.trace.exposure_unit = ExposureUnit::ShutterCount;
  run.trace.charge_sign = initial_charge >= 0 ? 1 : -1;
  run.trace.seed = seed;
  std::mt19937_64 rng(derive_seed(seed, ~0ULL));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::poisson_distribution<int> emitted(options.electrons_per_pulse);

  ChargeCount charge = initial_charge;
  auto record = [&](std::size_t k) {
    const double f = options.delta_f * static_cast<double>(std::llabs(charge)) +
                     (options.noise_sigma > 0.0 ? options.noise_sigma * noise(rng) : 0.0);
    if (f > 0.0) run.trace.points.push_back({static_cast<double>(k), f, options.noise_sigma});
  };
  run.charges.push_back(charge);
  record(0);
  for (std::size_t k = 1; k <= options.exposures; ++k) {
    const int pulses = static_cast<int>(pick_pulses(train, derive_seed(seed, k)).size());
    run.pulses.push_back(pulses);
    for (int p = 0; p < pulses; ++p) {
      const ChargeCount e = options.electrons_per_pulse > 0.0 ? emitted(rng) : 0;
      if (charge < 0) charge = std::min<ChargeCount>(0, charge + e);
    }
    run.charges.push_back(charge);
    record(k);
  }
  return run;
}

} // namespace ndtrap
