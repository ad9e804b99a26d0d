#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ndtrap/core.hpp"
#include "ndtrap/photoemission.hpp"
#include "ndtrap/records.hpp"

namespace ndtrap {

/// Distribution of initial charge magnitudes. The envelope sampler draws
/// log-uniformly over charge_envelope restricted to the charges the trap can
/// hold (particles outside the band would never have been loaded).
class ChargeSampler {
public:
  static ChargeSampler envelope(int sign = -1, double band_factor = default_envelope_band);
  static ChargeSampler log_uniform(double lo, double hi, int sign = -1);
  static ChargeSampler fixed(ChargeCount charge);

  /// Throws std::domain_error when the admissible range is empty.
  ChargeCount sample(const Particle& particle, const TrapConfig& trap, std::mt19937_64& rng) const;

  int sign() const { return sign_; }

private:
  enum class Kind { Envelope, LogUniform, Fixed };
  Kind kind_ = Kind::Envelope;
  int sign_ = -1;
  double lo_ = 0.0, hi_ = 0.0;
  double band_factor_ = default_envelope_band;
  ChargeCount fixed_ = 0;
};

enum class LossCriterion {
  Band,       // q leaves [q_min, q_max]
  Integrated, // Floquet stability of the integrated Mathieu equation, plus q >= q_min
};

struct SurvivalRun {
  std::int64_t n0 = 100;
  /// Total duration in s. <= 0 picks 1.1x the last loss time after UV onset.
  double duration = 0.0;
  double frame_rate = 10.0;    // samples/s, used when frame_count is 0
  std::size_t frame_count = 0; // fixed number of frames spanning the duration
  double uv_on_time = 0.0;     // s
  LossCriterion loss = LossCriterion::Band;
  std::uint64_t seed = 0;
  /// Duration used in automatic mode when nothing is lost.
  double fallback_duration = 1000.0;
};

struct SurvivalResult {
  SurvivalCurve curve;
  std::vector<ChargeCount> initial_charges;
  std::vector<double> loss_times; // +inf for survivors
};

/// Each particle runs an independent charge trajectory seeded by
/// derive_seed(run.seed, i). Negative particles lose excess electrons at
/// the per-electron emission rate once UV is on; positive particles carry
/// no excess electrons and are not discharged. A particle dies the first
/// time its q fails the loss criterion.
SurvivalResult simulate_ensemble(const Particle& particle, const ChargeSampler& sampler, const TrapConfig& trap,
                                 const EmissionModel& model, const UVSource& source, const SurvivalRun& run);

SurvivalCurve simulate_survival(const Particle& particle, const ChargeSampler& sampler, const TrapConfig& trap,
                                const EmissionModel& model, const UVSource& source, const SurvivalRun& run);

/// Frame times for a run of the given duration.
std::vector<double> frame_times(const SurvivalRun& run, double duration);

/// Samples survivor counts i.e. #{loss_time > t} at each frame.
SurvivalCurve survival_from_loss_times(const std::vector<double>& loss_times, const std::vector<double>& frames,
                                       double uv_on_time);

/// Loss times drawn directly as uv_on_time + Exponential(1/tau), bypassing
/// the physics. Used to validate the lifetime estimator.
SurvivalCurve simulate_iid_survival(std::int64_t n0, double tau, const SurvivalRun& run);

/// Drive voltage that puts `charge` on this particle at the given q.
double voltage_for_q(const Particle& particle, ChargeCount charge, const TrapConfig& trap, double q);

struct SweepScenario {
  Particle particle{0.5e-6, -114};
  ChargeSampler sampler = ChargeSampler::envelope();
  TrapConfig trap{};
  EmissionModel model{};
  UVSource source{};
  SurvivalRun run{};
  /// Size sweeps: re-tune the drive voltage at each diameter so the
  /// envelope center sits at sqrt(q_min q_max).
  bool retune_trap = true;
};

struct SweepOutput {
  LifetimeTable table;
  std::vector<SurvivalCurve> curves; // one per point, empty when the point failed
};

/// Same seed at every point (common random numbers), so points differ only
/// through the swept parameter. Failed points are flagged, not fatal.
SweepOutput lifetime_vs_wavelength_sweep(const std::vector<double>& wavelengths_nm, const SweepScenario& scenario);
SweepOutput lifetime_vs_size_sweep(const std::vector<double>& diameters, const SweepScenario& scenario);

} // namespace ndtrap
