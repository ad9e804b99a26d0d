#include "ndtrap/photoemission.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace ndtrap {
namespace {

const double kLn9 = std::log(9.0);

} // namespace

double EmissionModel::transition_width_nm() const { return 2.0 * kLn9 / steepness_per_nm; }

double EmissionModel::steepness_for_width(double width_nm) {
  if (!(width_nm > 0.0)) throw std::invalid_argument("transition width must be positive");
  return 2.0 * kLn9 / width_nm;
}

double EmissionModel::wavelength_response(double wavelength_nm) const {
  const double z = steepness_per_nm * (wavelength_nm - lambda0_nm);
  // Evaluate in the form that cannot overflow.
  if (z > 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void EmissionModel::validate() const {
  if (!(steepness_per_nm > 0.0)) throw std::invalid_argument("sigmoid steepness must be positive");
  if (rate_scale < 0.0) throw std::invalid_argument("rate scale must be non-negative");
  if (floor_rate < 0.0) throw std::invalid_argument("floor rate must be non-negative");
  if (!(reference_diameter > 0.0)) throw std::invalid_argument("reference diameter must be positive");
  if (!(reference_intensity > 0.0)) throw std::invalid_argument("reference intensity must be positive");
}

double emission_rate(const EmissionModel& model, const UVSource& source, const Particle& particle) {
  const double intensity_ratio = source.mean_intensity() / model.reference_intensity;
  const double size_ratio = particle.diameter() / model.reference_diameter;
  return intensity_ratio * std::pow(size_ratio, model.size_exponent) *
         (model.rate_scale * model.wavelength_response(source.wavelength_nm) + model.floor_rate);
}

JumpRate JumpRate::constant(double r) {
  return {[r](double, ChargeCount) { return r; }, [r](ChargeCount) { return r; }};
}

JumpRate JumpRate::per_charge(double rate_per_charge) {
  auto f = [rate_per_charge](ChargeCount q) { return rate_per_charge * static_cast<double>(std::llabs(q)); };
  return {[f](double, ChargeCount q) { return f(q); }, f};
}

JumpRate JumpRate::ramp(double r_start, double r_end, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("ramp needs t1 > t0");
  const double peak = std::max(r_start, r_end);
  return {[=](double t, ChargeCount) {
            if (t < t0 || t > t1) return 0.0;
            return r_start + (r_end - r_start) * (t - t0) / (t1 - t0);
          },
          [peak](ChargeCount) { return peak; }};
}

JumpRate JumpRate::switched_on(JumpRate inner, double t_on) {
  auto rate = inner.rate;
  return {[rate, t_on](double t, ChargeCount q) { return t < t_on ? 0.0 : rate(t, q); }, std::move(inner.bound)};
}

ChargeCount ChargeTrajectory::charge_at(double t) const {
  ChargeCount q = initial_charge;
  for (const auto& e : events) {
    if (e.t > t) break;
    q = e.charge_after;
  }
  return q;
}

std::optional<double> ChargeTrajectory::termination_time() const {
  if (!terminated) return std::nullopt;
  return events.empty() ? 0.0 : events.back().t;
}

ChargeTrajectory simulate_charge_trajectory(const Particle& particle, const JumpRate& rate, double duration,
                                            ChargeDirection direction, std::uint64_t seed,
                                            const TrajectoryOptions& options) {
  if (!(duration > 0.0)) throw std::invalid_argument("trajectory duration must be positive");

  ChargeTrajectory traj;
  traj.initial_charge = particle.charge_count();
  traj.seed = seed;

  const ChargeCount step = direction == ChargeDirection::Emit ? 1 : -1;
  std::optional<ChargeCount> floor = options.floor;
  if (!floor) {
    const bool toward_zero = (step > 0 && traj.initial_charge < 0) || (step < 0 && traj.initial_charge > 0);
    if (toward_zero) floor = 0;
  }
  const ChargeCount cap = particle.charge_cap();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  ChargeCount q = traj.initial_charge;
  double t = options.start_time;
  const double t_end = options.start_time + duration;
  if (options.stop_at_floor && floor && q == *floor) {
    traj.terminated = true;
    return traj;
  }

  while (true) {
    const double majorant = rate.bound(q);
    if (majorant < 0.0 || !std::isfinite(majorant)) throw std::domain_error("jump-rate bound must be finite and >= 0");
    if (majorant == 0.0) break;
    t += -std::log1p(-uniform(rng)) / majorant;
    if (t >= t_end) break;
    const double r = rate.rate(t, q);
    if (r < 0.0) throw std::domain_error("jump rate returned a negative value");
    if (r > majorant * (1.0 + 1e-12)) throw std::domain_error("jump rate exceeds its thinning bound");
    if (uniform(rng) * majorant >= r) continue;

    q += step;
    if (std::llabs(q) > cap) break;
    traj.events.push_back({t, q});
    if ((options.stop_at_floor && floor && q == *floor) || (options.stop_when && options.stop_when(q))) {
      traj.terminated = true;
      break;
    }
  }
  return traj;
}

void PulseTrain::validate() const {
  if (!(repetition_rate > 0.0 && pulse_duration > 0.0 && shutter_open > 0.0 && chopper_frequency > 0.0)) {
    throw std::invalid_argument("pulse train rates and durations must be positive");
  }
  if (!(chopper_duty > 0.0 && chopper_duty < 1.0)) throw std::invalid_argument("chopper duty must lie in (0, 1)");
}

std::vector<double> pick_pulses(const PulseTrain& train, const PulsePhases& phases) {
  train.validate();
  for (double p : {phases.shutter, phases.chopper, phases.laser}) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("pulse phases must lie in [0, 1)");
  }
  const double t_laser = train.laser_period();
  const double t_chop = train.chopper_period();
  const double window = train.chopper_window();
  const double open = phases.shutter * t_chop;
  const double close = open + train.shutter_open;

  std::vector<double> picked;
  auto m = static_cast<std::int64_t>(std::ceil(open / t_laser - phases.laser));
  for (;; ++m) {
    const double t = (static_cast<double>(m) + phases.laser) * t_laser;
    if (t >= close) break;
    if (t < open) continue;
    const double cycles = t / t_chop - phases.chopper;
    const double into_window = (cycles - std::floor(cycles)) * t_chop;
    if (into_window < window) picked.push_back(t);
  }
  return picked;
}

std::vector<double> pick_pulses(const PulseTrain& train, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PulsePhases phases;
  phases.shutter = uniform(rng);
  phases.chopper = uniform(rng);
  phases.laser = uniform(rng);
  return pick_pulses(train, phases);
}

double analytic_mean_pulses(const PulseTrain& train) {
  train.validate();
  return train.shutter_open * train.chopper_duty * train.repetition_rate;
}

PulseCountStats monte_carlo_pulse_count(const PulseTrain& train, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  PulseCountStats stats;
  stats.trials = trials;
  stats.min_count = std::numeric_limits<int>::max();
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const int n = static_cast<int>(pick_pulses(train, derive_seed(seed, i)).size());
    if (static_cast<std::size_t>(n) >= stats.histogram.size()) stats.histogram.resize(static_cast<std::size_t>(n) + 1, 0);
    ++stats.histogram[static_cast<std::size_t>(n)];
    stats.min_count = std::min(stats.min_count, n);
    stats.max_count = std::max(stats.max_count, n);
    sum += n;
    sum_sq += static_cast<double>(n) * n;
  }
  const double count = static_cast<double>(trials);
  stats.mean = sum / count;
  stats.variance = trials > 1 ? (sum_sq - sum * sum / count) / (count - 1.0) : 0.0;
  return stats;
}

double required_intensity_scaling(double target_time, double measured_time) {
  if (!(target_time > 0.0 && measured_time > 0.0)) throw std::domain_error("times must be positive");
  return measured_time / target_time;
}

double spot_for_power(double power, double target_intensity) {
  if (!(power > 0.0 && target_intensity > 0.0)) throw std::domain_error("power and intensity must be positive");
  return 2.0 * std::sqrt(power / (constants::pi * target_intensity));
}

} // namespace ndtrap
