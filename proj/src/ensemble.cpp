#include "ndtrap/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ndtrap/fitters.hpp"
#include "ndtrap/trap.hpp"

namespace ndtrap {

ChargeSampler ChargeSampler::envelope(int sign, double band_factor) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("charge sign must be +1 or -1");
  if (!(band_factor >= 1.0)) throw std::invalid_argument("envelope band factor must be >= 1");
  ChargeSampler s;
  s.kind_ = Kind::Envelope;
  s.sign_ = sign;
  s.band_factor_ = band_factor;
  return s;
}

ChargeSampler ChargeSampler::log_uniform(double lo, double hi, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("charge sign must be +1 or -1");
  if (!(lo >= 1.0 && hi >= lo)) throw std::invalid_argument("log-uniform charge range must satisfy 1 <= lo <= hi");
  ChargeSampler s;
  s.kind_ = Kind::LogUniform;
  s.sign_ = sign;
  s.lo_ = lo;
  s.hi_ = hi;
  return s;
}

ChargeSampler ChargeSampler::fixed(ChargeCount charge) {
  if (charge == 0) throw std::invalid_argument("a neutral particle cannot be trapped");
  ChargeSampler s;
  s.kind_ = Kind::Fixed;
  s.sign_ = charge > 0 ? 1 : -1;
  s.fixed_ = charge;
  return s;
}

ChargeCount ChargeSampler::sample(const Particle& particle, const TrapConfig& trap, std::mt19937_64& rng) const {
  if (kind_ == Kind::Fixed) return fixed_;
  double lo = lo_, hi = hi_;
  if (kind_ == Kind::Envelope) {
    const ChargeEnvelope env = charge_envelope(particle.radius(), band_factor_);
    lo = env.min_count;
    hi = env.max_count;
  }
  const StableChargeRange band = stable_charge_range(particle, trap);
  const double lo_c = std::max({lo, static_cast<double>(band.min_count), 1.0});
  const double hi_c = std::min({hi, static_cast<double>(band.max_count), static_cast<double>(particle.charge_cap())});
  const auto n_lo = static_cast<ChargeCount>(std::ceil(lo_c));
  const auto n_hi = static_cast<ChargeCount>(std::floor(hi_c));
  if (n_lo > n_hi) throw std::domain_error("no integer charge in the sampling range is held by the trap");
  std::uniform_real_distribution<double> u(std::log(lo_c), std::log(hi_c));
  const auto n = std::clamp(static_cast<ChargeCount>(std::llround(std::exp(u(rng)))), n_lo, n_hi);
  return sign_ * n;
}

std::vector<double> frame_times(const SurvivalRun& run, double duration) {
  std::vector<double> t;
  if (run.frame_count > 0) {
    if (run.frame_count == 1) return {0.0};
    t.resize(run.frame_count);
    for (std::size_t k = 0; k < run.frame_count; ++k) {
      t[k] = duration * static_cast<double>(k) / static_cast<double>(run.frame_count - 1);
    }
    return t;
  }
  if (!(run.frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
  const auto n = static_cast<std::size_t>(std::floor(duration * run.frame_rate + 1e-9)) + 1;
  t.resize(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) / run.frame_rate;
  return t;
}

SurvivalCurve survival_from_loss_times(const std::vector<double>& loss_times, const std::vector<double>& frames,
                                       double uv_on_time) {
  std::vector<double> sorted = loss_times;
  std::sort(sorted.begin(), sorted.end());
  SurvivalCurve curve;
  curve.t = frames;
  curve.n0 = static_cast<std::int64_t>(loss_times.size());
  curve.uv_on_time = uv_on_time;
  curve.n_alive.reserve(frames.size());
  for (double t : frames) {
    const auto dead = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    curve.n_alive.push_back(curve.n0 - static_cast<std::int64_t>(dead));
  }
  return curve;
}

namespace {

double resolve_duration(const SurvivalRun& run, const std::vector<double>& loss_times) {
  if (run.duration > 0.0) return run.duration;
  double last = -1.0;
  for (double t : loss_times) {
    if (std::isfinite(t)) last = std::max(last, t - run.uv_on_time);
  }
  if (last < 0.0) return run.uv_on_time + run.fallback_duration;
  return run.uv_on_time + 1.1 * last;
}

void check_run(const SurvivalRun& run) {
  if (run.n0 < 1) throw std::invalid_argument("n0 must be >= 1");
  if (!(run.uv_on_time >= 0.0)) throw std::invalid_argument("uv_on_time must be >= 0");
  if (run.duration <= 0.0 && !(run.fallback_duration > 0.0)) {
    throw std::invalid_argument("fallback duration must be positive");
  }
}

} // namespace

SurvivalResult simulate_ensemble(const Particle& particle, const ChargeSampler& sampler, const TrapConfig& trap,
                                 const EmissionModel& model, const UVSource& source, const SurvivalRun& run) {
  check_run(run);
  trap.validate();
  source.validate();
  model.validate();

  const double q1 = q_per_charge(particle, trap);
  std::map<ChargeCount, bool> floquet_cache;
  auto held = [&](ChargeCount n) {
    const double q = q1 * static_cast<double>(std::llabs(n));
    if (run.loss == LossCriterion::Band) return is_stable(q, trap.band);
    if (q < trap.band.q_min) return false;
    auto [it, inserted] = floquet_cache.try_emplace(n, false);
    if (inserted) it->second = mathieu_stable(q);
    return it->second;
  };

  const double rate = emission_rate(model, source, particle);
  const double horizon = run.duration > 0.0 ? run.duration - run.uv_on_time : std::numeric_limits<double>::max() / 4.0;

  SurvivalResult out;
  out.initial_charges.reserve(static_cast<std::size_t>(run.n0));
  out.loss_times.reserve(static_cast<std::size_t>(run.n0));
  for (std::int64_t i = 0; i < run.n0; ++i) {
    const std::uint64_t sub = derive_seed(run.seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(derive_seed(sub, 0));
    const ChargeCount n = sampler.sample(particle, trap, rng);
    if (!held(n)) throw std::domain_error("initial charge lies outside the trap's stability band");
    out.initial_charges.push_back(n);

    double loss = std::numeric_limits<double>::infinity();
    if (n < 0 && rate > 0.0 && horizon > 0.0) {
      TrajectoryOptions opts;
      opts.start_time = run.uv_on_time;
      opts.stop_when = [&](ChargeCount c) { return !held(c); };
      const ChargeTrajectory traj = simulate_charge_trajectory(particle.with_charge(n), JumpRate::per_charge(rate),
                                                               horizon, ChargeDirection::Emit, derive_seed(sub, 1), opts);
      if (auto t = traj.termination_time()) loss = *t;
    }
    out.loss_times.push_back(loss);
  }

  const double duration = resolve_duration(run, out.loss_times);
  out.curve = survival_from_loss_times(out.loss_times, frame_times(run, duration), run.uv_on_time);
  out.curve.wavelength_nm = source.wavelength_nm;
  out.curve.diameter = particle.diameter();
  out.curve.seed = run.seed;
  return out;
}

SurvivalCurve simulate_survival(const Particle& particle, const ChargeSampler& sampler, const TrapConfig& trap,
                                const EmissionModel& model, const UVSource& source, const SurvivalRun& run) {
  return simulate_ensemble(particle, sampler, trap, model, source, run).curve;
}

SurvivalCurve simulate_iid_survival(std::int64_t n0, double tau, const SurvivalRun& run) {
  SurvivalRun r = run;
  r.n0 = n0;
  check_run(r);
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  std::mt19937_64 rng(run.seed);
  std::exponential_distribution<double> exp(1.0 / tau);
  std::vector<double> loss(static_cast<std::size_t>(n0));
  for (auto& t : loss) t = run.uv_on_time + exp(rng);
  SurvivalCurve curve = survival_from_loss_times(loss, frame_times(r, resolve_duration(r, loss)), run.uv_on_time);
  curve.seed = run.seed;
  return curve;
}

double voltage_for_q(const Particle& particle, ChargeCount charge, const TrapConfig& trap, double q) {
  if (charge == 0) throw std::invalid_argument("charge must be non-zero");
  if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
  const double omega = trap.angular_frequency();
  const double r0 = trap.characteristic_radius;
  return q * particle.mass() * omega * omega * r0 * r0 /
         (2.0 * std::abs(static_cast<double>(charge)) * constants::elementary_charge * trap.geometry_factor);
}

namespace {

LifetimePoint run_point(double x, const Particle& particle, const TrapConfig& trap, const SweepScenario& s,
                        const UVSource& source, SurvivalCurve& curve_out) {
  LifetimePoint p;
  p.x = x;
  try {
    SurvivalCurve curve = simulate_survival(particle, s.sampler, trap, s.model, source, s.run);
    const FitResult fit = fit_exponential(curve);
    p.tau = fit.value("tau");
    p.tau_error = fit.error("tau");
    if (fit.has_flag("no_decay")) {
      p.ok = false;
      p.flag = "no_decay";
    } else if (!fit.converged || !std::isfinite(p.tau_error)) {
      p.ok = false;
      p.flag = "fit_not_converged";
    }
    curve_out = std::move(curve);
  } catch (const FitError& e) {
    p.ok = false;
    p.flag = std::string(to_string(e.kind()));
  } catch (const std::domain_error& e) {
    p.ok = false;
    p.flag = "untrappable";
  }
  return p;
}

} // namespace

SweepOutput lifetime_vs_wavelength_sweep(const std::vector<double>& wavelengths_nm, const SweepScenario& scenario) {
  if (wavelengths_nm.size() < 3) throw std::invalid_argument("wavelength sweep needs >= 3 wavelengths");
  SweepOutput out;
  for (double lambda : wavelengths_nm) {
    UVSource source = scenario.source;
    source.wavelength_nm = lambda;
    SurvivalCurve curve;
    out.table.push_back(run_point(lambda, scenario.particle, scenario.trap, scenario, source, curve));
    out.curves.push_back(std::move(curve));
  }
  return out;
}

SweepOutput lifetime_vs_size_sweep(const std::vector<double>& diameters, const SweepScenario& scenario) {
  if (diameters.empty()) throw std::invalid_argument("size sweep needs at least one diameter");
  SweepOutput out;
  for (double d : diameters) {
    if (!(d > 0.0)) throw std::invalid_argument("diameters must be positive");
    const ChargeEnvelope env = charge_envelope(0.5 * d);
    const auto center = std::max<ChargeCount>(1, std::llround(env.center_count));
    const Particle particle = Particle::from_diameter(d, scenario.sampler.sign() * center, scenario.particle.density());
    TrapConfig trap = scenario.trap;
    if (scenario.retune_trap) {
      trap.voltage_amplitude = voltage_for_q(particle, center, trap, std::sqrt(trap.band.q_min * trap.band.q_max));
    }
    SurvivalCurve curve;
    out.table.push_back(run_point(d, particle, trap, scenario, scenario.source, curve));
    out.curves.push_back(std::move(curve));
  }
  return out;
}

} // namespace ndtrap
