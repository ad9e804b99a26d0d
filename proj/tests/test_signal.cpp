#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ndtrap/signal.hpp"

using namespace ndtrap;
using doctest::Approx;

namespace {

std::vector<double> sinusoid(double f, double fs, std::size_t n, double amplitude = 1.0, double phase = 0.3) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amplitude * std::sin(2.0 * constants::pi * f * i / fs + phase);
  return x;
}

} // namespace

TEST_CASE("sinusoid at 5271.6 Hz is located within a tenth of a bin") {
  const double fs = 100e3;
  const auto x = sinusoid(5271.6, fs, 1 << 15);
  const auto est = estimate_peak_frequency(x, fs, 4000.0, 6000.0);
  REQUIRE(est.found);
  CHECK(est.bin_width == Approx(fs / (1 << 15)));
  CHECK(std::abs(est.frequency - 5271.6) <= 0.1 * est.bin_width);
  CHECK(est.error == Approx(0.5 * est.bin_width));
}

TEST_CASE("white noise has no peak") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(1 << 14);
  for (auto& v : x) v = n(rng);
  const auto est = estimate_peak_frequency(x, 100e3, 1000.0, 20000.0);
  CHECK_FALSE(est.found);
}

TEST_CASE("estimate is invariant under amplitude scaling") {
  const double fs = 50e3;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.2);
  auto x = sinusoid(3123.4, fs, 1 << 14);
  for (auto& v : x) v += n(rng);
  const auto a = estimate_peak_frequency(x, fs, 2000.0, 5000.0);
  for (auto& v : x) v *= 1e-7;
  const auto b = estimate_peak_frequency(x, fs, 2000.0, 5000.0);
  REQUIRE(a.found);
  REQUIRE(b.found);
  CHECK(a.frequency == Approx(b.frequency).epsilon(1e-9));
}

TEST_CASE("periodogram preconditions") {
  const auto x = sinusoid(100.0, 1000.0, 256);
  CHECK_THROWS_AS(estimate_peak_frequency(x, 1000.0, 50.0, 600.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_peak_frequency(x, 1000.0, 60.0, 50.0), std::invalid_argument);
  // 0.256 s holds under 8 periods of 30 Hz
  CHECK_THROWS_AS(estimate_peak_frequency(x, 1000.0, 10.0, 30.0), std::invalid_argument);
}

TEST_CASE("repeated noisy estimates scatter within twice the reported error") {
  const double fs = 20e3, f = 1234.5;
  std::vector<double> est;
  double reported = 0.0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> ph(0.0, 6.283);
    auto x = sinusoid(f, fs, 1 << 13, 1.0, ph(rng));
    for (auto& v : x) v += n(rng);
    const auto e = estimate_peak_frequency(x, fs, 800.0, 2000.0);
    REQUIRE(e.found);
    est.push_back(e.frequency);
    reported = e.error;
  }
  double mean = 0.0;
  for (double v : est) mean += v;
  mean /= est.size();
  double var = 0.0;
  for (double v : est) var += (v - mean) * (v - mean);
  CHECK(std::sqrt(var / (est.size() - 1)) <= 2.0 * reported);
}

TEST_CASE("secular peak of integrated motion for q in 0.1, 0.2, 0.3") {
  for (double q : {0.1, 0.2, 0.3}) {
    const double f_drive = 1000.0;
    const double f_sec = secular_frequency_from_q(q, f_drive);
    MotionOptions o;
    o.duration = 40.0 / f_sec;
    o.x0 = 1e-6;
    auto m = integrate_mathieu(q, f_drive, o, 1.0);
    REQUIRE(std::holds_alternative<MotionTrace>(m));
    const auto e = estimate_secular_frequency(std::get<MotionTrace>(m), 0.5 * f_sec, 1.5 * f_sec);
    REQUIRE(e.found);
    CHECK(std::abs(e.frequency - f_sec) <= e.bin_width);
  }
}

TEST_CASE("synthesized trace sits on the lattice without noise") {
  const Particle p = Particle::from_diameter(250e-9, -69);
  const auto traj = simulate_charge_trajectory(p, JumpRate::constant(0.5), 20.0, ChargeDirection::Emit, 4);
  const auto sched = exposure_schedule(0.0, 1.0, 20);
  REQUIRE(sched.size() == 20);
  CHECK(sched[3] == 3.0);
  const auto tr = synthesize_frequency_trace(traj, 76.4, 0.0, sched, 1);
  REQUIRE(tr.size() == 20);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double n = tr.points[i].frequency / 76.4;
    CHECK(n == Approx(std::round(n)).epsilon(1e-12));
    CHECK(std::llabs(traj.charge_at(tr.points[i].exposure)) == static_cast<ChargeCount>(std::round(n)));
    if (i > 0) {
      const double gap = (tr.points[i - 1].frequency - tr.points[i].frequency) / 76.4;
      CHECK(gap == Approx(std::round(gap)).epsilon(1e-9));
    }
  }
}

TEST_CASE("static charge without noise gives a constant trace") {
  const Particle p = Particle::from_diameter(250e-9, 40);
  const auto traj = simulate_charge_trajectory(p, JumpRate::constant(0.0), 10.0, ChargeDirection::Capture, 1);
  const auto tr = synthesize_frequency_trace(traj, 204.6, 0.0, exposure_schedule(0.0, 0.5, 10), 2);
  for (const auto& pt : tr.points) CHECK(pt.frequency == Approx(40 * 204.6));
}

TEST_CASE("an 8.5 electron first step shifts the frequency by about 1750 Hz") {
  CHECK(8.55 * 204.6 == Approx(1750.0).epsilon(0.001));
  ChargeTrajectory traj;
  traj.initial_charge = -69;
  for (int k = 1; k <= 8; ++k) traj.events.push_back({0.001 * k, -69 + k});
  const auto tr = synthesize_frequency_trace(traj, 204.6, 0.0, {0.0, 0.012}, 1);
  CHECK(tr.points[0].frequency - tr.points[1].frequency == Approx(8 * 204.6));
}

TEST_CASE("pulse exposures: only negative particles lose electrons") {
  PulseTrain train;
  PulseExposureOptions o;
  o.exposures = 60;
  o.electrons_per_pulse = 0.8;
  o.delta_f = 204.6;
  o.noise_sigma = 0.0;
  const auto neg = simulate_pulse_exposures(-40, train, o, 5);
  REQUIRE(neg.charges.size() == 61);
  REQUIRE(neg.pulses.size() == 60);
  for (std::size_t k = 1; k < neg.charges.size(); ++k) {
    CHECK(neg.charges[k] >= neg.charges[k - 1]);
    CHECK(neg.charges[k] <= 0);
    if (neg.pulses[k - 1] == 0) CHECK(neg.charges[k] == neg.charges[k - 1]);
  }
  CHECK(neg.trace.exposure_unit == ExposureUnit::ShutterCount);
  const auto pos = simulate_pulse_exposures(40, train, o, 5);
  for (auto c : pos.charges) CHECK(c == 40);
  const auto again = simulate_pulse_exposures(-40, train, o, 5);
  CHECK(again.charges == neg.charges);
}
