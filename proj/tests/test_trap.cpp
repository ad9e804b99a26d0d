#include "doctest.h"

#include <cmath>
#include <variant>

#include "ndtrap/trap.hpp"
#include "ndtrap/units.hpp"

using namespace ndtrap;
using doctest::Approx;

namespace {

TrapConfig ring_trap() {
  TrapConfig t;
  t.voltage_amplitude = 2250.0;
  t.drive_frequency = 140.0;
  t.geometry_factor = 1.0;
  t.characteristic_radius = 3e-3;
  return t;
}

} // namespace

TEST_CASE("stability parameter pin") {
  const Particle p = Particle::from_diameter(1e-6, 100);
  // 2 * 100 e * 2250 / (m (2 pi 140)^2 (3 mm)^2), evaluated separately
  CHECK(stability_parameter(p, ring_trap()) == Approx(5.617244196376247).epsilon(1e-9));
  CHECK(stability_parameter(p, ring_trap()) == Approx(5.62).epsilon(0.01));
  CHECK(stability_parameter(p.with_charge(-100), ring_trap()) == stability_parameter(p, ring_trap()));
  CHECK(stability_parameter(p.with_charge(0), ring_trap()) == 0.0);
}

TEST_CASE("stability parameter homogeneity") {
  const Particle p = Particle::from_diameter(1e-6, 37);
  const TrapConfig t = ring_trap();
  const double q = stability_parameter(p, t);
  CHECK(stability_parameter(p.with_charge(74), t) == Approx(2.0 * q).epsilon(1e-15));
  TrapConfig tv = t;
  tv.voltage_amplitude *= 3.0;
  CHECK(stability_parameter(p, tv) == Approx(3.0 * q).epsilon(1e-15));
  TrapConfig tf = t;
  tf.drive_frequency *= 2.0;
  CHECK(stability_parameter(p, tf) == Approx(q / 4.0).epsilon(1e-15));
  Particle heavy(p.radius(), 37, 2.0 * p.density());
  CHECK(stability_parameter(heavy, t) == Approx(q / 2.0).epsilon(1e-15));
}

TEST_CASE("band check is inclusive") {
  const StabilityBand band{};
  CHECK(is_stable(0.5, band));
  CHECK_FALSE(is_stable(0.05, band));
  CHECK(is_stable(0.9, band));
  CHECK(is_stable(0.1, band));
  CHECK_FALSE(is_stable(0.9000001, band));
}

TEST_CASE("secular frequency") {
  const Particle p = Particle::from_diameter(1e-6, 1);
  TrapConfig t = ring_trap();
  t.voltage_amplitude = 200.0;
  const double f1 = secular_frequency(p, t);
  CHECK(f1 == Approx(stability_parameter(p, t) / (2.0 * std::sqrt(2.0)) * 140.0));
  CHECK(secular_frequency(p.with_charge(2), t) == Approx(2.0 * f1).epsilon(1e-15));
  CHECK(secular_frequency(p.with_charge(0), t) == 0.0);
  TrapConfig half = t;
  half.voltage_amplitude /= 2.0;
  CHECK(secular_frequency(p.with_charge(2), half) == Approx(f1).epsilon(1e-15));
}

TEST_CASE("lattice spacing 76.4 Hz gives 5271.6 Hz at 69 electrons") {
  // Choose the voltage so one electron shifts the secular frequency by 76.4 Hz.
  const Particle p = Particle::from_diameter(250e-9, 1);
  TrapConfig t;
  t.drive_frequency = 10e3;
  t.characteristic_radius = 0.5e-3;
  t.voltage_amplitude = 1.0;
  const double per_volt = secular_frequency(p, t);
  t.voltage_amplitude = 76.4 / per_volt;
  CHECK(secular_frequency(p, t) == Approx(76.4).epsilon(1e-12));
  CHECK(secular_frequency(p.with_charge(-69), t) == Approx(5271.6).epsilon(1e-12));
}

TEST_CASE("stability report flags the approximate regime") {
  const Particle p = Particle::from_diameter(1e-6, 10);
  TrapConfig t = ring_trap();
  t.voltage_amplitude = 2250.0 * 0.5 / 0.5617244196376247;
  auto r = analyze_stability(p, t);
  CHECK(r.q == Approx(0.5));
  CHECK(r.stable);
  CHECK(r.secular_approximate);
  t.voltage_amplitude /= 2.0;
  r = analyze_stability(p, t);
  CHECK_FALSE(r.secular_approximate);
  CHECK(r.secular_frequency >= 0.0);
}

TEST_CASE("Epstein damping") {
  const Particle p = Particle::from_diameter(250e-9, 0);
  CHECK(damping_rate(p, 0.0) == 0.0);
  const double g05 = damping_rate(p, units::torr_to_pa(0.5));
  // gas density times mean molecular speed, evaluated separately
  CHECK(g05 == Approx(1157.1611418888542).epsilon(1e-9));
  CHECK(damping_rate(p, units::torr_to_pa(1.0)) == Approx(2.0 * g05).epsilon(1e-14));
  CHECK_THROWS(damping_rate(p, -1.0));
}

TEST_CASE("stable charge range brackets the band") {
  const Particle p = Particle::from_diameter(1e-6, 1);
  TrapConfig t = ring_trap();
  t.geometry_factor = 0.0468;
  const auto range = stable_charge_range(p, t);
  REQUIRE_FALSE(range.empty());
  CHECK(stability_parameter(p.with_charge(range.min_count), t) >= 0.1);
  CHECK(stability_parameter(p.with_charge(range.min_count - 1), t) < 0.1);
  CHECK(stability_parameter(p.with_charge(range.max_count), t) <= 0.9);
  CHECK(stability_parameter(p.with_charge(range.max_count + 1), t) > 0.9);
}

TEST_CASE("integrator: neutral particle at rest stays at rest") {
  const Particle p = Particle::from_diameter(1e-6, 0);
  MotionOptions o;
  o.duration = 1.0;
  auto result = integrate_motion(p, ring_trap(), o);
  REQUIRE(std::holds_alternative<MotionTrace>(result));
  const auto& tr = std::get<MotionTrace>(result);
  CHECK(tr.x.size() > 100);
  for (double x : tr.x) CHECK(x == 0.0);
}

TEST_CASE("integrator: q = 5.62 is lost") {
  const Particle p = Particle::from_diameter(1e-6, 100);
  MotionOptions o;
  o.duration = 2.0;
  o.x0 = 1e-5;
  auto result = integrate_motion(p, ring_trap(), o);
  REQUIRE(std::holds_alternative<ParticleLost>(result));
  CHECK(std::get<ParticleLost>(result).escape_time > 0.0);
  CHECK(std::get<ParticleLost>(result).q == Approx(5.617244196376247).epsilon(1e-9));
}

TEST_CASE("integrator: timestamps uniform and increasing") {
  MotionOptions o;
  o.duration = 0.5;
  o.x0 = 1e-6;
  auto result = integrate_mathieu(0.3, 1000.0, o, 1.0);
  REQUIRE(std::holds_alternative<MotionTrace>(result));
  const auto& tr = std::get<MotionTrace>(result);
  const double dt = 1.0 / tr.sample_rate;
  for (std::size_t i = 1; i < tr.t.size(); ++i) {
    CHECK(tr.t[i] > tr.t[i - 1]);
    CHECK(tr.t[i] - tr.t[i - 1] == Approx(dt).epsilon(1e-9));
  }
}

TEST_CASE("integrator: harmonic energy conservation over 1e4 periods") {
  LinearOscillator osc;
  osc.omega0_sq = 4.0 * constants::pi * constants::pi;
  double x = 1.0, v = 0.0;
  const double e0 = osc.energy(x, v);
  const int steps = 400;
  const double dt = 1.0 / steps;
  for (int k = 0; k < 10000 * steps; ++k) osc.step(k * dt, dt, x, v);
  CHECK(std::abs(osc.energy(x, v) / e0 - 1.0) < 1e-6);
}

TEST_CASE("Mathieu boundary") {
  CHECK(find_mathieu_boundary() == Approx(0.908).epsilon(0.01 / 0.908));
  CHECK(mathieu_stable(0.5));
  CHECK(mathieu_stable(0.9));
  CHECK_FALSE(mathieu_stable(0.95));
}
