#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "ndtrap/core.hpp"
#include "ndtrap/units.hpp"

using namespace ndtrap;
using doctest::Approx;

TEST_CASE("mass of a 1 um diamond sphere") {
  // 3.52e3 * 4/3 pi (0.5e-6)^3 evaluated separately
  CHECK(mass_from_radius(0.5e-6) == Approx(1.8430676901060117e-15).epsilon(1e-12));
  CHECK(mass_from_radius(0.5e-6) == Approx(1.843e-15).epsilon(1e-3));
  CHECK_THROWS_AS(mass_from_radius(0.0), std::domain_error);
  CHECK_THROWS_AS(mass_from_radius(-1e-9), std::domain_error);
}

TEST_CASE("mass is exactly cubic and monotone") {
  for (double r : {1e-8, 3.3e-7, 2e-6}) {
    CHECK(mass_from_radius(2.0 * r) == Approx(8.0 * mass_from_radius(r)).epsilon(1e-15));
    CHECK(mass_from_radius(r * 1.001) > mass_from_radius(r));
  }
  Particle p = Particle::from_diameter(1e-6, -100);
  CHECK(p.mass() == mass_from_radius(0.5e-6));
  CHECK(p.charge() == Approx(-100 * constants::elementary_charge));
}

TEST_CASE("atom counts") {
  CHECK(atom_count_from_radius(25e-9) == 11543183);
  CHECK(atom_count_from_radius(500e-9) == 92345463068);
  CHECK(static_cast<double>(atom_count_from_radius(25e-9)) == Approx(1.15e7).epsilon(0.01));
  CHECK(static_cast<double>(atom_count_from_radius(500e-9)) == Approx(9.2e10).epsilon(0.01));
  const double ratio = static_cast<double>(atom_count_from_radius(50e-9)) / atom_count_from_radius(25e-9);
  CHECK(ratio == Approx(8.0).epsilon(1e-6));
  for (double r : {25e-9, 110e-9, 500e-9}) {
    const double volume = 4.0 / 3.0 * constants::pi * r * r * r;
    CHECK(std::abs(atom_count_from_radius(r) * constants::diamond_atom_volume - volume) <=
          constants::diamond_atom_volume);
  }
  CHECK_THROWS_AS(atom_count_from_radius(0.0), std::domain_error);
}

TEST_CASE("particle invariants") {
  CHECK_THROWS(Particle(0.0, 1));
  CHECK_THROWS(Particle(1e-7, 2'000'000));
  CHECK_NOTHROW(Particle(1e-7, -1'000'000));
  Particle p(1e-7, 5);
  CHECK(p.with_charge(-3).charge_count() == -3);
  CHECK(p.with_charge(-3).radius() == p.radius());
}

TEST_CASE("charge envelope anchors") {
  CHECK(charge_envelope(37.5e-9).center_count == Approx(10.0).epsilon(1e-12));
  CHECK(charge_envelope(5e-6).center_count == Approx(1000.0).epsilon(1e-12));
  const auto e = charge_envelope(125e-9);
  CHECK(e.center_count == Approx(31.05527363094062).epsilon(1e-9));
  CHECK(e.min_count == Approx(e.center_count / 3.0));
  CHECK(e.max_count == Approx(e.center_count * 3.0));
  // charges fitted to the 250 nm particle
  CHECK(e.min_count <= 23.0);
  CHECK(e.max_count >= 69.0);
  CHECK_THROWS_AS(charge_envelope(5e-9), std::domain_error);
  CHECK_THROWS_AS(charge_envelope(25e-6), std::domain_error);
}

TEST_CASE("charge envelope ordering and monotonicity") {
  double last = 0.0;
  for (double r = 10e-9; r <= 20e-6; r *= 1.37) {
    const auto e = charge_envelope(r);
    CHECK(e.min_count <= e.center_count);
    CHECK(e.center_count <= e.max_count);
    CHECK(e.center_count > last);
    last = e.center_count;
  }
}

TEST_CASE("photon energy") {
  CHECK(photon_energy_ev(270.0) == Approx(4.592).epsilon(1e-9));
  CHECK_THROWS(photon_energy_ev(0.0));
}

TEST_CASE("uv source derived quantities") {
  UVSource s;
  s.mode = UVMode::Pulsed;
  s.wavelength_nm = 266.0;
  s.average_power = 1e-3;
  s.repetition_rate = 9.2e3;
  s.pulse_duration = 0.5e-9;
  s.spot_diameter = 100e-6;
  CHECK_NOTHROW(s.validate());
  CHECK(s.pulse_energy() == Approx(1e-3 / 9.2e3));
  const double area = constants::pi * 0.25 * 100e-6 * 100e-6;
  CHECK(s.peak_intensity() == Approx(s.pulse_energy() / (0.5e-9 * area)));
  CHECK(s.mean_intensity() == Approx(1e-3 / area));
  s.wavelength_nm = 90.0;
  CHECK_THROWS(s.validate());
}

TEST_CASE("trap config validation") {
  TrapConfig t{2250.0, 140.0, 1.0, 3e-3};
  CHECK_NOTHROW(t.validate());
  CHECK(t.angular_frequency() == Approx(2.0 * constants::pi * 140.0));
  t.band = {0.9, 0.1};
  CHECK_THROWS(t.validate());
  t.band = {0.1, 0.9};
  t.voltage_amplitude = 0.0;
  CHECK_THROWS(t.validate());
}

TEST_CASE("derive_seed is deterministic and spreads") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("units: peak-to-peak halving happens once") {
  using namespace units;
  CHECK(parse_quantity("4.5 kV P-P", Dimension::Voltage) == 2250.0);
  CHECK(parse_quantity("4.5 kVpp", Dimension::Voltage) == 2250.0);
  CHECK(parse_quantity("2250 V", Dimension::Voltage) == 2250.0);
  const double v = parse_quantity("4.5 kVpp", Dimension::Voltage);
  CHECK(parse_quantity(format_quantity(v, Dimension::Voltage), Dimension::Voltage) == v);
}

TEST_CASE("units: conversions") {
  using namespace units;
  CHECK(parse_quantity("760 Torr", Dimension::Pressure) == Approx(101325.0).epsilon(1e-14));
  CHECK(parse_quantity("1 mW/cm2", Dimension::Intensity) == Approx(10.0));
  CHECK(parse_quantity("264 nm", Dimension::Wavelength) == Approx(264.0));
  CHECK(parse_quantity("1.2 um", Dimension::Length) == Approx(1.2e-6));
  CHECK(parse_quantity("10 kHz", Dimension::Frequency) == Approx(1e4));
  CHECK(parse_quantity("12 ms", Dimension::Time) == Approx(12e-3));
  for (double torr : {1e-6, 0.2, 0.5, 760.0, 3.7e4}) {
    CHECK(std::abs(pa_to_torr(torr_to_pa(torr)) / torr - 1.0) < 1e-12);
  }
}

TEST_CASE("units: errors") {
  using namespace units;
  CHECK_THROWS_AS(parse_quantity("264", Dimension::Wavelength), UnitError);
  CHECK_THROWS_AS(parse_quantity("264 Hz", Dimension::Wavelength), UnitError);
  CHECK_THROWS_AS(parse_quantity("abc nm", Dimension::Wavelength), UnitError);
  CHECK_THROWS_AS(parse_quantity("1 nm", Dimension::Dimensionless), UnitError);
  CHECK(parse_quantity("0.0468", Dimension::Dimensionless) == Approx(0.0468));
}
