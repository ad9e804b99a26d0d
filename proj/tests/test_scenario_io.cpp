#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "ndtrap/io.hpp"
#include "ndtrap/scenario.hpp"

using namespace ndtrap;
using doctest::Approx;

namespace {

const char* kScenarios[] = {"control_no_uv", "fig5_decay", "fig7", "fig8", "fig9", "fig10", "fig12", "picker"};

// Expects a ParseError and returns it for inspection.
io::ParseError parse_error(const std::string& text) {
  try {
    parse_scenario(text, "t.scn");
  } catch (const io::ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return io::ParseError("", 0, "", "");
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ndtrap_io_" + name);
}

} // namespace

TEST_CASE("bundled scenarios survive a serialize/parse round trip") {
  for (const char* name : kScenarios) {
    CAPTURE(name);
    const Scenario s = load_scenario(bundled_scenario_path(name));
    CHECK(s.name == name);
    const std::string text = serialize_scenario(s);
    const Scenario back = parse_scenario(text);
    CHECK(back == s);
    CHECK(serialize_scenario(back) == text);
  }
}

TEST_CASE("scenario units are converted to SI") {
  const Scenario s = parse_scenario(
      "[particle]\ndiameter = 250 nm\n[trap]\nvoltage = 1 kVpp\nfrequency = 10 kHz\nr0 = 0.5 mm\n"
      "pressure = 0.5 Torr\n[run]\nwavelengths = 250:10:270 nm\n");
  CHECK(s.particle.diameter == Approx(250e-9));
  CHECK(s.trap.voltage_amplitude == Approx(500.0));
  CHECK(s.trap.drive_frequency == Approx(1e4));
  CHECK(s.trap.characteristic_radius == Approx(0.5e-3));
  CHECK(s.trap.pressure == Approx(0.5 * 101325.0 / 760.0));
  REQUIRE(s.run.wavelengths_nm.size() == 3);
  CHECK(s.run.wavelengths_nm[2] == Approx(270.0));
}

TEST_CASE("scenario errors name the line and field") {
  auto e = parse_error("[trap]\nvoltage = 1 kVpp\nfrobnicate = 3\n");
  CHECK(e.line() == 3);
  CHECK(e.field() == "trap.frobnicate");

  e = parse_error("[trap]\nvoltage = 1 kVpp\n\nvoltage = 2 kVpp\n");
  CHECK(e.line() == 4);
  CHECK(e.field() == "trap.voltage");

  e = parse_error("# header\n[laser]\n");
  CHECK(e.line() == 2);
  CHECK(e.field() == "laser");

  e = parse_error("[particle]\ndiameter = 250\n");
  CHECK(e.line() == 2);
  CHECK(e.field() == "particle.diameter");

  e = parse_error("[particle]\ndiameter = 250 parsecs\n");
  CHECK(e.field() == "particle.diameter");

  e = parse_error("[run]\nkind = teleport\n");
  CHECK(e.field() == "run.kind");

  e = parse_error("[run]\nn0\n");
  CHECK(e.line() == 2);
  CHECK(e.source() == "t.scn");
}

TEST_CASE("csv parsing") {
  const auto t = io::parse_csv("# comment\na,b\n1,2\n\n3,4\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == std::string::npos);
  CHECK(t.number(1, 0) == 3.0);
  CHECK(t.lines[1] == 5);

  try {
    io::parse_csv("a,b\n1,2\n3\n", "r.csv");
    FAIL("expected ragged row error");
  } catch (const io::ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.source() == "r.csv");
  }
  CHECK_THROWS_AS(io::parse_csv(""), io::ParseError);
  CHECK_THROWS_AS(io::parse_csv("# only a comment\n\n"), io::ParseError);
  CHECK_THROWS_AS(io::read_csv(temp_file("does_not_exist.csv")), std::exception);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 76.4, 1.0 / 3.0, 5.617244196376247, 1e-300, -2.5e17}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
  CHECK(io::format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::format_number(std::nan("")) == "nan");
  CHECK(io::json_number(std::nan("")).is_null());
}

TEST_CASE("frequency trace csv round trip") {
  FrequencyTrace tr;
  for (int i = 0; i < 5; ++i) tr.points.push_back({3.5 * i, 76.4 * (32 - i) + 0.1 * i, 11.46});
  const auto path = temp_file("freq.csv");
  io::write_text(path, io::frequency_csv(tr));
  const FrequencyTrace back = io::read_frequency_csv(path);
  REQUIRE(back.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(back.points[i].exposure == tr.points[i].exposure);
    CHECK(back.points[i].frequency == tr.points[i].frequency);
    CHECK(back.points[i].frequency_error == tr.points[i].frequency_error);
  }
  std::filesystem::remove(path);
}

TEST_CASE("lifetime table csv round trip") {
  LifetimeTable t{{264.0, 4.0, 0.2, true, ""}, {300.0, 900.0, 50.0, false, "no_decay"}};
  const auto path = temp_file("life.csv");
  io::write_text(path, io::lifetime_csv(t, "wavelength_nm"));
  const LifetimeTable back = io::read_lifetime_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].x == 264.0);
  CHECK(back[1].tau_error == 50.0);
  CHECK_FALSE(back[1].ok);
  CHECK(back[1].flag == "no_decay");
  std::filesystem::remove(path);
}
