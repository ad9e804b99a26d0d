#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <fmt/format.h>

#include "json.hpp"
#include "ndtrap/io.hpp"
#include "ndtrap/scenario.hpp"

namespace fs = std::filesystem;
using namespace ndtrap;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "ndtrap_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", NDTRAP_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(io::read_text(p)); }

std::string data_file(const char* name) { return (fs::path(NDTRAP_DATA_DIR) / name).string(); }

} // namespace

TEST_CASE("cli: usage errors exit 2") {
  CHECK(cli("") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("fit") == 2);
  CHECK(cli("fit wobble " + data_file("fig9_steps.csv")) == 2);
  CHECK(cli("simulate no_such_scenario") == 2);
  CHECK(cli("--help") == 0);
}

TEST_CASE("cli: missing and empty inputs exit 2") {
  const fs::path dir = scratch("inputs");
  CHECK(cli(fmt::format("fit exp {}", (dir / "missing.csv").string())) == 2);
  io::write_text(dir / "empty.csv", "");
  CHECK(cli(fmt::format("fit exp {} --out-dir {}", (dir / "empty.csv").string(), dir.string())) == 2);
  io::write_text(dir / "bad.scn", "[trap]\nvoltage = 1\n");
  CHECK(cli(fmt::format("simulate --config {} --out-dir {}", (dir / "bad.scn").string(), dir.string())) == 2);
}

TEST_CASE("cli: a trace with no lattice exits 1") {
  const fs::path dir = scratch("nolattice");
  std::string csv = "exposure_s,frequency_hz,frequency_error_hz\n";
  // golden-ratio spacing never settles on a lattice
  for (int i = 0; i < 200; ++i) csv += fmt::format("{},{},0\n", i, 1000.0 + std::fmod(i * 1618.0339887, 2000.0));
  io::write_text(dir / "noise.csv", csv);
  CHECK(cli(fmt::format("fit lattice {} --range 200 300 --out-dir {}", (dir / "noise.csv").string(), dir.string())) ==
        1);
}

TEST_CASE("cli: simulate is byte-identical per seed") {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  REQUIRE(cli(fmt::format("simulate fig9 --out-dir {}", a.string())) == 0);
  REQUIRE(cli(fmt::format("simulate fig9 --out-dir {}", b.string())) == 0);
  REQUIRE(cli(fmt::format("simulate fig9 --seed 99 --out-dir {}", c.string())) == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    const auto name = entry.path().filename();
    CHECK(io::read_text(entry.path()) == io::read_text(b / name));
  }
  CHECK(files >= 1);
  CHECK(io::read_text(a / "fig9_frequency.csv") != io::read_text(c / "fig9_frequency.csv"));
}

TEST_CASE("cli: fit the bundled step trace and sweep") {
  const fs::path dir = scratch("fits");
  REQUIRE(cli(fmt::format("fit lattice {} --range 30 300 --out-dir {}", data_file("fig9_steps.csv"), dir.string())) ==
          0);
  const auto lattice = load_json(dir / "fig9_steps_lattice_fit.json");
  CHECK(std::abs(lattice["parameters"]["delta_f"].get<double>() / 76.4 - 1.0) <= 0.02);

  REQUIRE(cli(fmt::format("fit sigmoid {} --out-dir {}", data_file("fig7_sweep.csv"), dir.string())) == 0);
  const auto sig = load_json(dir / "fig7_sweep_sigmoid_fit.json");
  CHECK(std::abs(sig["derived"]["center"].get<double>() - 280.0) <= 2.0);
  CHECK(fs::exists(dir / "fig7_sweep_sigmoid_band.csv"));
}

TEST_CASE("cli: survival scenarios") {
  const fs::path dir = scratch("survival");
  REQUIRE(cli(fmt::format("simulate fig5_decay --out-dir {}", dir.string())) == 0);
  const double tau = load_json(dir / "fig5_decay_survival.json")["fit"]["parameters"]["tau"].get<double>();
  CHECK(tau >= 32.0);
  CHECK(tau <= 49.0);
  REQUIRE(cli(fmt::format("fit exp {} --out-dir {}", (dir / "fig5_decay_survival.csv").string(), dir.string())) == 0);
  const double refit = load_json(dir / "fig5_decay_survival_exp_fit.json")["parameters"]["tau"].get<double>();
  CHECK(refit == doctest::Approx(tau).epsilon(1e-6));

  REQUIRE(cli(fmt::format("simulate control_no_uv --out-dir {}", dir.string())) == 0);
  const auto control = load_json(dir / "control_no_uv_survival.json");
  CHECK(control["losses"].get<int>() == 0);
  CHECK(control["fit"]["parameters"]["tau"].is_null());
}
