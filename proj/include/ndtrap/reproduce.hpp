#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ndtrap/scenario.hpp"

namespace ndtrap {

/// Output of running one scenario: files written plus a JSON summary.
struct RunOutput {
  nlohmann::ordered_json summary;
  std::vector<std::filesystem::path> files;
  std::string headline; // one-line human summary
};

/// Runs the scenario's kind and writes CSV + JSON under out_dir, with file
/// names prefixed by the scenario name.
RunOutput run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

struct Check {
  std::string name;
  double value = 0.0;
  std::string expected;
  /// Unset for quantities reported without a verdict.
  std::optional<bool> pass;
};

struct Report {
  std::string figure;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const;
  std::string text() const;
  nlohmann::ordered_json json() const;
};

/// fig5, fig7, fig8, fig9, fig10, fig12, picker
const std::vector<std::string>& figure_ids();

/// Runs the bundled scenarios behind a figure, fits, and compares against
/// the reference numbers. Writes data files plus <figure>_report.json into
/// out_dir/<figure>. Throws std::invalid_argument for an unknown id.
Report reproduce(std::string_view figure, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed = std::nullopt);

// Pieces shared with the acceptance suite.

/// Lattice-fit success rate of a lattice scenario over `seeds` consecutive
/// seeds starting at the scenario seed: fitted delta_f within rel_tol and
/// every charge equal to the simulated one.
double lattice_success_rate(const Scenario& scenario, std::size_t seeds, double rel_tol = 0.02);

/// Trajectory used by lattice scenarios: negative particles emit at the
/// per-electron rate, positive particles capture electrons at that rate
/// per unit time.
ChargeTrajectory lattice_trajectory(const Scenario& scenario, std::uint64_t seed);
std::vector<double> lattice_schedule(const Scenario& scenario);

} // namespace ndtrap
