#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ndtrap/fitters.hpp"
#include "ndtrap/photoemission.hpp"
#include "ndtrap/records.hpp"
#include "ndtrap/trap.hpp"

namespace ndtrap::io {

/// Parse failure located at a line (1-based) and, when known, a field.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& message);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines; // file line of each row

  std::size_t column(std::string_view name) const; // npos when absent
  double number(std::size_t row, std::size_t col) const;
};

/// Comma-separated, one header row, '#' comment lines and blank lines
/// skipped. Throws ParseError on an empty table or a ragged row.
CsvTable parse_csv(std::string_view text, std::string source = "<input>");
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

std::string read_text(const std::filesystem::path& path);
/// Writes the file, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view content);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
std::string dump_json(const nlohmann::ordered_json& j);

// Motion traces: t, x
std::string motion_csv(const MotionTrace& trace);
nlohmann::ordered_json motion_json(const MotionTrace& trace);

// Charge trajectories: t, charge (first row is the starting charge)
std::string trajectory_csv(const ChargeTrajectory& traj, double start_time = 0.0);
nlohmann::ordered_json trajectory_json(const ChargeTrajectory& traj);

// Survival curves: t, n_alive, with a JSON sidecar for metadata.
std::string survival_csv(const SurvivalCurve& curve);
nlohmann::ordered_json survival_json(const SurvivalCurve& curve);
/// Reads t, n_alive. n0 is the first count; uv_on_time and metadata come
/// from `<stem>.json` next to the file when present.
SurvivalCurve read_survival_csv(const std::filesystem::path& path);

// Frequency traces: exposure, frequency, frequency_error
std::string frequency_csv(const FrequencyTrace& trace);
nlohmann::ordered_json frequency_json(const FrequencyTrace& trace);
FrequencyTrace read_frequency_csv(const std::filesystem::path& path);

// Lifetime tables: <x_column>, tau, tau_error, ok, flag
std::string lifetime_csv(const LifetimeTable& table, std::string_view x_column);
/// First column is x; tau and tau_error columns found by name (tau_error
/// optional); ok and flag optional.
LifetimeTable read_lifetime_csv(const std::filesystem::path& path);

// Fits
nlohmann::ordered_json fit_json(const FitResult& fit);
std::string band_csv(const FitResult& fit);

/// Number as JSON: null for non-finite values.
nlohmann::ordered_json json_number(double v);

} // namespace ndtrap::io
