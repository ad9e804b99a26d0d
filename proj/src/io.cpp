#include "ndtrap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ndtrap::io {

using nlohmann::ordered_json;

ParseError::ParseError(std::string source, std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? fmt::format("{}:{}: {}", source, line, message)
                                       : fmt::format("{}:{}: {}: {}", source, line, field, message)),
      source_(std::move(source)), line_(line), field_(std::move(field)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  if (s == "inf" || s == "+inf") {
    v = INFINITY;
    return true;
  }
  if (s == "-inf") {
    v = -INFINITY;
    return true;
  }
  if (s == "nan") {
    v = NAN;
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

} // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::string::npos;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  double v = 0.0;
  if (!parse_double(rows.at(row).at(col), v)) {
    throw ParseError(source, lines[row], header.at(col), fmt::format("row {}: '{}' is not a number", row + 1, rows[row][col]));
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string source) {
  CsvTable table;
  table.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(table.source, line_no, "",
                       fmt::format("row {} has {} fields, header has {}", table.rows.size() + 1, fields.size(),
                                   table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }
  if (table.header.empty()) throw ParseError(table.source, 1, "", "empty file");
  if (table.rows.empty()) throw ParseError(table.source, line_no, "", "no data rows");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const ordered_json& j) { write_text(path, dump_json(j)); }

ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// ---------------------------------------------------------------------------

std::string motion_csv(const MotionTrace& trace) {
  std::string out = "t_s,x_m\n";
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    out += fmt::format("{},{}\n", format_number(trace.t[i]), format_number(trace.x[i]));
  }
  return out;
}

ordered_json motion_json(const MotionTrace& trace) {
  return {{"kind", "motion"},
          {"sample_rate_hz", trace.sample_rate},
          {"samples", trace.t.size()},
          {"q", trace.q},
          {"drive_frequency_hz", trace.drive_frequency},
          {"damping_per_s", trace.damping},
          {"particle_radius_m", trace.particle_radius},
          {"charge_count", trace.charge_count},
          {"thermal_noise", trace.thermal_noise},
          {"seed", trace.seed}};
}

std::string trajectory_csv(const ChargeTrajectory& traj, double start_time) {
  std::string out = "t_s,charge\n";
  out += fmt::format("{},{}\n", format_number(start_time), traj.initial_charge);
  for (const auto& e : traj.events) out += fmt::format("{},{}\n", format_number(e.t), e.charge_after);
  return out;
}

ordered_json trajectory_json(const ChargeTrajectory& traj) {
  ordered_json j{{"kind", "charge_trajectory"},
                 {"initial_charge", traj.initial_charge},
                 {"final_charge", traj.final_charge()},
                 {"events", traj.events.size()},
                 {"terminated", traj.terminated},
                 {"seed", traj.seed}};
  if (auto t = traj.termination_time()) j["termination_time_s"] = *t;
  return j;
}

std::string survival_csv(const SurvivalCurve& curve) {
  std::string out = "t_s,n_alive\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out += fmt::format("{},{}\n", format_number(curve.t[i]), curve.n_alive[i]);
  return out;
}

ordered_json survival_json(const SurvivalCurve& curve) {
  return {{"kind", "survival"},
          {"scenario", curve.scenario},
          {"n0", curve.n0},
          {"uv_on_time_s", curve.uv_on_time},
          {"wavelength_nm", curve.wavelength_nm},
          {"diameter_m", curve.diameter},
          {"frames", curve.size()},
          {"seed", curve.seed}};
}

SurvivalCurve read_survival_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw ParseError(table.source, 1, "", "expected columns t, n_alive");
  SurvivalCurve curve;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double t = table.number(r, 0);
    const double n = table.number(r, 1);
    if (!(n >= 0.0) || n != std::floor(n)) {
      throw ParseError(table.source, table.lines[r], table.header[1], fmt::format("row {}: count must be a non-negative integer", r + 1));
    }
    if (!curve.t.empty() && t < curve.t.back()) {
      throw ParseError(table.source, table.lines[r], table.header[0], fmt::format("row {}: times must be non-decreasing", r + 1));
    }
    curve.t.push_back(t);
    curve.n_alive.push_back(static_cast<std::int64_t>(n));
  }
  curve.n0 = curve.n_alive.front();
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    const auto j = nlohmann::json::parse(read_text(sidecar));
    curve.uv_on_time = j.value("uv_on_time_s", 0.0);
    curve.n0 = j.value("n0", curve.n0);
    curve.scenario = j.value("scenario", std::string{});
    curve.wavelength_nm = j.value("wavelength_nm", 0.0);
    curve.diameter = j.value("diameter_m", 0.0);
    curve.seed = j.value("seed", std::uint64_t{0});
  }
  return curve;
}

std::string frequency_csv(const FrequencyTrace& trace) {
  std::string out = trace.exposure_unit == ExposureUnit::Seconds ? "exposure_s" : "exposure_count";
  out += ",frequency_hz,frequency_error_hz\n";
  for (const auto& p : trace.points) {
    out += fmt::format("{},{},{}\n", format_number(p.exposure), format_number(p.frequency), format_number(p.frequency_error));
  }
  return out;
}

ordered_json frequency_json(const FrequencyTrace& trace) {
  return {{"kind", "frequency_trace"},
          {"scenario", trace.scenario},
          {"exposure_unit", trace.exposure_unit == ExposureUnit::Seconds ? "seconds" : "shutter_count"},
          {"points", trace.size()},
          {"charge_sign", trace.charge_sign},
          {"seed", trace.seed}};
}

FrequencyTrace read_frequency_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) throw ParseError(table.source, 1, "", "expected columns exposure, frequency[, error]");
  FrequencyTrace trace;
  if (table.header[0].find("count") != std::string::npos) trace.exposure_unit = ExposureUnit::ShutterCount;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    FrequencyPoint p;
    p.exposure = table.number(r, 0);
    p.frequency = table.number(r, 1);
    p.frequency_error = table.header.size() > 2 ? table.number(r, 2) : 0.0;
    if (!(p.frequency > 0.0)) {
      throw ParseError(table.source, table.lines[r], table.header[1], fmt::format("row {}: frequency must be positive", r + 1));
    }
    if (!(p.frequency_error >= 0.0)) {
      throw ParseError(table.source, table.lines[r], table.header[2], fmt::format("row {}: error must be >= 0", r + 1));
    }
    if (!trace.points.empty() && p.exposure < trace.points.back().exposure) {
      throw ParseError(table.source, table.lines[r], table.header[0], fmt::format("row {}: exposures must be non-decreasing", r + 1));
    }
    trace.points.push_back(p);
  }
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    const auto j = nlohmann::json::parse(read_text(sidecar));
    trace.charge_sign = j.value("charge_sign", 1);
    trace.scenario = j.value("scenario", std::string{});
    trace.seed = j.value("seed", std::uint64_t{0});
  }
  return trace;
}

std::string lifetime_csv(const LifetimeTable& table, std::string_view x_column) {
  std::string out = fmt::format("{},tau_s,tau_error_s,ok,flag\n", x_column);
  for (const auto& p : table) {
    out += fmt::format("{},{},{},{},{}\n", format_number(p.x), format_number(p.tau), format_number(p.tau_error),
                       p.ok ? 1 : 0, p.flag);
  }
  return out;
}

LifetimeTable read_lifetime_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  auto find = [&](std::initializer_list<std::string_view> names) {
    for (auto n : names) {
      if (auto c = table.column(n); c != std::string::npos) return c;
    }
    return std::string::npos;
  };
  std::size_t c_tau = find({"tau_s", "tau"});
  if (c_tau == std::string::npos) {
    if (table.header.size() < 2) throw ParseError(table.source, 1, "", "expected columns x, tau[, tau_error]");
    c_tau = 1;
  }
  std::size_t c_err = find({"tau_error_s", "tau_error"});
  if (c_err == std::string::npos && table.header.size() > 2 && c_tau == 1) c_err = 2;
  const std::size_t c_ok = table.column("ok");
  const std::size_t c_flag = table.column("flag");
  LifetimeTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    LifetimePoint p;
    p.x = table.number(r, 0);
    p.tau = table.number(r, c_tau);
    if (c_err != std::string::npos) p.tau_error = table.number(r, c_err);
    if (c_ok != std::string::npos) p.ok = table.rows[r][c_ok] != "0" && table.rows[r][c_ok] != "false";
    if (c_flag != std::string::npos) p.flag = table.rows[r][c_flag];
    out.push_back(p);
  }
  return out;
}

ordered_json fit_json(const FitResult& fit) {
  ordered_json params = ordered_json::object();
  ordered_json errors = ordered_json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = json_number(fit.parameters(static_cast<Eigen::Index>(i)));
    errors[fit.names[i]] = json_number(fit.error(fit.names[i]));
  }
  ordered_json cov = ordered_json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row.push_back(json_number(fit.covariance(r, c)));
    cov.push_back(row);
  }
  ordered_json derived = ordered_json::object();
  for (const auto& [k, v] : fit.derived) derived[k] = json_number(v);
  ordered_json j{{"parameters", params},
                 {"errors", errors},
                 {"covariance", cov},
                 {"residual_norm", json_number(fit.residual_norm)},
                 {"iterations", fit.iterations},
                 {"converged", fit.converged},
                 {"flags", fit.flags},
                 {"derived", derived}};
  if (!fit.charges.empty()) {
    j["charges"] = fit.charges;
    j["steps"] = fit.steps;
  }
  return j;
}

std::string band_csv(const FitResult& fit) {
  std::string out = "x,value,sigma\n";
  for (const auto& b : fit.confidence_band) {
    out += fmt::format("{},{},{}\n", format_number(b.x), format_number(b.value), format_number(b.sigma));
  }
  return out;
}

} // namespace ndtrap::io
