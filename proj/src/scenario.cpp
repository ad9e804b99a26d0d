#include "ndtrap/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>

#include "ndtrap/io.hpp"
#include "ndtrap/units.hpp"

namespace ndtrap {

using units::Dimension;

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
  case ScenarioKind::Survival: return "survival";
  case ScenarioKind::WavelengthSweep: return "wavelength_sweep";
  case ScenarioKind::SizeSweep: return "size_sweep";
  case ScenarioKind::Trajectory: return "trajectory";
  case ScenarioKind::Motion: return "motion";
  case ScenarioKind::Lattice: return "lattice";
  case ScenarioKind::Pulses: return "pulses";
  case ScenarioKind::Picker: return "picker";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Thrown by field parsers; re-thrown with location by the driver.
struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::int64_t parse_integer(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const char* b = s.data();
  if (!s.empty() && s.front() == '+') ++b;
  const auto res = std::from_chars(b, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FieldError(fmt::format("'{}' is not an integer", s));
  return v;
}

std::size_t parse_count(std::string_view s) {
  const auto v = parse_integer(s);
  if (v < 0) throw FieldError("count must be >= 0");
  return static_cast<std::size_t>(v);
}

double parse_unitless(std::string_view s) { return units::parse_quantity(s, Dimension::Dimensionless); }

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw FieldError(fmt::format("'{}' is not a boolean", s));
}

// "a, b, c unit" (unit on the last item applies to bare items) or
// "start:step:stop unit".
std::vector<double> parse_list(std::string_view s, Dimension dim) {
  s = trim(s);
  if (s.empty()) return {};
  if (s.find(':') != std::string_view::npos) {
    const auto sp = s.find_first_of(" \t");
    const std::string_view range = s.substr(0, sp);
    const std::string unit = sp == std::string_view::npos ? std::string{} : std::string(trim(s.substr(sp)));
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = range.find(':', start);
      const std::string item(range.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
      parts.push_back(units::parse_quantity(unit.empty() ? item : item + " " + unit, dim));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) throw FieldError("range must be start:step:stop");
    const double a = parts[0], step = parts[1], b = parts[2];
    if (!(step > 0.0) || b < a) throw FieldError("range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + step * static_cast<double>(i);
    return out;
  }
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    items.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::string trailing_unit;
  if (dim != Dimension::Dimensionless) {
    const auto sp = items.back().find_first_of(" \t");
    if (sp != std::string::npos) trailing_unit = std::string(trim(std::string_view(items.back()).substr(sp)));
  }
  std::vector<double> out;
  for (const auto& item : items) {
    const bool bare = item.find_first_of(" \t") == std::string::npos;
    out.push_back(units::parse_quantity(bare && !trailing_unit.empty() ? item + " " + trailing_unit : item, dim));
  }
  return out;
}

std::string format_list(const std::vector<double>& v, Dimension dim) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += units::format_quantity(v[i], dim);
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(Scenario&, std::string_view)> parse;
  std::function<std::optional<std::string>(const Scenario&)> emit;
};

template <class Get>
Field quantity(std::string section, std::string key, Dimension dim, Get get) {
  return {std::move(section), std::move(key),
          [dim, get](Scenario& s, std::string_view v) { get(s) = units::parse_quantity(v, dim); },
          [dim, get](const Scenario& s) -> std::optional<std::string> {
            return units::format_quantity(get(const_cast<Scenario&>(s)), dim);
          }};
}

template <class Get>
Field count(std::string section, std::string key, Get get) {
  return {std::move(section), std::move(key),
          [get](Scenario& s, std::string_view v) { get(s) = static_cast<std::remove_reference_t<decltype(get(s))>>(parse_count(v)); },
          [get](const Scenario& s) -> std::optional<std::string> {
            return fmt::format("{}", get(const_cast<Scenario&>(s)));
          }};
}

template <class Get>
Field list(std::string section, std::string key, Dimension dim, Get get) {
  return {std::move(section), std::move(key),
          [dim, get](Scenario& s, std::string_view v) { get(s) = parse_list(v, dim); },
          [dim, get](const Scenario& s) -> std::optional<std::string> {
            const auto& v = get(const_cast<Scenario&>(s));
            if (v.empty()) return std::nullopt;
            return format_list(v, dim);
          }};
}

const std::map<std::string, ScenarioKind>& kind_names() {
  static const std::map<std::string, ScenarioKind> names{
      {"survival", ScenarioKind::Survival}, {"wavelength_sweep", ScenarioKind::WavelengthSweep},
      {"size_sweep", ScenarioKind::SizeSweep}, {"trajectory", ScenarioKind::Trajectory},
      {"motion", ScenarioKind::Motion}, {"lattice", ScenarioKind::Lattice},
      {"pulses", ScenarioKind::Pulses}, {"picker", ScenarioKind::Picker}};
  return names;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"", "name", [](Scenario& s, std::string_view v) { s.name = std::string(trim(v)); },
                 [](const Scenario& s) -> std::optional<std::string> {
                   if (s.name.empty()) return std::nullopt;
                   return s.name;
                 }});

    f.push_back(quantity("particle", "diameter", Dimension::Length, [](Scenario& s) -> double& { return s.particle.diameter; }));
    f.push_back(quantity("particle", "density", Dimension::Density, [](Scenario& s) -> double& { return s.particle.density; }));
    f.push_back({"particle", "sign",
                 [](Scenario& s, std::string_view v) {
                   v = trim(v);
                   if (v == "negative" || v == "-") s.particle.sign = -1;
                   else if (v == "positive" || v == "+") s.particle.sign = 1;
                   else throw FieldError("sign must be 'negative' or 'positive'");
                 },
                 [](const Scenario& s) -> std::optional<std::string> {
                   return std::string(s.particle.sign < 0 ? "negative" : "positive");
                 }});
    f.push_back({"particle", "charge",
                 [](Scenario& s, std::string_view v) {
                   const auto c = parse_integer(v);
                   if (c == 0) throw FieldError("charge must be non-zero");
                   s.particle.charge = c;
                 },
                 [](const Scenario& s) -> std::optional<std::string> {
                   if (!s.particle.charge) return std::nullopt;
                   return fmt::format("{}", *s.particle.charge);
                 }});
    f.push_back({"particle", "envelope_band",
                 [](Scenario& s, std::string_view v) { s.particle.envelope_band = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.particle.envelope_band); }});

    f.push_back(quantity("trap", "voltage", Dimension::Voltage, [](Scenario& s) -> double& { return s.trap.voltage_amplitude; }));
    f.push_back(quantity("trap", "frequency", Dimension::Frequency, [](Scenario& s) -> double& { return s.trap.drive_frequency; }));
    f.push_back({"trap", "eta", [](Scenario& s, std::string_view v) { s.trap.geometry_factor = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.trap.geometry_factor); }});
    f.push_back(quantity("trap", "r0", Dimension::Length, [](Scenario& s) -> double& { return s.trap.characteristic_radius; }));
    f.push_back(quantity("trap", "pressure", Dimension::Pressure, [](Scenario& s) -> double& { return s.trap.pressure; }));
    f.push_back(quantity("trap", "temperature", Dimension::Temperature, [](Scenario& s) -> double& { return s.trap.gas_temperature; }));
    f.push_back({"trap", "q_min", [](Scenario& s, std::string_view v) { s.trap.band.q_min = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.trap.band.q_min); }});
    f.push_back({"trap", "q_max", [](Scenario& s, std::string_view v) { s.trap.band.q_max = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.trap.band.q_max); }});

    f.push_back({"uv", "mode",
                 [](Scenario& s, std::string_view v) {
                   v = trim(v);
                   if (v == "continuous") s.uv.mode = UVMode::Continuous;
                   else if (v == "pulsed") s.uv.mode = UVMode::Pulsed;
                   else throw FieldError("mode must be 'continuous' or 'pulsed'");
                 },
                 [](const Scenario& s) -> std::optional<std::string> {
                   return std::string(s.uv.mode == UVMode::Continuous ? "continuous" : "pulsed");
                 }});
    f.push_back(quantity("uv", "wavelength", Dimension::Wavelength, [](Scenario& s) -> double& { return s.uv.wavelength_nm; }));
    f.push_back(quantity("uv", "bandwidth", Dimension::Wavelength, [](Scenario& s) -> double& { return s.uv.bandwidth_nm; }));
    f.push_back(quantity("uv", "intensity", Dimension::Intensity, [](Scenario& s) -> double& { return s.uv.intensity; }));
    f.push_back(quantity("uv", "power", Dimension::Power, [](Scenario& s) -> double& { return s.uv.average_power; }));
    f.push_back(quantity("uv", "repetition_rate", Dimension::Frequency, [](Scenario& s) -> double& { return s.uv.repetition_rate; }));
    f.push_back(quantity("uv", "pulse_duration", Dimension::Time, [](Scenario& s) -> double& { return s.uv.pulse_duration; }));
    f.push_back(quantity("uv", "spot_diameter", Dimension::Length, [](Scenario& s) -> double& { return s.uv.spot_diameter; }));

    f.push_back(quantity("emission", "lambda0", Dimension::Wavelength, [](Scenario& s) -> double& { return s.emission.lambda0_nm; }));
    f.push_back(quantity("emission", "steepness", Dimension::InverseLength,
                         [](Scenario& s) -> double& { return s.emission.steepness_per_nm; }));
    f.push_back({"emission", "width",
                 [](Scenario& s, std::string_view v) {
                   s.emission.steepness_per_nm = EmissionModel::steepness_for_width(units::parse_quantity(v, Dimension::Wavelength));
                 },
                 [](const Scenario&) -> std::optional<std::string> { return std::nullopt; }});
    f.push_back(quantity("emission", "rate_scale", Dimension::Rate, [](Scenario& s) -> double& { return s.emission.rate_scale; }));
    f.push_back({"emission", "size_exponent", [](Scenario& s, std::string_view v) { s.emission.size_exponent = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.emission.size_exponent); }});
    f.push_back(quantity("emission", "floor_rate", Dimension::Rate, [](Scenario& s) -> double& { return s.emission.floor_rate; }));
    f.push_back(quantity("emission", "reference_diameter", Dimension::Length,
                         [](Scenario& s) -> double& { return s.emission.reference_diameter; }));
    f.push_back(quantity("emission", "reference_intensity", Dimension::Intensity,
                         [](Scenario& s) -> double& { return s.emission.reference_intensity; }));

    f.push_back(quantity("picker", "repetition_rate", Dimension::Frequency, [](Scenario& s) -> double& { return s.picker.repetition_rate; }));
    f.push_back(quantity("picker", "pulse_duration", Dimension::Time, [](Scenario& s) -> double& { return s.picker.pulse_duration; }));
    f.push_back(quantity("picker", "shutter", Dimension::Time, [](Scenario& s) -> double& { return s.picker.shutter_open; }));
    f.push_back(quantity("picker", "chopper_frequency", Dimension::Frequency,
                         [](Scenario& s) -> double& { return s.picker.chopper_frequency; }));
    f.push_back({"picker", "duty", [](Scenario& s, std::string_view v) { s.picker.chopper_duty = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.picker.chopper_duty); }});

    f.push_back({"run", "kind",
                 [](Scenario& s, std::string_view v) {
                   const auto it = kind_names().find(std::string(trim(v)));
                   if (it == kind_names().end()) throw FieldError(fmt::format("unknown run kind '{}'", trim(v)));
                   s.run.kind = it->second;
                 },
                 [](const Scenario& s) -> std::optional<std::string> { return std::string(to_string(s.run.kind)); }});
    f.push_back({"run", "seed",
                 [](Scenario& s, std::string_view v) {
                   v = trim(v);
                   std::uint64_t seed = 0;
                   const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
                   if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw FieldError("seed must be an unsigned integer");
                   s.run.seed = seed;
                 },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.run.seed); }});
    f.push_back({"run", "n0",
                 [](Scenario& s, std::string_view v) {
                   s.run.n0 = parse_integer(v);
                   if (s.run.n0 < 1) throw FieldError("n0 must be >= 1");
                 },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.run.n0); }});
    f.push_back(quantity("run", "duration", Dimension::Time, [](Scenario& s) -> double& { return s.run.duration; }));
    f.push_back(quantity("run", "frame_rate", Dimension::Frequency, [](Scenario& s) -> double& { return s.run.frame_rate; }));
    f.push_back(count("run", "frame_count", [](Scenario& s) -> std::size_t& { return s.run.frame_count; }));
    f.push_back(quantity("run", "uv_on", Dimension::Time, [](Scenario& s) -> double& { return s.run.uv_on_time; }));
    f.push_back({"run", "loss",
                 [](Scenario& s, std::string_view v) {
                   v = trim(v);
                   if (v == "band") s.run.loss = LossCriterion::Band;
                   else if (v == "integrated") s.run.loss = LossCriterion::Integrated;
                   else throw FieldError("loss must be 'band' or 'integrated'");
                 },
                 [](const Scenario& s) -> std::optional<std::string> {
                   return std::string(s.run.loss == LossCriterion::Band ? "band" : "integrated");
                 }});
    f.push_back(list("run", "wavelengths", Dimension::Wavelength, [](Scenario& s) -> std::vector<double>& { return s.run.wavelengths_nm; }));
    f.push_back(list("run", "diameters", Dimension::Length, [](Scenario& s) -> std::vector<double>& { return s.run.diameters; }));
    f.push_back(quantity("run", "delta_f", Dimension::Frequency, [](Scenario& s) -> double& { return s.run.delta_f; }));
    f.push_back(quantity("run", "noise_sigma", Dimension::Frequency, [](Scenario& s) -> double& { return s.run.noise_sigma; }));
    f.push_back(quantity("run", "exposure_step", Dimension::Time, [](Scenario& s) -> double& { return s.run.exposure_step; }));
    f.push_back(count("run", "exposures", [](Scenario& s) -> std::size_t& { return s.run.exposures; }));
    f.push_back(quantity("run", "delta_f_min", Dimension::Frequency, [](Scenario& s) -> double& { return s.run.delta_f_min; }));
    f.push_back(quantity("run", "delta_f_max", Dimension::Frequency, [](Scenario& s) -> double& { return s.run.delta_f_max; }));
    f.push_back({"run", "electrons_per_pulse",
                 [](Scenario& s, std::string_view v) { s.run.electrons_per_pulse = parse_unitless(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return fmt::format("{}", s.run.electrons_per_pulse); }});
    f.push_back(quantity("run", "motion_duration", Dimension::Time, [](Scenario& s) -> double& { return s.run.motion_duration; }));
    f.push_back({"run", "thermal_noise", [](Scenario& s, std::string_view v) { s.run.thermal_noise = parse_bool(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return std::string(s.run.thermal_noise ? "true" : "false"); }});
    f.push_back(count("run", "trials", [](Scenario& s) -> std::size_t& { return s.run.trials; }));
    return f;
  }();
  return table;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> s{"particle", "trap", "uv", "emission", "picker", "run"};
  return s;
}

bool needs_trap(ScenarioKind k) {
  return k == ScenarioKind::Survival || k == ScenarioKind::WavelengthSweep || k == ScenarioKind::SizeSweep ||
         k == ScenarioKind::Motion;
}

bool needs_emission(ScenarioKind k) {
  return k == ScenarioKind::Survival || k == ScenarioKind::WavelengthSweep || k == ScenarioKind::SizeSweep ||
         k == ScenarioKind::Trajectory || k == ScenarioKind::Lattice;
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::string& source) {
  Scenario s;
  std::string section;
  std::map<std::string, std::size_t> section_lines;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw io::ParseError(source, line_no, "", "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections().contains(section)) throw io::ParseError(source, line_no, section, "unknown section");
      if (section_lines.contains(section)) throw io::ParseError(source, line_no, section, "duplicate section");
      section_lines[section] = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw io::ParseError(source, line_no, "", "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string qualified = section.empty() ? key : section + "." + key;
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.section == section && f.key == key; });
    if (it == table.end()) throw io::ParseError(source, line_no, qualified, "unknown key");
    if (!seen.insert(qualified).second) throw io::ParseError(source, line_no, qualified, "duplicate key");
    if (value.empty()) throw io::ParseError(source, line_no, qualified, "missing value");
    try {
      it->parse(s, value);
    } catch (const std::exception& e) {
      throw io::ParseError(source, line_no, qualified, e.what());
    }
  }

  if (s.particle.charge && (*s.particle.charge > 0 ? 1 : -1) != s.particle.sign) {
    if (seen.contains("particle.sign")) {
      throw io::ParseError(source, section_lines["particle"], "particle.charge", "charge disagrees with sign");
    }
    s.particle.sign = *s.particle.charge > 0 ? 1 : -1;
  }

  auto check = [&](const std::string& sec, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw io::ParseError(source, section_lines.contains(sec) ? section_lines[sec] : 0, sec, e.what());
    } catch (const std::domain_error& e) {
      throw io::ParseError(source, section_lines.contains(sec) ? section_lines[sec] : 0, sec, e.what());
    }
  };
  check("particle", [&] { (void)s.make_particle(); });
  if (needs_trap(s.run.kind)) check("trap", [&] { s.trap.validate(); });
  if (needs_emission(s.run.kind)) {
    check("uv", [&] { s.uv.validate(); });
    check("emission", [&] { s.emission.validate(); });
  }
  if (s.run.kind == ScenarioKind::Pulses || s.run.kind == ScenarioKind::Picker) check("picker", [&] { s.picker.validate(); });
  check("run", [&] {
    const auto& r = s.run;
    if (r.kind == ScenarioKind::WavelengthSweep && r.wavelengths_nm.size() < 3) {
      throw std::invalid_argument("wavelength_sweep needs >= 3 wavelengths");
    }
    if (r.kind == ScenarioKind::SizeSweep && r.diameters.empty()) throw std::invalid_argument("size_sweep needs diameters");
    if ((r.kind == ScenarioKind::Lattice || r.kind == ScenarioKind::Pulses) && !(r.delta_f > 0.0)) {
      throw std::invalid_argument("delta_f must be positive");
    }
    if (r.kind == ScenarioKind::Lattice && (r.exposures < 2 || !(r.exposure_step > 0.0))) {
      throw std::invalid_argument("lattice runs need exposures >= 2 and a positive exposure_step");
    }
    if (r.kind == ScenarioKind::Motion && !(r.motion_duration > 0.0)) throw std::invalid_argument("motion_duration must be positive");
    if (r.kind == ScenarioKind::Trajectory && !(r.duration > 0.0)) throw std::invalid_argument("trajectory runs need a duration");
    if (r.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  });
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(io::read_text(path), path.string()); }

std::string serialize_scenario(const Scenario& scenario) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    const auto value = f.emit(scenario);
    if (!value) continue;
    if (f.section != current) {
      out += fmt::format("\n[{}]\n", f.section);
      current = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, *value);
  }
  return out;
}

std::filesystem::path bundled_scenario_path(std::string_view name) {
  return std::filesystem::path(NDTRAP_SCENARIO_DIR) / (std::string(name) + ".scn");
}

// ---------------------------------------------------------------------------

Particle Scenario::make_particle() const {
  ChargeCount charge = 0;
  if (particle.charge) {
    charge = *particle.charge;
  } else {
    const ChargeEnvelope env = charge_envelope(0.5 * particle.diameter, particle.envelope_band);
    charge = particle.sign * std::max<ChargeCount>(1, std::llround(env.center_count));
  }
  return Particle::from_diameter(particle.diameter, charge, particle.density);
}

ChargeSampler Scenario::make_sampler() const {
  if (particle.charge) return ChargeSampler::fixed(*particle.charge);
  return ChargeSampler::envelope(particle.sign, particle.envelope_band);
}

SurvivalRun Scenario::make_survival_run() const {
  SurvivalRun r;
  r.n0 = run.n0;
  r.duration = run.duration;
  r.frame_rate = run.frame_rate;
  r.frame_count = run.frame_count;
  r.uv_on_time = run.uv_on_time;
  r.loss = run.loss;
  r.seed = run.seed;
  return r;
}

SweepScenario Scenario::make_sweep() const {
  SweepScenario s{make_particle(), make_sampler(), trap, emission, uv, make_survival_run(), true};
  return s;
}

} // namespace ndtrap
