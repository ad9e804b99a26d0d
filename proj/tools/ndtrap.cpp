// ndtrap: scenario runner, fitter and figure reproduction harness.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "ndtrap/fitters.hpp"
#include "ndtrap/io.hpp"
#include "ndtrap/reproduce.hpp"
#include "ndtrap/scenario.hpp"
#include "ndtrap/units.hpp"

namespace fs = std::filesystem;
using namespace ndtrap;

namespace {

enum Exit { Ok = 0, NumericFailure = 1, UsageError = 2 };

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NDTRAP_OUT_DIR"); env && *env) return env;
  return "out";
}

Scenario resolve_scenario(const std::string& config, const std::string& name) {
  if (!config.empty()) return load_scenario(config);
  if (name.empty()) throw CLI::ValidationError("scenario", "give a bundled scenario name or --config FILE");
  if (fs::exists(name)) return load_scenario(name);
  const fs::path bundled = bundled_scenario_path(name);
  if (!fs::exists(bundled)) throw CLI::ValidationError("scenario", fmt::format("no bundled scenario named '{}'", name));
  return load_scenario(bundled);
}

void print_files(const std::vector<fs::path>& files) {
  for (const auto& f : files) fmt::print("  wrote {}\n", f.string());
}

int run_fit(const std::string& model, const fs::path& input, const fs::path& out_dir, double uv_on,
            const std::vector<double>& range, const std::string& space, std::optional<double> fixed_exponent) {
  FitResult fit;
  std::string summary;
  const std::string stem = input.stem().string();
  if (model == "exp") {
    SurvivalCurve curve = io::read_survival_csv(input);
    if (uv_on >= 0.0) curve.uv_on_time = uv_on;
    fit = fit_exponential(curve);
    summary = fmt::format("tau = {:.4g} +- {:.2g} s, N0 = {:.4g}{}", fit.value("tau"), fit.error("tau"), fit.value("N0"),
                          fit.has_flag("no_decay") ? " (no decay)" : "");
  } else if (model == "sigmoid") {
    SigmoidFitOptions opts;
    if (space == "linear") opts.space = FitSpace::Linear;
    else if (space != "log") throw CLI::ValidationError("--space", "must be 'log' or 'linear'");
    fit = fit_sigmoid(io::read_lifetime_csv(input), opts);
    if (fit.derived.count("center")) {
      summary = fmt::format("center = {:.2f} +- {:.2f} nm, width = {:.2f} nm, threshold = {:.2f} nm", fit.derived.at("center"),
                            fit.derived.at("center_error"), fit.derived.at("width"), fit.derived.at("threshold"));
    } else {
      summary = "sigmoid fit degenerate";
    }
    io::write_text(out_dir / (stem + "_sigmoid_band.csv"), io::band_csv(fit));
  } else if (model == "powerlaw") {
    PowerLawFitOptions opts;
    opts.fixed_exponent = fixed_exponent;
    fit = fit_powerlaw(io::read_lifetime_csv(input), opts);
    summary = fmt::format("exponent = {:.3f} +- {:.3f}, amplitude = {:.4g}", fit.value("exponent"), fit.error("exponent"),
                          fit.value("amplitude"));
  } else if (model == "lattice") {
    const FrequencyTrace trace = io::read_frequency_csv(input);
    if (range.size() != 2) throw CLI::ValidationError("--range", "lattice fits need --range LO HI (Hz)");
    fit = fit_charge_lattice(trace, range[0], range[1]);
    summary = fmt::format("delta_f = {:.4g} Hz, N0 = {}", fit.value("delta_f"), fit.charges.front());
  } else {
    throw CLI::ValidationError("model", "must be exp, sigmoid, powerlaw or lattice");
  }
  const fs::path out = out_dir / (stem + "_" + model + "_fit.json");
  io::write_json(out, io::fit_json(fit));
  fmt::print("{}\n", summary);
  fmt::print("  wrote {}\n", out.string());
  return fit.converged ? Ok : NumericFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levitated nanodiamond photoemission simulator"};
  app.require_subcommand(1);

  std::string out_flag;
  std::optional<std::uint64_t> seed;
  std::string config;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write CSV + JSON");
  std::string scenario_name;
  simulate->add_option("scenario", scenario_name, "Bundled scenario name or scenario file");
  simulate->add_option("--config", config, "Scenario file");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--out-dir", out_flag, "Output directory (env NDTRAP_OUT_DIR)");

  auto* sweep = app.add_subcommand("sweep", "Run a lifetime sweep scenario");
  sweep->add_option("scenario", scenario_name, "Bundled scenario name or scenario file");
  sweep->add_option("--config", config, "Scenario file");
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--out-dir", out_flag, "Output directory (env NDTRAP_OUT_DIR)");

  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV file");
  std::string model;
  std::string input;
  double uv_on = -1.0;
  std::vector<double> range;
  std::string space = "log";
  std::optional<double> fixed_exponent;
  fit->add_option("model", model, "exp | sigmoid | powerlaw | lattice")->required();
  fit->add_option("input", input, "Input CSV")->required();
  fit->add_option("--uv-on", uv_on, "UV onset time in s (exp)");
  fit->add_option("--range", range, "delta_f search range LO HI in Hz (lattice)")->expected(2);
  fit->add_option("--space", space, "log | linear (sigmoid)");
  fit->add_option("--fixed-exponent", fixed_exponent, "Fixed exponent (powerlaw)");
  fit->add_option("--config", config, "Unused; accepted for uniformity");
  fit->add_option("--seed", seed, "Unused; fits are deterministic");
  fit->add_option("--out-dir", out_flag, "Output directory (env NDTRAP_OUT_DIR)");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Reproduce a figure and report pass/fail");
  std::string figure;
  reproduce_cmd->add_option("figure", figure, "fig5 | fig7 | fig8 | fig9 | fig10 | fig12 | picker | all")->required();
  reproduce_cmd->add_option("--seed", seed, "Master seed override");
  reproduce_cmd->add_option("--out-dir", out_flag, "Output directory (env NDTRAP_OUT_DIR)");
  reproduce_cmd->add_option("--config", config, "Unused; figures use bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : UsageError;
  }

  const fs::path out_dir = resolve_out_dir(out_flag);
  try {
    if (simulate->parsed() || sweep->parsed()) {
      Scenario s = resolve_scenario(config, scenario_name);
      if (seed) s.run.seed = *seed;
      if (sweep->parsed() && s.run.kind != ScenarioKind::WavelengthSweep && s.run.kind != ScenarioKind::SizeSweep) {
        fmt::print(stderr, "error: scenario '{}' is not a sweep (kind = {})\n", s.name, to_string(s.run.kind));
        return UsageError;
      }
      const RunOutput out = run_scenario(s, out_dir);
      fmt::print("{}: {}\n", s.name, out.headline);
      print_files(out.files);
      return Ok;
    }
    if (fit->parsed()) {
      if (!fs::exists(input)) {
        fmt::print(stderr, "error: no such file {}\n", input);
        return UsageError;
      }
      return run_fit(model, input, out_dir, uv_on, range, space, fixed_exponent);
    }
    if (reproduce_cmd->parsed()) {
      std::vector<std::string> ids;
      if (figure == "all") ids = figure_ids();
      else ids.push_back(figure);
      bool ok = true;
      for (const auto& id : ids) {
        const Report r = reproduce(id, out_dir, seed);
        fmt::print("{}", r.text());
        print_files(r.files);
        ok = ok && r.passed();
      }
      return ok ? Ok : NumericFailure;
    }
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return UsageError;
  } catch (const io::ParseError& e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return UsageError;
  } catch (const units::UnitError& e) {
    fmt::print(stderr, "unit error: {}\n", e.what());
    return UsageError;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return UsageError;
  } catch (const FitError& e) {
    fmt::print(stderr, "fit error ({}): {}\n", to_string(e.kind()), e.what());
    return NumericFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return NumericFailure;
  }
  return UsageError;
}
