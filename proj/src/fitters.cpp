#include "ndtrap/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace ndtrap {
namespace {

const double kLn9 = std::log(9.0);

std::size_t count_distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// First x at which the piecewise-linear curve (xs sorted) crosses level.
std::optional<double> crossing(const std::vector<double>& xs, const std::vector<double>& ys, double level) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double a = ys[i - 1] - level;
    const double b = ys[i] - level;
    if (a == 0.0) return xs[i - 1];
    if ((a < 0.0) != (b < 0.0)) return xs[i - 1] + (xs[i] - xs[i - 1]) * a / (a - b);
  }
  return std::nullopt;
}

} // namespace

namespace models {

double exponential(double t, std::span<const double> p) { return p[0] * std::exp(-p[1] * t); }

double sigmoid(double x, std::span<const double> p) {
  return p[0] / (1.0 + std::exp(-p[2] * (x - p[1]))) + p[3];
}

double powerlaw(double x, std::span<const double> p) { return p[0] * std::pow(x, p[1]); }

double lattice(double f, std::span<const double> p) { return p[0] * std::round(f / p[0]); }

} // namespace models

// ---------------------------------------------------------------------------

FitResult fit_exponential(const SurvivalCurve& curve, const ExponentialFitOptions& options) {
  FitData data;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.t[i] < curve.uv_on_time) continue;
    data.x.push_back(curve.t[i] - curve.uv_on_time);
    data.y.push_back(static_cast<double>(curve.n_alive[i]));
  }
  if (count_distinct(data.x) < 3) {
    throw FitError(FitErrorKind::InsufficientData, "exponential fit needs >= 3 distinct times after UV onset");
  }

  // Initial guess from log-linear regression over non-empty samples.
  double kappa0 = 0.0;
  {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.y[i] <= 0.0) continue;
      const double ly = std::log(data.y[i]);
      sw += 1;
      sx += data.x[i];
      sy += ly;
      sxx += data.x[i] * data.x[i];
      sxy += data.x[i] * ly;
    }
    const double denom = sw * sxx - sx * sx;
    if (sw >= 2 && denom > 0.0) kappa0 = std::max(0.0, -(sw * sxy - sx * sy) / denom);
    // rounding noise on a flat curve; a relative FD step there sees nothing
    if (kappa0 * (data.x.back() - data.x.front()) < 1e-9) kappa0 = 0.0;
  }
  const double n_start = data.y.front();

  FitResult fit = nls_fit(models::exponential, data, {std::max(n_start, 1.0), kappa0}, {"N0", "kappa"}, options.nls);
  const double n0 = fit.parameters(0);
  const double kappa = fit.parameters(1);
  const double span = data.x.back() - data.x.front();
  const Eigen::MatrixXd naive_cov = fit.covariance;

  // Two sandwich covariances: one under the empirical-survival-process noise
  // model, Cov(N(s), N(t)) = n S(t) (1 - S(s)) for s <= t, and one from the
  // observed residuals (heteroscedastic, uncorrelated). Counting data makes
  // the first one right; other noise makes the second. Report the larger.
  Eigen::Matrix2d cov = naive_cov;
  Eigen::Matrix2d cov_process = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cov_residual = Eigen::Matrix2d::Zero();
  if (kappa > 0.0 && n_start > 0.0) {
    const std::size_t n = data.size();
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d meat_residual = Eigen::Matrix2d::Zero();
    Eigen::Vector2d prefix = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::exp(-kappa * data.x[i]);
      const Eigen::Vector2d a(s, -n0 * data.x[i] * s);
      const double r = data.y[i] - n0 * s;
      jtj += a * a.transpose();
      meat += n_start * s * (1.0 - s) * a * a.transpose();
      meat += n_start * s * (prefix * a.transpose() + a * prefix.transpose());
      prefix += (1.0 - s) * a;
      meat_residual += r * r * a * a.transpose();
    }
    const Eigen::Matrix2d bread = jtj.inverse();
    const double small_sample = static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(n, 3) - 2);
    cov_process = bread * meat * bread;
    cov_process = 0.5 * (cov_process + cov_process.transpose()).eval();
    cov_residual = small_sample * bread * meat_residual * bread;
    cov_residual = 0.5 * (cov_residual + cov_residual.transpose()).eval();
    cov = cov_process(1, 1) >= cov_residual(1, 1) ? cov_process : cov_residual;
  }

  const bool no_decay = !(kappa > 0.0) || n0 * (1.0 - std::exp(-kappa * span)) < 0.5;
  const double tau = kappa > 0.0 ? 1.0 / kappa : std::numeric_limits<double>::infinity();
  const double dtau = kappa > 0.0 ? -1.0 / (kappa * kappa) : 0.0;

  FitResult out;
  out.names = {"N0", "tau"};
  out.parameters = Eigen::Vector2d(n0, tau);
  Eigen::Matrix2d jt;
  jt << 1.0, 0.0, 0.0, dtau;
  out.covariance = jt * cov * jt.transpose();
  out.residual_norm = fit.residual_norm;
  out.iterations = fit.iterations;
  out.converged = fit.converged;
  out.derived["kappa"] = kappa;
  out.derived["kappa_error"] = std::sqrt(std::max(0.0, cov(1, 1)));
  out.derived["tau_error_process"] = std::abs(dtau) * std::sqrt(std::max(0.0, cov_process(1, 1)));
  out.derived["tau_error_residual"] = std::abs(dtau) * std::sqrt(std::max(0.0, cov_residual(1, 1)));
  out.derived["n_points"] = static_cast<double>(data.size());
  if (no_decay) out.flags.emplace_back("no_decay");
  return out;
}

// ---------------------------------------------------------------------------

FitResult fit_sigmoid(const LifetimeTable& table, const SigmoidFitOptions& options) {
  std::vector<LifetimePoint> rows;
  for (const auto& r : table) {
    if (r.ok && r.tau > 0.0 && std::isfinite(r.tau)) rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  if (rows.size() < 4) throw FitError(FitErrorKind::InsufficientData, "sigmoid fit needs >= 4 usable points");

  const bool log_space = options.space == FitSpace::Log;
  FitData data;
  bool all_errors = true;
  for (const auto& r : rows) {
    data.x.push_back(r.x);
    data.y.push_back(log_space ? std::log(r.tau) : r.tau);
    if (!(r.tau_error > 0.0) || !std::isfinite(r.tau_error)) all_errors = false;
  }
  if (all_errors) {
    for (const auto& r : rows) {
      const double sigma = log_space ? r.tau_error / r.tau : r.tau_error;
      data.weight.push_back(1.0 / (sigma * sigma));
    }
  }

  const auto [ymin_it, ymax_it] = std::minmax_element(data.y.begin(), data.y.end());
  const double ymin = *ymin_it, ymax = *ymax_it;
  const std::size_t half = data.size() / 2;
  const double left = std::accumulate(data.y.begin(), data.y.begin() + static_cast<long>(half), 0.0) / static_cast<double>(half);
  const double right = std::accumulate(data.y.end() - static_cast<long>(half), data.y.end(), 0.0) / static_cast<double>(half);
  const double sign = right >= left ? 1.0 : -1.0;
  const double amp = ymax - ymin;
  const double x_range = data.x.back() - data.x.front();
  double x0 = 0.5 * (data.x.front() + data.x.back());
  double k = sign * 4.0 * kLn9 / x_range;
  if (amp > 0.0) {
    if (auto c = crossing(data.x, data.y, ymin + 0.5 * amp)) x0 = *c;
    auto lo = crossing(data.x, data.y, ymin + (sign > 0 ? 0.1 : 0.9) * amp);
    auto hi = crossing(data.x, data.y, ymin + (sign > 0 ? 0.9 : 0.1) * amp);
    if (lo && hi && *hi > *lo) k = sign * 2.0 * kLn9 / (*hi - *lo);
  }

  FitResult fit;
  try {
    fit = nls_fit(models::sigmoid, data, {amp, x0, k, ymin}, {"L", "lambda0", "k", "b"}, options.nls);
  } catch (const FitError& e) {
    if (e.kind() != FitErrorKind::Degenerate) throw;
    fit.names = {"L", "lambda0", "k", "b"};
    fit.parameters = Eigen::Vector4d(amp, x0, k, ymin);
    fit.covariance = Eigen::Matrix4d::Constant(std::numeric_limits<double>::infinity());
    fit.converged = false;
    fit.flags.emplace_back("degenerate");
    return fit;
  }

  const double center = fit.value("lambda0");
  const double slope = fit.value("k");
  const double width = 2.0 * kLn9 / std::abs(slope);
  const double var_c = fit.covariance(1, 1);
  const double var_k = fit.covariance(2, 2);
  const double cov_ck = fit.covariance(1, 2);
  const double dw_dk = -width / slope;
  const double threshold = center - width;
  const double var_th = var_c + dw_dk * dw_dk * var_k - 2.0 * dw_dk * cov_ck;

  fit.derived["center"] = center;
  fit.derived["center_error"] = std::sqrt(std::max(0.0, var_c));
  fit.derived["width"] = width;
  fit.derived["width_error"] = std::abs(dw_dk) * std::sqrt(std::max(0.0, var_k));
  fit.derived["threshold"] = threshold;
  fit.derived["threshold_error"] = std::sqrt(std::max(0.0, var_th));
  if (threshold > 0.0) {
    fit.derived["threshold_energy_ev"] = photon_energy_ev(threshold);
    fit.derived["threshold_energy_ev_error"] = constants::hc_ev_nm / (threshold * threshold) * fit.derived["threshold_error"];
  }
  fit.derived["log_space"] = log_space ? 1.0 : 0.0;

  // both the 10 % and 90 % points must lie inside the sampled range
  if (center - 0.5 * width < data.x.front() || center + 0.5 * width > data.x.back()) {
    fit.flags.emplace_back("one_sided");
  }
  if (!(fit.derived["width_error"] < 0.5 * width)) fit.flags.emplace_back("wide_covariance");

  if (options.band_points >= 2) {
    std::vector<double> grid(options.band_points);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = data.x.front() + x_range * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    }
    fit.confidence_band = confidence_band(models::sigmoid, fit, grid);
  }
  return fit;
}

// ---------------------------------------------------------------------------

FitResult fit_powerlaw(const LifetimeTable& table, const PowerLawFitOptions& options) {
  std::vector<double> u, v, w;
  bool all_errors = true;
  for (const auto& r : table) {
    if (!r.ok) continue;
    if (!(r.x > 0.0) || !(r.tau > 0.0)) throw FitError(FitErrorKind::Domain, "power-law fit needs positive d and tau");
    u.push_back(std::log(r.x));
    v.push_back(std::log(r.tau));
    if (!(r.tau_error > 0.0)) all_errors = false;
  }
  for (const auto& r : table) {
    if (!r.ok) continue;
    const double sigma = r.tau_error / r.tau;
    w.push_back(all_errors ? 1.0 / (sigma * sigma) : 1.0);
  }
  const std::size_t distinct = count_distinct(u);
  const std::size_t n = u.size();

  FitResult fit;
  fit.names = {"amplitude", "exponent"};
  fit.converged = true;
  fit.iterations = 1;

  if (options.fixed_exponent) {
    if (distinct < 1) throw FitError(FitErrorKind::InsufficientData, "power-law fit needs data");
    const double p = *options.fixed_exponent;
    double sw = 0.0, s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      s += w[i] * (v[i] - p * u[i]);
    }
    const double log_a = s / sw;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) rss += w[i] * std::pow(v[i] - log_a - p * u[i], 2);
    const double s2 = n > 1 ? rss / static_cast<double>(n - 1) : 0.0;
    const double amp = std::exp(log_a);
    fit.parameters = Eigen::Vector2d(amp, p);
    fit.covariance = Eigen::Matrix2d::Zero();
    fit.covariance(0, 0) = amp * amp * s2 / sw;
    fit.residual_norm = rss;
    fit.derived["log_amplitude"] = log_a;
    fit.flags.emplace_back("fixed_exponent");
    return fit;
  }

  if (distinct < 2) throw FitError(FitErrorKind::InsufficientData, "power-law fit needs >= 2 distinct diameters");

  Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
  Eigen::Vector2d xtwy = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d row(1.0, u[i]);
    xtwx += w[i] * row * row.transpose();
    xtwy += w[i] * v[i] * row;
  }
  const Eigen::Vector2d beta = xtwx.ldlt().solve(xtwy);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) rss += w[i] * std::pow(v[i] - beta(0) - beta(1) * u[i], 2);
  const double s2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  const Eigen::Matrix2d cov_log = s2 * xtwx.inverse();

  const double amp = std::exp(beta(0));
  Eigen::Matrix2d jt;
  jt << amp, 0.0, 0.0, 1.0;
  fit.parameters = Eigen::Vector2d(amp, beta(1));
  fit.covariance = jt * cov_log * jt.transpose();
  fit.residual_norm = rss;
  fit.derived["log_amplitude"] = beta(0);
  fit.derived["log_amplitude_error"] = std::sqrt(std::max(0.0, cov_log(0, 0)));
  if (distinct < 3) fit.flags.emplace_back("covariance_unreliable");
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

struct LatticeEval {
  double objective;
  double weight_sum;
};

std::vector<double> lattice_weights(const FrequencyTrace& trace) {
  const bool all_errors = std::all_of(trace.points.begin(), trace.points.end(),
                                      [](const auto& p) { return p.frequency_error > 0.0; });
  std::vector<double> w;
  w.reserve(trace.size());
  for (const auto& p : trace.points) w.push_back(all_errors ? 1.0 / (p.frequency_error * p.frequency_error) : 1.0);
  return w;
}

double objective(const FrequencyTrace& trace, const std::vector<double>& w, double df) {
  double o = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double f = trace.points[i].frequency;
    const double r = f - df * std::round(f / df);
    o += w[i] * r * r;
  }
  return o;
}

double golden_minimize(const std::function<double(double)>& fn, double a, double b, int iterations = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < iterations && (b - a) > 1e-14 * std::abs(b); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? c : d;
}

struct LatticeCandidate {
  double delta_f;
  double objective;
  double misfit; // objective / (sum w delta_f^2)
  std::vector<ChargeCount> charges;
};

LatticeCandidate polish(const FrequencyTrace& trace, const std::vector<double>& w, double df) {
  std::vector<ChargeCount> n(trace.size());
  for (int pass = 0; pass < 8; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto ni = static_cast<ChargeCount>(std::llround(trace.points[i].frequency / df));
      if (ni != n[i]) changed = true;
      n[i] = ni;
    }
    if (!changed && pass > 0) break;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      num += w[i] * trace.points[i].frequency * static_cast<double>(n[i]);
      den += w[i] * static_cast<double>(n[i] * n[i]);
    }
    if (den > 0.0) df = num / den;
  }
  const double o = objective(trace, w, df);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    n[i] = static_cast<ChargeCount>(std::llround(trace.points[i].frequency / df));
  }
  return {df, o, o / (wsum * df * df), std::move(n)};
}

} // namespace

double lattice_log_evidence(const FrequencyTrace& trace, double delta_f) {
  double total = 0.0;
  for (const auto& p : trace.points) {
    const double sigma = p.frequency_error;
    const double centre = std::round(p.frequency / delta_f);
    double sum = 0.0;
    for (double n = std::max(1.0, centre - 4.0); n <= centre + 4.0; n += 1.0) {
      const double z = (p.frequency - delta_f * n) / sigma;
      sum += std::exp(-0.5 * z * z);
    }
    total += std::log(delta_f / sigma * sum / std::sqrt(2.0 * std::acos(-1.0)) + 1e-300);
  }
  return total;
}

double lattice_objective(const FrequencyTrace& trace, double delta_f) {
  if (!(delta_f > 0.0)) throw std::domain_error("delta_f must be positive");
  return objective(trace, lattice_weights(trace), delta_f);
}

FitResult fit_charge_lattice(const FrequencyTrace& trace, double delta_f_lo, double delta_f_hi,
                             const LatticeFitOptions& options) {
  if (trace.size() < 5) throw FitError(FitErrorKind::InsufficientData, "lattice fit needs >= 5 points");
  if (!(delta_f_lo > 0.0 && delta_f_hi > delta_f_lo)) throw std::invalid_argument("delta_f range must be positive and ordered");
  for (const auto& p : trace.points) {
    if (!(p.frequency > 0.0)) throw FitError(FitErrorKind::Domain, "lattice fit needs positive frequencies");
  }

  const std::vector<double> w = lattice_weights(trace);
  double f_max = 0.0;
  for (const auto& p : trace.points) f_max = std::max(f_max, p.frequency);

  // Log-spaced grid whose highest harmonic advances by grid_phase_step of a
  // spacing between neighbours.
  const double harmonic = std::max(1.0, f_max / delta_f_lo);
  const double ratio = 1.0 + options.grid_phase_step / harmonic;
  const auto n_grid = static_cast<std::size_t>(std::ceil(std::log(delta_f_hi / delta_f_lo) / std::log(ratio))) + 1;
  if (n_grid > 20'000'000) throw std::invalid_argument("delta_f range too wide for the lattice grid");

  std::vector<double> grid(n_grid), obj(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    grid[i] = std::min(delta_f_hi, delta_f_lo * std::pow(ratio, static_cast<double>(i)));
    obj[i] = objective(trace, w, grid[i]);
  }

  auto fn = [&](double df) { return objective(trace, w, df); };
  const double detect = options.detect_fraction / 12.0;
  std::vector<LatticeCandidate> candidates;
  for (std::size_t i = 0; i < n_grid; ++i) {
    const bool left_ok = i == 0 || obj[i] <= obj[i - 1];
    const bool right_ok = i + 1 == n_grid || obj[i] <= obj[i + 1];
    if (!left_ok || !right_ok) continue;
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[i + 1 == n_grid ? i : i + 1];
    const double refined = a < b ? golden_minimize(fn, a, b) : grid[i];
    LatticeCandidate c = polish(trace, w, refined);
    if (c.delta_f < delta_f_lo || c.delta_f > delta_f_hi) continue;
    if (c.misfit > detect) continue;
    if (std::any_of(c.charges.begin(), c.charges.end(), [](ChargeCount n) { return n < 1; })) continue;
    candidates.push_back(std::move(c));
  }
  if (candidates.empty()) {
    throw FitError(FitErrorKind::LatticeNotDetected,
                   fmt::format("no delta_f in [{}, {}] Hz fits a charge lattice", delta_f_lo, delta_f_hi));
  }

  // Every lattice is also fit by its sub-harmonics, which can only lower the
  // objective. With per-point errors the candidates are ranked by the
  // likelihood marginalized over integer charges under a flat prior, which
  // charges a finer lattice log(delta_f / delta_f') per point for its extra
  // freedom. Without errors, take the largest delta_f whose misfit is within
  // tolerance of the best.
  const double dof = static_cast<double>(trace.size() - 1);
  const bool known_errors = std::all_of(trace.points.begin(), trace.points.end(),
                                        [](const auto& p) { return p.frequency_error > 0.0; });
  const LatticeCandidate* chosen = nullptr;
  if (known_errors) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
      const double s = lattice_log_evidence(trace, c.delta_f);
      if (s > best) {
        best = s;
        chosen = &c;
      }
    }
  } else {
    const double rel_tol = 1.0 + 2.0 / std::sqrt(dof);
    double j_min = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) j_min = std::min(j_min, c.misfit);
    for (const auto& c : candidates) {
      if (c.misfit > j_min * rel_tol + 1e-12) continue;
      if (!chosen || c.delta_f > chosen->delta_f) chosen = &c;
    }
  }

  FitResult fit;
  fit.names = {"delta_f"};
  fit.parameters = Eigen::VectorXd::Constant(1, chosen->delta_f);
  double sum_wn2 = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) sum_wn2 += w[i] * static_cast<double>(chosen->charges[i] * chosen->charges[i]);
  const double s2 = chosen->objective / dof;
  fit.covariance = Eigen::MatrixXd::Constant(1, 1, s2 / sum_wn2);
  fit.residual_norm = chosen->objective;
  fit.iterations = static_cast<int>(n_grid);
  fit.converged = true;
  fit.charges = chosen->charges;
  for (std::size_t i = 1; i < fit.charges.size(); ++i) fit.steps.push_back(fit.charges[i] - fit.charges[i - 1]);
  fit.derived["misfit"] = chosen->misfit;
  fit.derived["initial_charge"] = static_cast<double>(trace.charge_sign * chosen->charges.front());
  fit.derived["final_charge"] = static_cast<double>(trace.charge_sign * chosen->charges.back());
  fit.derived["candidates"] = static_cast<double>(candidates.size());
  return fit;
}

} // namespace ndtrap
