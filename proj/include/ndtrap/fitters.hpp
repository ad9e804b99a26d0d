#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ndtrap/core.hpp"
#include "ndtrap/records.hpp"

namespace ndtrap {

enum class FitErrorKind { Degenerate, InsufficientData, LatticeNotDetected, Domain };

std::string_view to_string(FitErrorKind kind);

class FitError : public std::runtime_error {
public:
  FitError(FitErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FitErrorKind kind() const { return kind_; }

private:
  FitErrorKind kind_;
};

struct BandPoint {
  double x;
  double value;
  double sigma;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd parameters;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0; // weighted sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> flags;
  std::map<std::string, double> derived;
  std::vector<BandPoint> confidence_band;

  // Lattice fits only.
  std::vector<ChargeCount> charges;
  std::vector<ChargeCount> steps;

  std::size_t index_of(std::string_view name) const;
  double value(std::string_view name) const;
  double error(std::string_view name) const;
  bool has_flag(std::string_view flag) const;
};

// ---------------------------------------------------------------------------
// Weighted nonlinear least squares

struct FitData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> weight; // empty: unit weights

  std::size_t size() const { return x.size(); }
};

using ModelFunction = std::function<double(double x, std::span<const double> params)>;

struct NlsOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  /// Treat weights as 1/sigma^2 with known sigma. Otherwise the covariance is
  /// scaled by the reduced chi-square.
  bool absolute_weights = false;
};

/// Levenberg-Marquardt minimization of sum_i w_i (y_i - f(x_i; p))^2 with a
/// forward-difference Jacobian. Throws FitError(Degenerate) when there are
/// fewer points than parameters or the normal equations are singular.
FitResult nls_fit(const ModelFunction& model, const FitData& data, std::vector<double> initial,
                  std::vector<std::string> names, const NlsOptions& options = {});

/// Forward-difference Jacobian df/dp at every x (rows) used by nls_fit.
Eigen::MatrixXd forward_jacobian(const ModelFunction& model, std::span<const double> x,
                                 std::span<const double> params);
Eigen::MatrixXd central_jacobian(const ModelFunction& model, std::span<const double> x,
                                 std::span<const double> params);

/// Delta-method 1 sigma envelope of the fitted model at the given x values.
std::vector<BandPoint> confidence_band(const ModelFunction& model, const FitResult& fit, std::span<const double> x);

// ---------------------------------------------------------------------------
// Built-in models

namespace models {
/// N0 exp(-kappa t); params (N0, kappa). Fitting the decay rate keeps the
/// non-decaying case at a regular point (kappa = 0).
double exponential(double t, std::span<const double> p);
/// L / (1 + exp(-k (x - x0))) + b; params (L, x0, k, b).
double sigmoid(double x, std::span<const double> p);
/// A x^p; params (A, exponent).
double powerlaw(double x, std::span<const double> p);
/// delta_f round(f / delta_f): the nearest lattice frequency; params (delta_f).
double lattice(double f, std::span<const double> p);
} // namespace models

// ---------------------------------------------------------------------------
// Survival curves

struct ExponentialFitOptions {
  NlsOptions nls{};
};

/// Fits N(t) = N0 exp(-t / tau) to samples at or after uv_on_time (time
/// measured from uv_on_time). Parameter errors are the larger of two
/// least-squares sandwich estimates: one under the covariance of an
/// empirical survival process (binomial counts, correlated across samples),
/// one from the observed residuals. Flags "no_decay" when the
/// curve does not lose particles; tau is +inf when the fitted rate is <= 0.
FitResult fit_exponential(const SurvivalCurve& curve, const ExponentialFitOptions& options = {});

// ---------------------------------------------------------------------------
// Lifetime tables

enum class FitSpace { Log, Linear };

struct SigmoidFitOptions {
  FitSpace space = FitSpace::Log;
  NlsOptions nls{};
  std::size_t band_points = 101;
};

/// Sigmoid of lifetime against wavelength (nm). Derived values: center,
/// width (10%-90%), threshold = center - width, threshold_energy_ev, with
/// "_error" companions.
FitResult fit_sigmoid(const LifetimeTable& table, const SigmoidFitOptions& options = {});

struct PowerLawFitOptions {
  std::optional<double> fixed_exponent;
};

/// tau = A d^p by weighted linear regression in log-log space.
FitResult fit_powerlaw(const LifetimeTable& table, const PowerLawFitOptions& options = {});

// ---------------------------------------------------------------------------
// Charge lattice

struct LatticeFitOptions {
  /// A lattice counts as detected when its normalized misfit
  /// sum w r^2 / (sum w delta_f^2) stays below detect_fraction / 12, where
  /// 1/12 is the misfit of frequencies uniformly scattered between lattice
  /// lines (the delta_f -> 0 limit).
  double detect_fraction = 0.75;
  /// Grid resolution: phase change of the highest harmonic between grid
  /// points, as a fraction of one lattice spacing.
  double grid_phase_step = 0.02;
};

/// Integer-lattice fit f_i = delta_f N_i. Grid search over delta_f in
/// [lo, hi], golden-section refinement and closed-form polish of each local
/// minimum, detection by normalized misfit, then the sub-harmonic guard.
/// When every point carries an error the detected candidate with the largest
/// lattice_log_evidence wins; otherwise the largest delta_f whose misfit is
/// within 1 + 2/sqrt(dof) of the best. Returns parameter delta_f with charges N_i = round(f_i / delta_f)
/// and per-step changes.
FitResult fit_charge_lattice(const FrequencyTrace& trace, double delta_f_lo, double delta_f_hi,
                             const LatticeFitOptions& options = {});

/// Unnormalized lattice objective sum_i w_i (f_i - delta_f round(f_i / delta_f))^2.
double lattice_objective(const FrequencyTrace& trace, double delta_f);

/// Log likelihood of the trace on a delta_f lattice with Gaussian errors,
/// summed over integer charges N >= 1 with a flat prior of density 1/delta_f
/// in frequency (additive constants dropped). Requires frequency_error > 0.
double lattice_log_evidence(const FrequencyTrace& trace, double delta_f);

} // namespace ndtrap
