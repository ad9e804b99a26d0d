#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ndtrap/fitters.hpp"

namespace ndtrap {
namespace {

const double kSqrtEps = std::sqrt(std::numeric_limits<double>::epsilon());

double fd_step(double p) { return kSqrtEps * (p != 0.0 ? std::abs(p) : 1.0); }

double weighted_cost(const ModelFunction& model, const FitData& data, std::span<const double> p) {
  double cost = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data.weight.empty() ? 1.0 : data.weight[i];
    const double r = data.y[i] - model(data.x[i], p);
    cost += w * r * r;
  }
  return cost;
}

} // namespace

std::string_view to_string(FitErrorKind kind) {
  switch (kind) {
  case FitErrorKind::Degenerate: return "degenerate fit";
  case FitErrorKind::InsufficientData: return "insufficient data";
  case FitErrorKind::LatticeNotDetected: return "lattice not detected";
  case FitErrorKind::Domain: return "domain error";
  }
  return "fit error";
}

std::size_t FitResult::index_of(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range(fmt::format("no fit parameter '{}'", name));
  return static_cast<std::size_t>(it - names.begin());
}

double FitResult::value(std::string_view name) const { return parameters(static_cast<Eigen::Index>(index_of(name))); }

double FitResult::error(std::string_view name) const {
  const auto i = static_cast<Eigen::Index>(index_of(name));
  return std::sqrt(std::max(0.0, covariance(i, i)));
}

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

Eigen::MatrixXd forward_jacobian(const ModelFunction& model, std::span<const double> x,
                                 std::span<const double> params) {
  std::vector<double> p(params.begin(), params.end());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p.size()));
  std::vector<double> base(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) base[i] = model(x[i], p);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double orig = p[j];
    const double h = fd_step(orig);
    p[j] = orig + h;
    const double dh = p[j] - orig;
    for (std::size_t i = 0; i < x.size(); ++i) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (model(x[i], p) - base[i]) / dh;
    }
    p[j] = orig;
  }
  return jac;
}

Eigen::MatrixXd central_jacobian(const ModelFunction& model, std::span<const double> x,
                                 std::span<const double> params) {
  std::vector<double> p(params.begin(), params.end());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double orig = p[j];
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (orig != 0.0 ? std::abs(orig) : 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      p[j] = orig + h;
      const double up = model(x[i], p);
      p[j] = orig - h;
      const double down = model(x[i], p);
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (up - down) / (2.0 * h);
    }
    p[j] = orig;
  }
  return jac;
}

FitResult nls_fit(const ModelFunction& model, const FitData& data, std::vector<double> initial,
                  std::vector<std::string> names, const NlsOptions& options) {
  const std::size_t n = data.size();
  const std::size_t np = initial.size();
  if (data.y.size() != n || (!data.weight.empty() && data.weight.size() != n)) {
    throw std::invalid_argument("fit data columns differ in length");
  }
  if (names.size() != np) throw std::invalid_argument("one name per parameter required");
  if (n < np) {
    throw FitError(FitErrorKind::Degenerate, fmt::format("{} points cannot determine {} parameters", n, np));
  }
  for (double w : data.weight) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("fit weights must be positive");
  }

  const auto ni = static_cast<Eigen::Index>(n);
  const auto pi = static_cast<Eigen::Index>(np);
  Eigen::VectorXd sqrt_w(ni);
  for (std::size_t i = 0; i < n; ++i) sqrt_w(static_cast<Eigen::Index>(i)) = data.weight.empty() ? 1.0 : std::sqrt(data.weight[i]);

  std::vector<double> p = std::move(initial);
  double cost = weighted_cost(model, data, p);
  if (!std::isfinite(cost)) throw FitError(FitErrorKind::Domain, "model is not finite at the initial guess");

  double mu = options.initial_damping;
  bool converged = false;
  int iter = 0;

  auto weighted_residuals = [&](std::span<const double> params) {
    Eigen::VectorXd r(ni);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = sqrt_w(k) * (data.y[i] - model(data.x[i], params));
    }
    return r;
  };

  while (iter < options.max_iterations && !converged) {
    ++iter;
    if (cost == 0.0) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jac = sqrt_w.asDiagonal() * forward_jacobian(model, data.x, p);
    const Eigen::VectorXd r = weighted_residuals(p);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index k = 0; k < pi; ++k) {
      if (!(diag(k) > 0.0)) diag(k) = 1.0;
    }

    bool improved = false;
    while (!improved) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += mu * diag;
      const Eigen::VectorXd delta = a.ldlt().solve(g);
      if (!delta.allFinite()) {
        mu *= options.damping_factor;
        if (mu > 1e20) break;
        continue;
      }
      std::vector<double> trial(p);
      for (std::size_t j = 0; j < np; ++j) trial[j] += delta(static_cast<Eigen::Index>(j));
      const double trial_cost = weighted_cost(model, data, trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        double step_norm = 0.0, param_norm = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
          step_norm += delta(static_cast<Eigen::Index>(j)) * delta(static_cast<Eigen::Index>(j));
          param_norm += trial[j] * trial[j];
        }
        const double rel_step = std::sqrt(step_norm) / (std::sqrt(param_norm) + 1e-300);
        const double rel_cost = (cost - trial_cost) / std::max(trial_cost, 1e-300);
        p = std::move(trial);
        cost = trial_cost;
        mu = std::max(mu / options.damping_factor, 1e-15);
        improved = true;
        if ((rel_step < options.tolerance && rel_cost < options.tolerance) || cost == 0.0) converged = true;
      } else {
        mu *= options.damping_factor;
        if (mu > 1e20) break;
      }
    }
    // No downhill step exists at any damping: p is a minimum to working precision.
    if (!improved) converged = true;
  }

  FitResult result;
  result.names = std::move(names);
  result.parameters = Eigen::Map<const Eigen::VectorXd>(p.data(), pi);
  result.residual_norm = cost;
  result.iterations = iter;
  result.converged = converged;

  const Eigen::MatrixXd jac = sqrt_w.asDiagonal() * forward_jacobian(model, data.x, p);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
  qr.setThreshold(1e-10);
  if (qr.rank() < pi) {
    throw FitError(FitErrorKind::Degenerate, "normal equations are singular at the solution");
  }
  const Eigen::MatrixXd jtj_inv = (jac.transpose() * jac).inverse();
  double scale = 1.0;
  if (!options.absolute_weights) {
    scale = n > np ? cost / static_cast<double>(n - np) : 0.0;
    if (n == np) result.flags.emplace_back("covariance_unreliable");
  }
  result.covariance = scale * jtj_inv;
  result.covariance = 0.5 * (result.covariance + result.covariance.transpose()).eval();
  return result;
}

std::vector<BandPoint> confidence_band(const ModelFunction& model, const FitResult& fit, std::span<const double> x) {
  std::vector<double> p(fit.parameters.data(), fit.parameters.data() + fit.parameters.size());
  const Eigen::MatrixXd jac = forward_jacobian(model, x, p);
  std::vector<BandPoint> band;
  band.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::VectorXd g = jac.row(static_cast<Eigen::Index>(i)).transpose();
    const double var = g.dot(fit.covariance * g);
    band.push_back({x[i], model(x[i], p), std::sqrt(std::max(0.0, var))});
  }
  return band;
}

} // namespace ndtrap
