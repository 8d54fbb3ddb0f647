#pragma once

// Univariate GARCH(1,1) with constant mean:
//   r_t = μ + ε_t,  ε_t = σ_t z_t,  σ_t² = ω + α ε_{t-1}² + β σ_{t-1}².

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdg/error.hpp"
#include "cdg/math/optimize.hpp"
#include "cdg/math/random.hpp"
#include "cdg/math/special.hpp"
#include "cdg/stats.hpp"

namespace cdg::garch {

enum class Innovation { gaussian, student_t };

struct GarchParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  Innovation innovation = Innovation::gaussian;
  double nu = 0.0;  // only meaningful for student_t; > 2

  double persistence() const noexcept { return alpha + beta; }
  double unconditional_variance() const { return omega / (1.0 - alpha - beta); }

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("garch: omega must be positive");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw DomainError("garch: alpha and beta must be >= 0");
    if (!(alpha + beta < 1.0)) throw DomainError("garch: alpha + beta must be < 1");
    if (!std::isfinite(mu)) throw DomainError("garch: mu must be finite");
    if (innovation == Innovation::student_t && !(nu > 2.0))
      throw DomainError("garch: student-t innovations need nu > 2");
  }
};

struct GarchFit {
  GarchParams params;
  std::vector<double> returns;
  std::vector<double> sigma;      // σ_t, t = 1..T
  std::vector<double> residuals;  // z_t = (r_t - μ)/σ_t
  double loglik = 0.0;
  double start_loglik = 0.0;      // best log-likelihood among the optimizer start points
  bool converged = false;
  bool arch_only = false;
};

struct FitOptions {
  Innovation innovation = Innovation::student_t;
  bool arch_only = false;  // fix β = 0
  std::vector<double> nu_grid{4, 5, 6, 8, 10, 15, 20, 30};
  double nu_lower = 2.05;
  double nu_upper = 300.0;
  math::MinimizeOptions minimizer{};
};

inline constexpr std::size_t kMinObservations = 50;

// σ path; σ_1² is the unconditional variance ω/(1-α-β).
inline std::vector<double> filter_sigma(const GarchParams& p, std::span<const double> returns) {
  p.validate();
  std::vector<double> sigma(returns.size());
  if (returns.empty()) return sigma;
  double var = p.unconditional_variance();
  sigma[0] = std::sqrt(var);
  for (std::size_t t = 1; t < returns.size(); ++t) {
    const double e = returns[t - 1] - p.mu;
    var = p.omega + p.alpha * e * e + p.beta * var;
    sigma[t] = std::sqrt(var);
  }
  return sigma;
}

// Log density of a unit-variance innovation.
inline double innovation_log_pdf(double z, Innovation kind, double nu) {
  if (kind == Innovation::gaussian) return -0.5 * (std::log(2.0 * std::numbers::pi) + z * z);
  const double scale = std::sqrt(nu / (nu - 2.0));
  return math::student_t_log_pdf(z * scale, nu) + std::log(scale);
}

// Quantile of a unit-variance innovation.
inline double innovation_quantile(double p, Innovation kind, double nu) {
  if (kind == Innovation::gaussian) return math::std_normal_quantile(p);
  return math::student_t_quantile(p, nu) * std::sqrt((nu - 2.0) / nu);
}

inline double innovation_cdf(double z, Innovation kind, double nu) {
  if (kind == Innovation::gaussian) return math::std_normal_cdf(z);
  return math::student_t_cdf(z * std::sqrt(nu / (nu - 2.0)), nu);
}

inline double loglik(const GarchParams& p, std::span<const double> returns) {
  p.validate();
  double ll = 0.0;
  double var = p.unconditional_variance();
  // Constant part of the standardized-t log density, hoisted out of the loop.
  double t_const = 0.0, t_scale2 = 0.0;
  if (p.innovation == Innovation::student_t) {
    const double nu = p.nu;
    t_const = math::log_gamma(0.5 * (nu + 1.0)) - math::log_gamma(0.5 * nu) -
              0.5 * std::log(std::numbers::pi * (nu - 2.0));
    t_scale2 = 1.0 / (nu - 2.0);
  }
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (t > 0) {
      const double e = returns[t - 1] - p.mu;
      var = p.omega + p.alpha * e * e + p.beta * var;
    }
    const double e = returns[t] - p.mu;
    const double z2 = e * e / var;
    if (p.innovation == Innovation::gaussian) {
      ll += -0.5 * (log2pi + std::log(var) + z2);
    } else {
      ll += t_const - 0.5 * (p.nu + 1.0) * std::log1p(z2 * t_scale2) - 0.5 * std::log(var);
    }
  }
  return ll;
}

namespace detail {

// Optimizer coordinates: (ω, s, w[, ν]) with α = s·w, β = s·(1-w); ARCH: (ω, α[, ν]).
struct Coordinates {
  bool arch_only;
  Innovation innovation;
  std::optional<double> fixed_nu;
  double mu;

  GarchParams decode(std::span<const double> x) const {
    GarchParams p;
    p.mu = mu;
    p.innovation = innovation;
    p.omega = x[0];
    std::size_t next;
    if (arch_only) {
      p.alpha = x[1];
      p.beta = 0.0;
      next = 2;
    } else {
      p.alpha = x[1] * x[2];
      p.beta = x[1] * (1.0 - x[2]);
      next = 3;
    }
    if (innovation == Innovation::student_t) p.nu = fixed_nu ? *fixed_nu : x[next];
    return p;
  }

  std::vector<double> encode(double omega, double alpha, double beta, double nu) const {
    std::vector<double> x{omega};
    if (arch_only) {
      x.push_back(alpha);
    } else {
      const double s = alpha + beta;
      x.push_back(s);
      x.push_back(alpha / s);
    }
    if (innovation == Innovation::student_t && !fixed_nu) x.push_back(nu);
    return x;
  }

  std::vector<math::Bound> bounds(double nu_lo, double nu_hi) const {
    std::vector<math::Bound> b{math::Bound::positive()};
    if (arch_only) {
      b.push_back(math::Bound::interval(0.0, 1.0));
    } else {
      b.push_back(math::Bound::interval(0.0, 1.0));
      b.push_back(math::Bound::interval(0.0, 1.0));
    }
    if (innovation == Innovation::student_t && !fixed_nu) b.push_back(math::Bound::interval(nu_lo, nu_hi));
    return b;
  }
};

inline double negative_loglik(const Coordinates& c, std::span<const double> x,
                              std::span<const double> returns) {
  const GarchParams p = c.decode(x);
  if (!(p.omega > 0.0) || !(p.alpha + p.beta < 1.0) ||
      (p.innovation == Innovation::student_t && !(p.nu > 2.0)))
    return std::numeric_limits<double>::infinity();
  const double ll = loglik(p, returns);
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline std::vector<double> standardized_residuals(const GarchParams& p, std::span<const double> returns,
                                                  std::span<const double> sigma) {
  std::vector<double> z(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) z[t] = (returns[t] - p.mu) / sigma[t];
  return z;
}

inline std::vector<double> standardized_residuals(const GarchFit& fit) {
  return standardized_residuals(fit.params, fit.returns, fit.sigma);
}

// Maximum-likelihood fit. μ is the sample mean; the variance parameters start
// at α = 0.05, β = 0.90, ω = (1-α-β)·var and a second start near the ARCH
// boundary (α = 0.05, β = 0.05) guards against the persistence ridge.
inline GarchFit fit_garch(std::span<const double> returns, const FitOptions& options = {}) {
  if (returns.size() < kMinObservations)
    throw InsufficientDataError("fit_garch: need at least 50 observations, got " +
                                std::to_string(returns.size()));
  for (double r : returns)
    if (!std::isfinite(r)) throw FitError("fit_garch: non-finite return");
  if (std::adjacent_find(returns.begin(), returns.end(), std::not_equal_to<>()) == returns.end())
    throw FitError("fit_garch: returns are constant");
  const double mu = stats::mean(returns);
  double var = 0.0;
  for (double r : returns) var += (r - mu) * (r - mu);
  var /= static_cast<double>(returns.size());
  if (!(var > 0.0)) throw FitError("fit_garch: returns are constant");

  struct Start {
    double alpha, beta;
  };
  std::vector<Start> starts{{0.05, 0.90}};
  if (!options.arch_only) starts.push_back({0.05, 0.05});
  else starts = {{0.05, 0.0}};

  GarchFit best;
  best.loglik = -std::numeric_limits<double>::infinity();
  best.start_loglik = -std::numeric_limits<double>::infinity();

  auto run = [&](const detail::Coordinates& coords, const std::vector<double>& x0, double& start_ll) {
    const auto bounds = coords.bounds(options.nu_lower, options.nu_upper);
    const math::Objective f = [&](std::span<const double> x) {
      return detail::negative_loglik(coords, x, returns);
    };
    const double f0 = f(x0);
    if (!std::isfinite(f0)) throw FitError("fit_garch: likelihood not finite at start point");
    start_ll = std::max(start_ll, -f0);
    return math::minimize(f, x0, bounds, options.minimizer);
  };

  auto consider = [&](const detail::Coordinates& coords, const math::MinimizeResult& r) {
    if (-r.value > best.loglik) {
      best.params = coords.decode(r.x);
      best.loglik = -r.value;
      best.converged = r.converged();
    }
  };

  for (const Start& s : starts) {
    const double omega0 = (1.0 - s.alpha - s.beta) * var;
    if (options.innovation == Innovation::gaussian) {
      const detail::Coordinates coords{options.arch_only, Innovation::gaussian, std::nullopt, mu};
      consider(coords, run(coords, coords.encode(omega0, s.alpha, s.beta, 0.0), best.start_loglik));
      continue;
    }
    // Profile ν over the grid, then refine all parameters jointly.
    math::MinimizeResult profile_best;
    double profile_nu = 0.0;
    profile_best.value = std::numeric_limits<double>::infinity();
    for (double nu : options.nu_grid) {
      const detail::Coordinates fixed{options.arch_only, Innovation::student_t, nu, mu};
      auto r = run(fixed, fixed.encode(omega0, s.alpha, s.beta, nu), best.start_loglik);
      if (r.value < profile_best.value) {
        profile_best = std::move(r);
        profile_nu = nu;
      }
    }
    const detail::Coordinates fixed{options.arch_only, Innovation::student_t, profile_nu, mu};
    const GarchParams g = fixed.decode(profile_best.x);
    const detail::Coordinates joint{options.arch_only, Innovation::student_t, std::nullopt, mu};
    double unused = -std::numeric_limits<double>::infinity();
    auto r = run(joint, joint.encode(g.omega, g.alpha, g.beta, profile_nu), unused);
    r.reason = profile_best.converged() && r.converged() ? math::StopReason::converged
                                                         : math::StopReason::max_evaluations;
    consider(joint, r);
  }

  best.arch_only = options.arch_only;
  best.returns.assign(returns.begin(), returns.end());
  best.sigma = filter_sigma(best.params, returns);
  best.residuals = standardized_residuals(best.params, returns, best.sigma);
  return best;
}

// σ_{T+1..T+h}: one step from the last observation, then σ²_{T+k} = ω + (α+β)σ²_{T+k-1}.
inline std::vector<double> forecast_sigma(const GarchFit& fit, std::size_t horizon) {
  if (horizon == 0) throw DomainError("forecast_sigma: horizon must be >= 1");
  if (fit.returns.empty()) throw InsufficientDataError("forecast_sigma: empty fit");
  const GarchParams& p = fit.params;
  const double e = fit.returns.back() - p.mu;
  const double s = fit.sigma.back();
  std::vector<double> out(horizon);
  double var = p.omega + p.alpha * e * e + p.beta * s * s;
  out[0] = std::sqrt(var);
  for (std::size_t k = 1; k < horizon; ++k) {
    var = p.omega + (p.alpha + p.beta) * var;
    out[k] = std::sqrt(var);
  }
  return out;
}

struct SimulatedPath {
  std::vector<double> returns;
  std::vector<double> sigma;
  std::vector<double> z;
};

// Unit-variance innovation draw.
inline double draw_innovation(math::RandomStream& rng, Innovation kind, double nu) {
  const double g = rng.next_gaussian();
  if (kind == Innovation::gaussian) return g;
  const double t = g / std::sqrt(rng.next_chi_squared(nu) / nu);
  return t * std::sqrt((nu - 2.0) / nu);
}

inline SimulatedPath simulate_garch(const GarchParams& p, std::size_t length, math::RandomStream& rng) {
  p.validate();
  SimulatedPath out;
  out.returns.resize(length);
  out.sigma.resize(length);
  out.z.resize(length);
  double var = p.unconditional_variance();
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) {
      const double e = out.returns[t - 1] - p.mu;
      var = p.omega + p.alpha * e * e + p.beta * var;
    }
    out.sigma[t] = std::sqrt(var);
    out.z[t] = draw_innovation(rng, p.innovation, p.nu);
    out.returns[t] = p.mu + out.sigma[t] * out.z[t];
  }
  return out;
}

}  // namespace cdg::garch
