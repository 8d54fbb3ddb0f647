#pragma once

// DCC(1,1) on standardized residuals:
//   Q_t = (1-θ1-θ2) Q̄ + θ1 z_{t-1} z_{t-1}ᵀ + θ2 Q_{t-1},  Q_1 = Q̄,
//   R_t = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cdg/error.hpp"
#include "cdg/garch.hpp"
#include "cdg/math/linalg.hpp"
#include "cdg/math/optimize.hpp"
#include "cdg/math/random.hpp"

namespace cdg::dcc {

using math::CorrelationMatrix;
using math::Matrix;
using math::Vector;

struct DccParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Matrix qbar;

  void validate() const {
    if (!(theta1 >= 0.0) || !(theta2 >= 0.0)) throw DomainError("dcc: theta1 and theta2 must be >= 0");
    if (!(theta1 + theta2 < 1.0)) throw DomainError("dcc: theta1 + theta2 must be < 1");
    if (qbar.rows() < 1 || qbar.rows() != qbar.cols()) throw DimensionError("dcc: Q̄ must be square");
  }
};

struct DccPath {
  std::vector<Matrix> q;
  std::vector<CorrelationMatrix> r;
};

struct DccFit {
  DccParams params;
  std::vector<CorrelationMatrix> r_path;
  Matrix q_last;        // Q_T
  Vector z_last;        // z_T
  double loglik = 0.0;
  double start_loglik = 0.0;
  bool converged = false;
};

inline constexpr Eigen::Index kMinObservations = 50;

// Q̄ = ZᵀZ / T.
inline Matrix second_moment(const Matrix& z) {
  return (z.transpose() * z) / static_cast<double>(z.rows());
}

inline DccPath q_recursion(const DccParams& p, const Matrix& z) {
  p.validate();
  if (z.cols() != p.qbar.rows()) throw DimensionError("q_recursion: Z and Q̄ dimensions differ");
  DccPath out;
  out.q.reserve(static_cast<std::size_t>(z.rows()));
  out.r.reserve(static_cast<std::size_t>(z.rows()));
  Matrix q = p.qbar;
  const double keep = 1.0 - p.theta1 - p.theta2;
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    if (t > 0) {
      const Vector zt = z.row(t - 1).transpose();
      q = keep * p.qbar + p.theta1 * (zt * zt.transpose()) + p.theta2 * q;
    }
    out.q.push_back(q);
    out.r.emplace_back(math::normalize_to_correlation(q));
  }
  return out;
}

// Gaussian quasi-log-likelihood (correlation part): -½ Σ_t [ln|R_t| + zᵀR_t⁻¹z - zᵀz].
inline double loglik(const DccParams& p, const Matrix& z) {
  p.validate();
  const Eigen::Index n = z.cols();
  Matrix q = p.qbar;
  const double keep = 1.0 - p.theta1 - p.theta2;
  double ll = 0.0;
  Vector prev(n), cur(n);
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    cur = z.row(t).transpose();
    if (t > 0) q = keep * p.qbar + p.theta1 * (prev * prev.transpose()) + p.theta2 * q;
    const Matrix r = math::normalize_to_correlation(q);
    Matrix l;
    try {
      l = math::cholesky(r);
    } catch (const FactorizationError&) {
      return -std::numeric_limits<double>::infinity();
    }
    const Vector w = l.triangularView<Eigen::Lower>().solve(cur);
    ll -= 0.5 * (math::log_det_from_factor(l) + w.squaredNorm() - cur.squaredNorm());
    prev = cur;
  }
  return ll;
}

struct FitOptions {
  double theta1_start = 0.02;
  double theta2_start = 0.95;
  math::MinimizeOptions minimizer{};
};

// Correlation-targeted two-parameter fit; optimizer coordinates s = θ1+θ2, w = θ1/s.
inline DccFit fit_dcc(const Matrix& z, const FitOptions& options = {}) {
  if (z.cols() < 2) throw DimensionError("fit_dcc: need at least 2 assets");
  if (z.rows() < kMinObservations)
    throw InsufficientDataError("fit_dcc: need at least 50 observations, got " + std::to_string(z.rows()));
  if (!z.allFinite()) throw FitError("fit_dcc: non-finite residual");
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    if ((z.col(j).array() == z(0, j)).all())
      throw FitError("fit_dcc: residual column " + std::to_string(j) + " is constant");

  const Matrix qbar = second_moment(z);
  auto decode = [&](std::span<const double> x) {
    return DccParams{x[0] * x[1], x[0] * (1.0 - x[1]), qbar};
  };
  const math::Objective f = [&](std::span<const double> x) {
    const DccParams p = decode(x);
    if (!(p.theta1 + p.theta2 < 1.0)) return std::numeric_limits<double>::infinity();
    const double ll = loglik(p, z);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };
  const double s0 = options.theta1_start + options.theta2_start;
  const std::vector<double> x0{s0, options.theta1_start / s0};
  const std::vector<math::Bound> bounds{math::Bound::interval(0.0, 1.0), math::Bound::interval(0.0, 1.0)};
  const double f0 = f(x0);
  if (!std::isfinite(f0)) throw FitError("fit_dcc: likelihood not finite at start point");
  const math::MinimizeResult r = math::minimize(f, x0, bounds, options.minimizer);

  DccFit fit;
  fit.params = decode(r.x);
  fit.loglik = -r.value;
  fit.start_loglik = -f0;
  fit.converged = r.converged();
  DccPath path = q_recursion(fit.params, z);
  fit.r_path = std::move(path.r);
  fit.q_last = path.q.back();
  fit.z_last = z.row(z.rows() - 1).transpose();
  return fit;
}

// R_{T+1} from the last filtered state.
inline CorrelationMatrix forecast_correlation(const DccFit& fit) {
  const DccParams& p = fit.params;
  const Matrix q = (1.0 - p.theta1 - p.theta2) * p.qbar + p.theta1 * (fit.z_last * fit.z_last.transpose()) +
                   p.theta2 * fit.q_last;
  return CorrelationMatrix(math::normalize_to_correlation(q));
}

// H = D R D with D = diag(sigma).
inline Matrix covariance(const CorrelationMatrix& r, const Vector& sigma) {
  if (sigma.size() != r.dim()) throw DimensionError("covariance: sigma and R dimensions differ");
  Matrix h = sigma.asDiagonal() * r.matrix() * sigma.asDiagonal();
  return 0.5 * (h + h.transpose());
}

inline Matrix covariance_at(const DccFit& fit, const Vector& sigma, std::size_t t) {
  if (t >= fit.r_path.size()) throw DimensionError("covariance_at: index past end of path");
  return covariance(fit.r_path[t], sigma);
}

struct DccSimulation {
  Matrix returns;  // T x n
  Matrix sigma;    // T x n
  Matrix z;        // T x n, standardized, correlated through R_t
  std::vector<CorrelationMatrix> r_path;
};

// Gaussian draws e_t ~ N(0, I), z_t = L_t e_t with L_t the Cholesky factor of
// R_t, ε_{i,t} = σ_{i,t} z_{i,t}. Each marginal follows its GARCH recursion;
// the marginals' innovation family is not used here (z is gaussian).
inline DccSimulation simulate_dcc(const DccParams& p, const std::vector<garch::GarchParams>& marginals,
                                  std::size_t length, math::RandomStream& rng) {
  p.validate();
  const Eigen::Index n = p.qbar.rows();
  if (static_cast<Eigen::Index>(marginals.size()) != n)
    throw DimensionError("simulate_dcc: one marginal per asset required");
  for (const auto& m : marginals) m.validate();
  const Eigen::Index T = static_cast<Eigen::Index>(length);
  DccSimulation out;
  out.returns.resize(T, n);
  out.sigma.resize(T, n);
  out.z.resize(T, n);
  out.r_path.reserve(length);
  Vector var(n), e(n), prev_eps(n);
  for (Eigen::Index i = 0; i < n; ++i) var(i) = marginals[i].unconditional_variance();
  Matrix q = p.qbar;
  const double keep = 1.0 - p.theta1 - p.theta2;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      const Vector zp = out.z.row(t - 1).transpose();
      q = keep * p.qbar + p.theta1 * (zp * zp.transpose()) + p.theta2 * q;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& m = marginals[static_cast<std::size_t>(i)];
        var(i) = m.omega + m.alpha * prev_eps(i) * prev_eps(i) + m.beta * var(i);
      }
    }
    CorrelationMatrix r(math::normalize_to_correlation(q));
    const Matrix l = math::correlation_factor(r);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = rng.next_gaussian();
    const Vector zt = l * e;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = std::sqrt(var(i));
      out.sigma(t, i) = s;
      out.z(t, i) = zt(i);
      prev_eps(i) = s * zt(i);
      out.returns(t, i) = marginals[static_cast<std::size_t>(i)].mu + prev_eps(i);
    }
    out.r_path.push_back(std::move(r));
  }
  return out;
}

// Unit-variance marginals (ω = 1, α = β = 0, μ = 0): returns equal z.
inline DccSimulation simulate_dcc(const DccParams& p, std::size_t length, math::RandomStream& rng) {
  const std::vector<garch::GarchParams> unit(static_cast<std::size_t>(p.qbar.rows()),
                                             garch::GarchParams{1.0, 0.0, 0.0, 0.0});
  return simulate_dcc(p, unit, length, rng);
}

}  // namespace cdg::dcc
