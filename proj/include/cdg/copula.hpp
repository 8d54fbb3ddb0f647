#pragma once

// Parametric copulas (Gaussian, Student-t, Clayton, Gumbel) on pseudo-observations,
// plus the empirical copula.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdg/error.hpp"
#include "cdg/math/linalg.hpp"
#include "cdg/math/optimize.hpp"
#include "cdg/math/random.hpp"
#include "cdg/math/special.hpp"
#include "cdg/stats.hpp"

namespace cdg::copula {

using math::CorrelationMatrix;
using math::Matrix;
using math::Vector;

enum class Family { gaussian, student_t, clayton, gumbel };

inline constexpr Family kAllFamilies[] = {Family::gaussian, Family::student_t, Family::clayton,
                                          Family::gumbel};

// Machine identifier used in configs and JSON.
inline std::string_view family_id(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "student-t";
    case Family::clayton: return "clayton";
    case Family::gumbel: return "gumbel";
  }
  return "";
}

// Name used in report tables.
inline std::string_view family_display_name(Family f) {
  switch (f) {
    case Family::gaussian: return "Gaussian";
    case Family::student_t: return "Student-t";
    case Family::clayton: return "Clayton";
    case Family::gumbel: return "Gumbel";
  }
  return "";
}

inline std::optional<Family> parse_family(std::string_view text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "gaussian" || s == "normal") return Family::gaussian;
  if (s == "student-t" || s == "student_t" || s == "t" || s == "student") return Family::student_t;
  if (s == "clayton") return Family::clayton;
  if (s == "gumbel") return Family::gumbel;
  return std::nullopt;
}

struct CopulaSpec {
  Family family = Family::gaussian;
  Eigen::Index dim = 2;
  CorrelationMatrix sigma;  // elliptical families
  double nu = 0.0;          // student-t, > 2
  double theta = 0.0;       // clayton > 0, gumbel >= 1

  static CopulaSpec gaussian(CorrelationMatrix s) {
    CopulaSpec c;
    c.family = Family::gaussian;
    c.dim = s.dim();
    c.sigma = std::move(s);
    return c;
  }
  static CopulaSpec student_t(CorrelationMatrix s, double nu) {
    CopulaSpec c = gaussian(std::move(s));
    c.family = Family::student_t;
    c.nu = nu;
    c.validate();
    return c;
  }
  static CopulaSpec clayton(double theta, Eigen::Index dim = 2) {
    CopulaSpec c;
    c.family = Family::clayton;
    c.dim = dim;
    c.theta = theta;
    c.validate();
    return c;
  }
  static CopulaSpec gumbel(double theta, Eigen::Index dim = 2) {
    CopulaSpec c = clayton(1.0, dim);
    c.family = Family::gumbel;
    c.theta = theta;
    c.validate();
    return c;
  }
  static CopulaSpec independence(Eigen::Index dim) { return gaussian(CorrelationMatrix(dim)); }

  bool elliptical() const noexcept { return family == Family::gaussian || family == Family::student_t; }

  void validate() const {
    if (dim < 2) throw DimensionError("copula: dimension must be at least 2");
    switch (family) {
      case Family::student_t:
        if (!(nu > 2.0) || !std::isfinite(nu)) throw DomainError("student-t copula: nu must exceed 2");
        [[fallthrough]];
      case Family::gaussian:
        if (sigma.dim() != dim) throw DimensionError("elliptical copula: Σ dimension mismatch");
        break;
      case Family::clayton:
        if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("clayton copula: theta must be > 0");
        break;
      case Family::gumbel:
        if (!(theta >= 1.0) || !std::isfinite(theta)) throw DomainError("gumbel copula: theta must be >= 1");
        break;
    }
  }
};

// Number of free dependence parameters.
inline std::size_t parameter_count(Family f, Eigen::Index n) {
  const std::size_t pairs = static_cast<std::size_t>(n * (n - 1) / 2);
  switch (f) {
    case Family::gaussian: return pairs;
    case Family::student_t: return pairs + 1;
    default: return 1;
  }
}

// U[i][j] = average rank of x[i][j] within column j, divided by k+1.
inline Matrix pseudo_observations(const Matrix& x) {
  if (x.rows() < 2) throw InsufficientDataError("pseudo_observations: need at least 2 rows");
  Matrix u(x.rows(), x.cols());
  const double denom = static_cast<double>(x.rows()) + 1.0;
  std::vector<double> col(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) col[static_cast<std::size_t>(i)] = x(i, j);
    const auto r = stats::average_ranks(col);
    for (Eigen::Index i = 0; i < x.rows(); ++i) u(i, j) = r[static_cast<std::size_t>(i)] / denom;
  }
  return u;
}

namespace detail {

inline void require_interior(std::span<const double> u) {
  for (double v : u)
    if (!(v > 0.0 && v < 1.0)) throw DomainError("copula density: point must lie strictly inside (0,1)^n");
}

// Lower Cholesky factor of a correlation matrix from canonical partial
// correlations z (row-major over i < j, j outer): always unit-diagonal PD.
inline Matrix cpc_to_factor(std::span<const double> z, Eigen::Index n) {
  Matrix l = Matrix::Zero(n, n);
  l(0, 0) = 1.0;
  std::size_t k = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    double rest = 1.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      l(j, i) = z[k++] * std::sqrt(rest);
      rest -= l(j, i) * l(j, i);
    }
    l(j, j) = std::sqrt(std::max(rest, 0.0));
  }
  return l;
}

inline std::vector<double> factor_to_cpc(const Matrix& l) {
  std::vector<double> z;
  for (Eigen::Index j = 1; j < l.rows(); ++j) {
    double rest = 1.0;
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = l(j, i) / std::sqrt(std::max(rest, 1e-300));
      z.push_back(std::clamp(v, -0.999, 0.999));
      rest -= l(j, i) * l(j, i);
    }
  }
  return z;
}

inline Matrix factor_to_correlation(const Matrix& l) {
  Matrix s = l * l.transpose();
  s = 0.5 * (s + s.transpose());
  s.diagonal().setOnes();
  return s;
}

// Per-row quadratic forms xᵀΣ⁻¹x from the Cholesky factor, plus the log-determinant.
inline void quadratic_forms(const Matrix& l, const Matrix& x, std::vector<double>& q, double& log_det) {
  const Eigen::Index n = l.rows();
  log_det = math::log_det_from_factor(l);
  q.resize(static_cast<std::size_t>(x.rows()));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = x(t, i);
      for (Eigen::Index k = 0; k < i; ++k) v -= l(i, k) * w[static_cast<std::size_t>(k)];
      v /= l(i, i);
      w[static_cast<std::size_t>(i)] = v;
      s += v * v;
    }
    q[static_cast<std::size_t>(t)] = s;
  }
}

inline Matrix normal_scores(const Matrix& u) {
  Matrix x(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) x(i, j) = math::std_normal_quantile(u(i, j));
  return x;
}

inline Matrix t_scores(const Matrix& u, double nu) {
  Matrix x(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) x(i, j) = math::student_t_quantile(u(i, j), nu);
  return x;
}

// Σ log c for the gaussian copula given normal scores.
inline double gaussian_loglik(const Matrix& l, const Matrix& x) {
  std::vector<double> q;
  double log_det;
  quadratic_forms(l, x, q, log_det);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    // Same summation order as quadratic_forms, so Σ = I gives exactly 0 per row.
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) s += x(t, j) * x(t, j);
    ll += -0.5 * (log_det + q[static_cast<std::size_t>(t)] - s);
  }
  return ll;
}

// Σ log c for the t copula given t_ν scores.
inline double t_loglik(const Matrix& l, const Matrix& x, double nu) {
  const double n = static_cast<double>(x.cols());
  std::vector<double> q;
  double log_det;
  quadratic_forms(l, x, q, log_det);
  const double c = math::log_gamma(0.5 * (nu + n)) + (n - 1.0) * math::log_gamma(0.5 * nu) -
                   n * math::log_gamma(0.5 * (nu + 1.0)) - 0.5 * log_det;
  double ll = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    double marg = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) marg += std::log1p(x(t, j) * x(t, j) / nu);
    ll += c - 0.5 * (nu + n) * std::log1p(q[static_cast<std::size_t>(t)] / nu) + 0.5 * (nu + 1.0) * marg;
  }
  return ll;
}

inline double clayton_log_density(double theta, std::span<const double> u) {
  const double n = static_cast<double>(u.size());
  double log_front = 0.0, sum_log_u = 0.0, m = 0.0, expm1_sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    log_front += std::log1p(static_cast<double>(j) * theta);
    const double lu = std::log(u[j]);
    sum_log_u += lu;
    m = std::max(m, -theta * lu);
  }
  double log_s;  // log(Σ u^{-θ} - n + 1)
  if (m < 30.0) {
    for (double v : u) expm1_sum += std::expm1(-theta * std::log(v));
    log_s = std::log1p(expm1_sum);
  } else {
    double acc = -(n - 1.0) * std::exp(-m);
    for (double v : u) acc += std::exp(-theta * std::log(v) - m);
    log_s = m + std::log(acc);
  }
  return log_front - (theta + 1.0) * sum_log_u - (n + 1.0 / theta) * log_s;
}

inline double log_sum_exp2(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double gumbel_log_density(double theta, double u, double v) {
  const double x = -std::log(u), y = -std::log(v);
  const double lx = std::log(x), ly = std::log(y);
  const double log_w = log_sum_exp2(theta * lx, theta * ly);
  const double a = std::exp(log_w / theta);
  return -a + x + y + (theta - 1.0) * (lx + ly) + (1.0 / theta - 2.0) * log_w + std::log(a + theta - 1.0);
}

// n-dimensional Gumbel: c = |ψ^{(n)}(s)| Π |φ'(u_i)| with ψ(s) = exp(−s^{1/θ}),
// φ(u) = (−ln u)^θ, s = Σ φ(u_i). With h(s) = −s^{α}, α = 1/θ, the derivative
// ratios P_m = |ψ^{(m)}|/ψ obey P_m = Σ_k C(m−1,k) |h^{(k+1)}| P_{m−1−k}, and every
// term is nonnegative. Scaled form: P_m = s^{−m} Q_m, |h^{(j)}| = s^{−j} G_j.
inline double gumbel_log_density(double theta, std::span<const double> u) {
  if (u.size() == 2) return gumbel_log_density(theta, u[0], u[1]);
  const std::size_t n = u.size();
  const double a = 1.0 / theta;
  double s = 0.0, log_phi_prime = 0.0;
  for (double v : u) {
    const double x = -std::log(v);
    s += std::pow(x, theta);
    log_phi_prime += std::log(theta) + (theta - 1.0) * std::log(x) + x;
  }
  const double sa = std::pow(s, a);
  std::vector<double> g(n + 1), q(n + 1);
  double prod = a;
  for (std::size_t j = 1; j <= n; ++j) {
    if (j > 1) prod *= static_cast<double>(j - 1) - a;
    g[j] = prod * sa;
  }
  q[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m) {
    double acc = 0.0, binom = 1.0;  // C(m−1, k)
    for (std::size_t k = 0; k < m; ++k) {
      acc += binom * g[k + 1] * q[m - 1 - k];
      binom = binom * static_cast<double>(m - 1 - k) / static_cast<double>(k + 1);
    }
    q[m] = acc;
  }
  return -sa - static_cast<double>(n) * std::log(s) + std::log(q[n]) + log_phi_prime;
}

}  // namespace detail

inline double log_density(const CopulaSpec& spec, std::span<const double> u) {
  spec.validate();
  if (static_cast<Eigen::Index>(u.size()) != spec.dim) throw DimensionError("copula density: point dimension");
  detail::require_interior(u);
  switch (spec.family) {
    case Family::gaussian:
    case Family::student_t: {
      Matrix x(1, spec.dim);
      for (Eigen::Index j = 0; j < spec.dim; ++j)
        x(0, j) = spec.family == Family::gaussian ? math::std_normal_quantile(u[j])
                                                  : math::student_t_quantile(u[j], spec.nu);
      const Matrix l = math::correlation_factor(spec.sigma);
      return spec.family == Family::gaussian ? detail::gaussian_loglik(l, x) : detail::t_loglik(l, x, spec.nu);
    }
    case Family::clayton:
      return detail::clayton_log_density(spec.theta, u);
    case Family::gumbel:
      return detail::gumbel_log_density(spec.theta, u);
  }
  return 0.0;
}

inline double density(const CopulaSpec& spec, std::span<const double> u) {
  return std::exp(log_density(spec, u));
}

// Σ_t log c(U_t).
inline double log_likelihood(const CopulaSpec& spec, const Matrix& u) {
  spec.validate();
  if (u.cols() != spec.dim) throw DimensionError("log_likelihood: dimension mismatch");
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      if (!(u(i, j) > 0.0 && u(i, j) < 1.0)) throw DomainError("log_likelihood: U must lie in (0,1)");
  switch (spec.family) {
    case Family::gaussian:
      return detail::gaussian_loglik(math::correlation_factor(spec.sigma), detail::normal_scores(u));
    case Family::student_t:
      return detail::t_loglik(math::correlation_factor(spec.sigma), detail::t_scores(u, spec.nu), spec.nu);
    default: {
      double ll = 0.0;
      std::vector<double> row(static_cast<std::size_t>(u.cols()));
      for (Eigen::Index i = 0; i < u.rows(); ++i) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) row[static_cast<std::size_t>(j)] = u(i, j);
        ll += log_density(spec, row);
      }
      return ll;
    }
  }
}

struct CdfOptions {
  double target_std_error = 1e-4;
  std::size_t max_points = std::size_t{1} << 20;  // per random shift
  int shifts = 12;
};

struct CdfEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for closed forms
};

namespace detail {

inline constexpr double kSqrtPrimes[] = {1.4142135623730951, 1.7320508075688772, 2.23606797749979,
                                         2.6457513110645907, 3.3166247903554,    3.605551275463989,
                                         4.123105625617661,  4.358898943540674,  4.795831523312719,
                                         5.385164807134504,  5.5677643628300215, 6.082762530298219};

// Genz's sequential conditioning for P(X ≤ b) with X = L w, w gaussian (nu = 0) or
// multivariate t (nu > 0), integrated with a randomly shifted rank-1 lattice.
inline CdfEstimate elliptical_cdf(const Matrix& l, const std::vector<double>& b, double nu,
                                  const CdfOptions& options) {
  const std::size_t n = b.size();
  if (n - 1 > std::size(kSqrtPrimes)) throw DimensionError("copula cdf: dimension above 13 unsupported");
  auto cdf1 = [&](double x, double dof) {
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return dof > 0 ? math::student_t_cdf(x, dof) : math::std_normal_cdf(x);
  };
  auto quant1 = [&](double p, double dof) {
    p = std::clamp(p, 1e-300, std::nextafter(1.0, 0.0));
    return dof > 0 ? math::student_t_quantile(p, dof) : math::std_normal_quantile(p);
  };
  const double e1 = cdf1(b[0] / l(0, 0), nu);
  if (n == 1) return {e1, 0.0};

  math::RandomStream rng(0x243F6A8885A308D3ull, n);
  std::vector<std::vector<double>> shift(static_cast<std::size_t>(options.shifts), std::vector<double>(n - 1));
  for (auto& s : shift)
    for (double& v : s) v = rng.next_uniform();

  std::vector<double> w(n);
  auto integrand = [&](const std::vector<double>& x) {
    double e = e1, f = e1, ssq = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double dof_prev = nu > 0 ? nu + static_cast<double>(i - 1) : 0.0;
      double wi = quant1(x[i - 1] * e, dof_prev);
      if (nu > 0) wi *= std::sqrt((nu + ssq) / dof_prev);
      w[i - 1] = wi;
      ssq += wi * wi;
      double s = b[i];
      if (std::isinf(s)) {
        e = 1.0;
      } else {
        for (std::size_t k = 0; k < i; ++k) s -= l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * w[k];
        double arg = s / l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        const double dof = nu > 0 ? nu + static_cast<double>(i) : 0.0;
        if (nu > 0) arg *= std::sqrt(dof / (nu + ssq));
        e = cdf1(arg, dof);
      }
      f *= e;
      if (f == 0.0) break;
    }
    return f;
  };

  std::vector<double> sums(shift.size(), 0.0), x(n - 1);
  std::size_t done = 0, target = 1024;
  CdfEstimate est;
  for (;;) {
    for (std::size_t s = 0; s < shift.size(); ++s) {
      for (std::size_t k = done + 1; k <= target; ++k) {
        for (std::size_t d = 0; d + 1 < n; ++d) {
          double v = std::fmod(static_cast<double>(k) * kSqrtPrimes[d] + shift[s][d], 1.0);
          x[d] = std::fabs(2.0 * v - 1.0);  // baker's transform
        }
        sums[s] += integrand(x);
      }
    }
    done = target;
    double mean = 0.0;
    for (double v : sums) mean += v / static_cast<double>(done);
    mean /= static_cast<double>(sums.size());
    double var = 0.0;
    for (double v : sums) var += (v / static_cast<double>(done) - mean) * (v / static_cast<double>(done) - mean);
    var /= static_cast<double>(sums.size() * (sums.size() - 1));
    est = {std::clamp(mean, 0.0, 1.0), std::sqrt(var)};
    if (est.std_error <= options.target_std_error || target >= options.max_points) break;
    target *= 2;
  }
  return est;
}

}  // namespace detail

// C(u). Closed forms for the Archimedean families; lattice QMC for elliptical ones.
inline CdfEstimate cdf(const CopulaSpec& spec, std::span<const double> u, const CdfOptions& options = {}) {
  spec.validate();
  if (static_cast<Eigen::Index>(u.size()) != spec.dim) throw DimensionError("copula cdf: point dimension");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("copula cdf: point must lie in [0,1]^n");
  if (std::any_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) return {0.0, 0.0};
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < spec.dim; ++j)
    if (u[static_cast<std::size_t>(j)] < 1.0) active.push_back(j);
  if (active.empty()) return {1.0, 0.0};
  if (active.size() == 1) return {u[static_cast<std::size_t>(active[0])], 0.0};

  switch (spec.family) {
    case Family::clayton: {
      double s = 1.0;
      for (double v : u) s += std::expm1(-spec.theta * std::log(v));
      return {std::exp(-std::log(s) / spec.theta), 0.0};
    }
    case Family::gumbel: {
      double s = 0.0;
      for (double v : u)
        if (v < 1.0) s += std::pow(-std::log(v), spec.theta);
      return {std::exp(-std::pow(s, 1.0 / spec.theta)), 0.0};
    }
    default: {
      // Components at 1 marginalize out.
      const Eigen::Index m = static_cast<Eigen::Index>(active.size());
      Matrix sub(m, m);
      std::vector<double> b(static_cast<std::size_t>(m));
      for (Eigen::Index i = 0; i < m; ++i) {
        const double ui = u[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])];
        b[static_cast<std::size_t>(i)] = spec.family == Family::gaussian ? math::std_normal_quantile(ui)
                                                                         : math::student_t_quantile(ui, spec.nu);
        for (Eigen::Index j = 0; j < m; ++j)
          sub(i, j) = spec.sigma(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
      }
      const Matrix l = math::correlation_factor(CorrelationMatrix(sub, 1e-8));
      return detail::elliptical_cdf(l, b, spec.family == Family::gaussian ? 0.0 : spec.nu, options);
    }
  }
}

namespace detail {

inline double clamp_open_unit(double v) {
  return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

}  // namespace detail

// k draws from the copula; entries lie strictly inside (0,1).
inline Matrix sample(const CopulaSpec& spec, std::size_t k, math::RandomStream& rng) {
  spec.validate();
  const Eigen::Index n = spec.dim;
  Matrix u(static_cast<Eigen::Index>(k), n);
  Matrix l;
  if (spec.elliptical()) l = math::correlation_factor(spec.sigma);
  Vector g(n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
    switch (spec.family) {
      case Family::gaussian:
      case Family::student_t: {
        for (Eigen::Index j = 0; j < n; ++j) g(j) = rng.next_gaussian();
        const Vector z = l * g;
        if (spec.family == Family::gaussian) {
          for (Eigen::Index j = 0; j < n; ++j) u(i, j) = detail::clamp_open_unit(math::std_normal_cdf(z(j)));
        } else {
          const double scale = std::sqrt(spec.nu / rng.next_chi_squared(spec.nu));
          for (Eigen::Index j = 0; j < n; ++j)
            u(i, j) = detail::clamp_open_unit(math::student_t_cdf(z(j) * scale, spec.nu));
        }
        break;
      }
      case Family::clayton: {
        const double v = rng.next_gamma(1.0 / spec.theta);
        for (Eigen::Index j = 0; j < n; ++j)
          u(i, j) = detail::clamp_open_unit(std::exp(-std::log1p(rng.next_exponential() / v) / spec.theta));
        break;
      }
      case Family::gumbel: {
        const double s = rng.next_positive_stable(1.0 / spec.theta);
        for (Eigen::Index j = 0; j < n; ++j)
          u(i, j) = detail::clamp_open_unit(std::exp(-std::pow(rng.next_exponential() / s, 1.0 / spec.theta)));
        break;
      }
    }
  }
  return u;
}

struct TailDependence {
  double lower = 0.0;
  double upper = 0.0;
};

// Tail-dependence coefficients of the (i, j) bivariate margin.
inline TailDependence tail_dependence(const CopulaSpec& spec, Eigen::Index i = 0, Eigen::Index j = 1) {
  spec.validate();
  switch (spec.family) {
    case Family::gaussian: {
      const double rho = spec.sigma(i, j);
      return rho >= 1.0 ? TailDependence{1.0, 1.0} : TailDependence{};
    }
    case Family::student_t: {
      const double rho = spec.sigma(i, j);
      if (rho >= 1.0) return {1.0, 1.0};
      if (rho <= -1.0) return {};
      const double lam =
          2.0 * math::student_t_cdf(-std::sqrt((spec.nu + 1.0) * (1.0 - rho) / (1.0 + rho)), spec.nu + 1.0);
      return {lam, lam};
    }
    case Family::clayton:
      return {std::exp2(-1.0 / spec.theta), 0.0};
    case Family::gumbel:
      return {0.0, 2.0 - std::exp2(1.0 / spec.theta)};
  }
  return {};
}

// Population Kendall τ of the (i, j) margin.
inline double kendall_tau(const CopulaSpec& spec, Eigen::Index i = 0, Eigen::Index j = 1) {
  spec.validate();
  switch (spec.family) {
    case Family::gaussian:
    case Family::student_t: return 2.0 / std::numbers::pi * std::asin(spec.sigma(i, j));
    case Family::clayton: return spec.theta / (spec.theta + 2.0);
    case Family::gumbel: return 1.0 - 1.0 / spec.theta;
  }
  return 0.0;
}

// C_k(u) = (1/k) Σ_i Π_j 1(U_ij ≤ u_j).
inline double empirical_copula(const Matrix& u, std::span<const double> point) {
  if (static_cast<Eigen::Index>(point.size()) != u.cols()) throw DimensionError("empirical_copula: dimension");
  if (u.rows() == 0) throw InsufficientDataError("empirical_copula: empty sample");
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    bool inside = true;
    for (Eigen::Index j = 0; j < u.cols() && inside; ++j) inside = u(i, j) <= point[static_cast<std::size_t>(j)];
    count += inside;
  }
  return static_cast<double>(count) / static_cast<double>(u.rows());
}

// Density on the midpoints of a res × res grid over (0,1)²; entry (a, b) is c((a+½)/res, (b+½)/res).
inline Matrix density_grid(const CopulaSpec& spec, std::size_t resolution) {
  if (spec.dim != 2) throw DimensionError("density_grid: bivariate copulas only");
  if (resolution == 0) throw DomainError("density_grid: resolution must be positive");
  const Eigen::Index r = static_cast<Eigen::Index>(resolution);
  Matrix g(r, r);
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b) {
      const double p[2] = {(static_cast<double>(a) + 0.5) / static_cast<double>(r),
                           (static_cast<double>(b) + 0.5) / static_cast<double>(r)};
      g(a, b) = density(spec, p);
    }
  return g;
}

struct FitOptions {
  std::vector<double> nu_grid{3, 4, 5, 6, 8, 10, 15, 20, 30};
  double theta_max = 100.0;
  double nu_tolerance = 1e-4;  // simplex diameter for the 1-D ν refinement (logit scale)
  math::MinimizeOptions minimizer{};
};

struct CopulaFit {
  CopulaSpec spec;
  double loglik = 0.0;
  bool converged = true;
  std::size_t parameters = 0;
};

namespace detail {

inline void require_pseudo_observations(const Matrix& u) {
  if (u.cols() < 2) throw DimensionError("fit_copula: need at least 2 columns");
  if (u.rows() < 50) throw InsufficientDataError("fit_copula: need at least 50 observations");
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      if (!(u(i, j) > 0.0 && u(i, j) < 1.0)) throw DomainError("fit_copula: U must lie in (0,1)");
}

inline std::vector<double> column(const Matrix& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

inline Matrix kendall_matrix(const Matrix& u) {
  const Eigen::Index n = u.cols();
  Matrix tau = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const auto t = stats::kendall(column(u, i), column(u, j));
      tau(i, j) = tau(j, i) = t.value_or(0.0);
    }
  return tau;
}

inline double mean_off_diagonal(const Matrix& m) {
  double s = 0.0;
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) s += m(i, j);
  return s / static_cast<double>(n * (n - 1) / 2);
}

// Maximizes ll(L) over canonical partial correlations, starting from `start`.
template <class LogLik>
math::MinimizeResult polish_correlation(const CorrelationMatrix& start, LogLik&& ll,
                                        const math::MinimizeOptions& options) {
  const Eigen::Index n = start.dim();
  const std::vector<double> z0 = factor_to_cpc(math::correlation_factor(start));
  const std::vector<math::Bound> bounds(z0.size(), math::Bound::interval(-1.0, 1.0));
  const math::Objective f = [&](std::span<const double> z) {
    const Matrix l = cpc_to_factor(z, n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(l(i, i) > 1e-8)) return std::numeric_limits<double>::infinity();
    const double v = ll(l);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };
  return math::minimize(f, z0, bounds, options);
}

inline CorrelationMatrix correlation_from_cpc(std::span<const double> z, Eigen::Index n) {
  return CorrelationMatrix(factor_to_correlation(cpc_to_factor(z, n)), 1e-8);
}

inline CopulaFit fit_gaussian(const Matrix& u, const FitOptions& options) {
  const Matrix x = normal_scores(u);
  const Eigen::Index n = u.cols();
  Matrix c = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      c(i, j) = c(j, i) = stats::pearson(column(x, i), column(x, j)).value_or(0.0);
  const CorrelationMatrix start = math::repair_correlation(c).matrix;
  const auto r = polish_correlation(start, [&](const Matrix& l) { return gaussian_loglik(l, x); },
                                    options.minimizer);
  CopulaFit fit;
  fit.spec = CopulaSpec::gaussian(correlation_from_cpc(r.x, n));
  fit.loglik = -r.value;
  fit.converged = r.converged();
  return fit;
}

inline CopulaFit fit_student_t(const Matrix& u, const FitOptions& options) {
  const Eigen::Index n = u.cols();
  Matrix tau = kendall_matrix(u);
  Matrix c = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) c(i, j) = c(j, i) = std::sin(0.5 * std::numbers::pi * tau(i, j));
  CorrelationMatrix sigma = math::repair_correlation(c).matrix;
  Matrix l = math::correlation_factor(sigma);

  const auto& grid = options.nu_grid;
  if (grid.empty()) throw DomainError("fit_copula: empty nu grid");
  const double nu_lo = grid.front(), nu_hi = grid.back();
  auto profile = [&](double nu) { return t_loglik(l, t_scores(u, nu), nu); };

  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double v = profile(grid[g]);
    if (v > best_ll) {
      best_ll = v;
      best = g;
    }
  }
  bool converged = true;
  // Local refinement between the neighbours of the best grid point.
  auto refine_nu = [&](double start) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[best + 1 == grid.size() ? best : best + 1];
    if (!(hi > lo)) return start;
    const double s = std::clamp(start, lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo));
    const std::vector<double> x0{s};
    const std::vector<math::Bound> b{math::Bound::interval(lo, hi)};
    math::MinimizeOptions opts = options.minimizer;
    opts.tol = options.nu_tolerance;
    const auto r = math::minimize(
        [&](std::span<const double> v) {
          const double ll = profile(v[0]);
          return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
        },
        x0, b, opts);
    converged = converged && r.converged();
    return r.x[0];
  };
  double nu = refine_nu(grid[best]);
  nu = std::clamp(nu, nu_lo, nu_hi);

  const Matrix x = t_scores(u, nu);
  const auto r = polish_correlation(sigma, [&](const Matrix& f) { return t_loglik(f, x, nu); }, options.minimizer);
  converged = converged && r.converged();
  sigma = correlation_from_cpc(r.x, n);
  l = math::correlation_factor(sigma);
  nu = std::clamp(refine_nu(nu), nu_lo, nu_hi);

  CopulaFit fit;
  fit.spec = CopulaSpec::student_t(sigma, nu);
  fit.loglik = t_loglik(l, t_scores(u, nu), nu);
  fit.converged = converged;
  return fit;
}

inline CopulaFit fit_archimedean(const Matrix& u, Family family, const FitOptions& options) {
  const Eigen::Index n = u.cols();
  const double tau = mean_off_diagonal(kendall_matrix(u));
  double lo, theta0;
  if (family == Family::clayton) {
    lo = 0.0;
    theta0 = tau > 0.0 ? 2.0 * tau / (1.0 - tau) : 0.05;
  } else {
    lo = 1.0;
    theta0 = tau > 0.0 ? 1.0 / (1.0 - tau) : 1.05;
  }
  theta0 = std::clamp(theta0, lo + 1e-3, options.theta_max - 1e-3);

  std::vector<double> row(static_cast<std::size_t>(n));
  auto ll = [&](double theta) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < u.rows(); ++t) {
      for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = u(t, j);
      s += family == Family::gumbel ? gumbel_log_density(theta, row) : clayton_log_density(theta, row);
    }
    return s;
  };
  const std::vector<double> x0{theta0};
  const std::vector<math::Bound> b{math::Bound::interval(lo, options.theta_max)};
  const auto r = math::minimize(
      [&](std::span<const double> v) {
        const double s = ll(v[0]);
        return std::isfinite(s) ? -s : std::numeric_limits<double>::infinity();
      },
      x0, b, options.minimizer);
  CopulaFit fit;
  fit.spec = family == Family::clayton ? CopulaSpec::clayton(r.x[0], n) : CopulaSpec::gumbel(r.x[0], n);
  fit.loglik = -r.value;
  fit.converged = r.converged();
  return fit;
}

}  // namespace detail

// Maximum pseudo-likelihood fit on pseudo-observations U (k × n, k ≥ 50).
inline CopulaFit fit_copula(const Matrix& u, Family family, const FitOptions& options = {}) {
  detail::require_pseudo_observations(u);
  CopulaFit fit;
  switch (family) {
    case Family::gaussian: fit = detail::fit_gaussian(u, options); break;
    case Family::student_t: fit = detail::fit_student_t(u, options); break;
    default: fit = detail::fit_archimedean(u, family, options); break;
  }
  fit.parameters = parameter_count(family, u.cols());
  return fit;
}

}  // namespace cdg::copula
