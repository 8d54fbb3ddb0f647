#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cdg/copula.hpp"
#include "oracles.hpp"

using namespace cdg;
using copula::CopulaSpec;
using copula::Family;
using math::CorrelationMatrix;
using math::Matrix;

namespace {

std::vector<double> col(const Matrix& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    d = std::max({d, (i + 1.0) / n - x[i], x[i] - i / n});
  return d;
}

// Central mixed partial ∂²C/∂u∂v of an analytic CDF.
template <class F>
double mixed_partial(F&& c, double u, double v, double h) {
  return (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4.0 * h * h);
}

double clayton_cdf_oracle(double theta, double u, double v) {
  return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta);
}

double gumbel_cdf_oracle(double theta, double u, double v) {
  return std::exp(-std::pow(std::pow(-std::log(u), theta) + std::pow(-std::log(v), theta), 1.0 / theta));
}

// Bivariate t CDF via the conditional representation Y | X=x ~ scaled t_{ν+1}.
double bivariate_t_cdf_oracle(double a, double b, double rho, double nu) {
  auto integrand = [&](long double x) {
    const double xd = static_cast<double>(x);
    const double scale = std::sqrt((1.0 - rho * rho) * (nu + xd * xd) / (nu + 1.0));
    return oracle::t_density(x, nu) * static_cast<long double>(oracle::t_cdf_quadrature((b - rho * xd) / scale, nu + 1.0));
  };
  return static_cast<double>(oracle::simpson(integrand, -60.0L, static_cast<long double>(a), 1e-11L));
}

CopulaSpec gauss2(double rho) { return CopulaSpec::gaussian(CorrelationMatrix::bivariate(rho)); }

}  // namespace

TEST(PseudoObservations, DirectRanks) {
  Matrix x(3, 1);
  x << 10, 20, 30;
  const Matrix u = copula::pseudo_observations(x);
  EXPECT_DOUBLE_EQ(u(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(u(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(u(2, 0), 0.75);
}

TEST(PseudoObservations, InvariantUnderMonotoneTransform) {
  math::RandomStream rng(1, 0);
  Matrix x(200, 2);
  for (Eigen::Index i = 0; i < 200; ++i) x(i, 0) = x(i, 1) = rng.next_gaussian();
  x.col(1) = x.col(1).array().exp() * 3.0 + 1.0;
  const Matrix u = copula::pseudo_observations(x);
  EXPECT_EQ(u.col(0), u.col(1));
  for (Eigen::Index i = 0; i < 200; ++i) EXPECT_TRUE(u(i, 0) > 0.0 && u(i, 0) < 1.0);
}

TEST(PseudoObservations, TiesUseAverageRanks) {
  const std::vector<double> v{3, 1, 3, 2, 3, 1};
  Matrix x(6, 1);
  for (int i = 0; i < 6; ++i) x(i, 0) = v[i];
  const Matrix u = copula::pseudo_observations(x);
  const auto want = oracle::ranks_brute(v);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    EXPECT_DOUBLE_EQ(u(i, 0) * 7.0, want[i]);
    sum += u(i, 0) * 7.0;
  }
  EXPECT_DOUBLE_EQ(sum, 21.0);
}

TEST(Density, IndependenceCases) {
  const double p[2] = {0.13, 0.77};
  EXPECT_NEAR(copula::density(CopulaSpec::independence(2), p), 1.0, 1e-14);
  EXPECT_NEAR(copula::density(CopulaSpec::gumbel(1.0), p), 1.0, 1e-14);
  const double p3[3] = {0.2, 0.5, 0.9};
  EXPECT_NEAR(copula::density(CopulaSpec::independence(3), p3), 1.0, 1e-14);
}

TEST(Density, ArchimedeanMatchesMixedPartialOfCdf) {
  for (double theta : {0.5, 2.0, 6.0}) {
    const double p[2] = {0.3, 0.7};
    const double fd = mixed_partial([&](double a, double b) { return clayton_cdf_oracle(theta, a, b); }, 0.3, 0.7, 1e-4);
    EXPECT_NEAR(copula::density(CopulaSpec::clayton(theta), p) / fd, 1.0, 1e-4);
  }
  for (double theta : {1.3, 2.0, 5.0}) {
    for (auto [u, v] : {std::pair{0.3, 0.7}, std::pair{0.9, 0.85}, std::pair{0.05, 0.2}}) {
      const double p[2] = {u, v};
      const double fd = mixed_partial([&](double a, double b) { return gumbel_cdf_oracle(theta, a, b); }, u, v, 1e-4);
      EXPECT_NEAR(copula::density(CopulaSpec::gumbel(theta), p) / fd, 1.0, 1e-4);
    }
  }
}

TEST(Density, ClaytonTrivariateMatchesThirdMixedPartial) {
  const double theta = 1.5, h = 1e-3;
  auto c = [&](double a, double b, double d) {
    return std::pow(std::pow(a, -theta) + std::pow(b, -theta) + std::pow(d, -theta) - 2.0, -1.0 / theta);
  };
  const double u = 0.4, v = 0.6, w = 0.5;
  double fd = 0.0;
  for (int sa : {-1, 1})
    for (int sb : {-1, 1})
      for (int sc : {-1, 1}) fd += sa * sb * sc * c(u + sa * h, v + sb * h, w + sc * h);
  fd /= 8.0 * h * h * h;
  const double p[3] = {u, v, w};
  EXPECT_NEAR(copula::density(CopulaSpec::clayton(theta, 3), p) / fd, 1.0, 1e-4);
}

TEST(Density, EllipticalMatchesClosedForms) {
  const double rho = 0.6, u = 0.2, v = 0.9;
  const double x = math::std_normal_quantile(u), y = math::std_normal_quantile(v);
  const double joint = std::exp(-(x * x - 2 * rho * x * y + y * y) / (2 * (1 - rho * rho))) /
                       (2 * std::numbers::pi * std::sqrt(1 - rho * rho));
  const double p[2] = {u, v};
  EXPECT_NEAR(copula::density(gauss2(rho), p),
              joint / (math::std_normal_pdf(x) * math::std_normal_pdf(y)), 1e-12);

  const double nu = 5.0;
  const double tx = math::student_t_quantile(u, nu), ty = math::student_t_quantile(v, nu);
  const double q = (tx * tx - 2 * rho * tx * ty + ty * ty) / (1 - rho * rho);
  const double tjoint = std::pow(1 + q / nu, -(nu + 2) / 2) / (2 * std::numbers::pi * std::sqrt(1 - rho * rho));
  const double td = tjoint / static_cast<double>(oracle::t_density(tx, nu) * oracle::t_density(ty, nu));
  EXPECT_NEAR(copula::density(CopulaSpec::student_t(CorrelationMatrix::bivariate(rho), nu), p), td, 1e-10);
}

TEST(Density, Errors) {
  const double edge[2] = {0.0, 0.5};
  EXPECT_THROW(copula::density(gauss2(0.3), edge), DomainError);
  const double one[2] = {0.5, 1.0};
  EXPECT_THROW(copula::density(CopulaSpec::clayton(2.0), one), DomainError);
  const double p3[3] = {0.2, 0.5, 0.9};
  EXPECT_THROW(copula::density(CopulaSpec::gumbel(2.0), p3), DimensionError);
  EXPECT_THROW(CopulaSpec::clayton(0.0), DomainError);
  EXPECT_THROW(CopulaSpec::gumbel(0.9), DomainError);
  EXPECT_THROW(CopulaSpec::student_t(CorrelationMatrix(2), 2.0), DomainError);
}

TEST(Density, GumbelTrivariateMatchesMixedPartial) {
  // Third mixed central difference of C(u) = exp(−(Σ (−ln u_i)^θ)^{1/θ}).
  auto cdf = [](long double theta, const long double* u) {
    long double s = 0.0L;
    for (int i = 0; i < 3; ++i) s += std::pow(-std::log(u[i]), theta);
    return std::exp(-std::pow(s, 1.0L / theta));
  };
  const double h = 2e-4;
  for (double theta : {1.3, 2.0, 4.0}) {
    for (const auto& p : {std::array<double, 3>{0.2, 0.5, 0.9}, std::array<double, 3>{0.7, 0.75, 0.8},
                          std::array<double, 3>{0.05, 0.1, 0.3}}) {
      long double fd = 0.0L;
      for (int mask = 0; mask < 8; ++mask) {
        long double q[3];
        int sign = 1;
        for (int i = 0; i < 3; ++i) {
          const bool up = mask & (1 << i);
          q[i] = p[i] + (up ? h : -h);
          if (!up) sign = -sign;
        }
        fd += sign * cdf(theta, q);
      }
      fd /= 8.0L * h * h * h;
      EXPECT_NEAR(copula::density(CopulaSpec::gumbel(theta, 3), p) / static_cast<double>(fd), 1.0, 1e-4) << theta;
    }
  }
  const double p4[4] = {0.1, 0.4, 0.6, 0.95};
  EXPECT_NEAR(copula::density(CopulaSpec::gumbel(1.0, 4), p4), 1.0, 1e-12);
}

TEST(Density, IntegratesToOne) {
  math::RandomStream rng(2, 0);
  const std::size_t k = 1'000'000;
  const CopulaSpec specs[] = {gauss2(0.5), CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 5.0),
                              CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0)};
  Matrix u(static_cast<Eigen::Index>(k), 2);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    u(i, 0) = rng.next_uniform();
    u(i, 1) = rng.next_uniform();
  }
  for (const auto& s : specs) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double p[2] = {u(i, 0), u(i, 1)};
      sum += copula::density(s, p);
    }
    EXPECT_NEAR(sum / static_cast<double>(k), 1.0, 0.02) << copula::family_id(s.family);
  }
}

TEST(Cdf, GroundednessAndNormalization) {
  const CopulaSpec specs[] = {gauss2(0.4), CopulaSpec::student_t(CorrelationMatrix::bivariate(-0.3), 4.0),
                              CopulaSpec::clayton(2.0), CopulaSpec::gumbel(3.0)};
  for (const auto& s : specs) {
    const double zero[2] = {0.0, 0.7}, ones[2] = {1.0, 1.0}, marg[2] = {0.37, 1.0};
    EXPECT_EQ(copula::cdf(s, zero).value, 0.0);
    EXPECT_EQ(copula::cdf(s, ones).value, 1.0);
    EXPECT_NEAR(copula::cdf(s, marg).value, 0.37, 1e-15);
  }
}

TEST(Cdf, ClaytonClosedForm) {
  const double p[2] = {0.5, 0.5};
  EXPECT_NEAR(copula::cdf(CopulaSpec::clayton(2.0), p).value, 1.0 / std::sqrt(7.0), 1e-15);
  EXPECT_NEAR(1.0 / std::sqrt(7.0), 0.37796, 5e-6);
  const double q[3] = {0.3, 0.6, 0.8};
  EXPECT_NEAR(copula::cdf(CopulaSpec::clayton(1.5, 3), q).value,
              std::pow(std::pow(0.3, -1.5) + std::pow(0.6, -1.5) + std::pow(0.8, -1.5) - 2.0, -1.0 / 1.5), 1e-14);
}

TEST(Cdf, GaussianMatchesBivariateNormalOracle) {
  for (double rho : {-0.7, 0.0, 0.5, 0.9}) {
    for (auto [x1, x2] : {std::pair{-1.0, 0.5}, std::pair{0.3, 0.3}, std::pair{1.5, -0.2}}) {
      const double p[2] = {math::std_normal_cdf(x1), math::std_normal_cdf(x2)};
      const auto est = copula::cdf(gauss2(rho), p);
      EXPECT_LE(est.std_error, 1e-4);
      EXPECT_NEAR(est.value, oracle::bivariate_normal_cdf(x1, x2, rho), 4.0 * est.std_error + 1e-6);
    }
  }
  const double ind[2] = {0.3, 0.6};
  EXPECT_NEAR(copula::cdf(gauss2(0.0), ind).value, 0.18, 1e-6);
}

TEST(Cdf, StudentTMatchesConditionalOracle) {
  for (double rho : {-0.4, 0.6}) {
    const double nu = 5.0, x1 = -0.8, x2 = 0.4;
    const double p[2] = {math::student_t_cdf(x1, nu), math::student_t_cdf(x2, nu)};
    const auto est = copula::cdf(CopulaSpec::student_t(CorrelationMatrix::bivariate(rho), nu), p);
    EXPECT_LE(est.std_error, 1e-4);
    EXPECT_NEAR(est.value, bivariate_t_cdf_oracle(x1, x2, rho, nu), 4.0 * est.std_error + 1e-6);
  }
}

TEST(Cdf, TrivariateIndependenceAndComonotoneLimits) {
  const double p[3] = {0.3, 0.5, 0.8};
  const auto ind = copula::cdf(CopulaSpec::independence(3), p);
  EXPECT_NEAR(ind.value, 0.12, 4.0 * ind.std_error + 1e-6);
  const auto t = copula::cdf(CopulaSpec::student_t(CorrelationMatrix(3), 4.0), p);
  EXPECT_LE(t.std_error, 1e-4);
  // A t copula with identity Σ is not independent, but stays between 0 and min(u).
  EXPECT_GT(t.value, 0.0);
  EXPECT_LT(t.value, 0.3);
}

TEST(Cdf, NondecreasingOnGrid) {
  const CopulaSpec specs[] = {gauss2(0.5), CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 4.0),
                              CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0)};
  for (const auto& s : specs) {
    Matrix c(21, 21), se(21, 21);
    for (int a = 0; a <= 20; ++a)
      for (int b = 0; b <= 20; ++b) {
        const double p[2] = {a / 20.0, b / 20.0};
        const auto e = copula::cdf(s, p);
        c(a, b) = e.value;
        se(a, b) = e.std_error;
      }
    const double slack = 4.0 * se.maxCoeff();
    for (int a = 0; a <= 20; ++a)
      for (int b = 0; b <= 20; ++b) {
        if (a > 0) {
          EXPECT_GE(c(a, b), c(a - 1, b) - slack);
        }
        if (b > 0) {
          EXPECT_GE(c(a, b), c(a, b - 1) - slack);
        }
      }
  }
}

TEST(Sample, GaussianZeroCorrelation) {
  math::RandomStream rng(3, 0);
  const std::size_t k = 100'000;
  const Matrix u = copula::sample(gauss2(0.0), k, rng);
  std::vector<double> a(k), b(k);
  for (std::size_t i = 0; i < k; ++i) {
    a[i] = math::std_normal_quantile(u(i, 0));
    b[i] = math::std_normal_quantile(u(i, 1));
  }
  EXPECT_LT(std::fabs(*stats::pearson(a, b)), 3.0 / std::sqrt(static_cast<double>(k)));
}

TEST(Sample, UniformMarginsEveryFamily) {
  const std::size_t k = 100'000;
  const CopulaSpec specs[] = {gauss2(0.7), CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 3.0),
                              CopulaSpec::clayton(2.0, 3), CopulaSpec::gumbel(2.5, 3)};
  std::uint64_t stream = 0;
  for (const auto& s : specs) {
    math::RandomStream rng(4, stream++);
    const Matrix u = copula::sample(s, k, rng);
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      EXPECT_LT(ks_uniform(col(u, j)), 1.63 / std::sqrt(static_cast<double>(k))) << copula::family_id(s.family);
      EXPECT_GT(u.col(j).minCoeff(), 0.0);
      EXPECT_LT(u.col(j).maxCoeff(), 1.0);
    }
  }
}

TEST(Sample, KendallTauMaps) {
  const std::size_t k = 100'000;
  const CopulaSpec specs[] = {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0), gauss2(0.5),
                              CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 5.0)};
  for (const auto& s : specs) {
    math::RandomStream rng(5, 0);
    const Matrix u = copula::sample(s, k, rng);
    EXPECT_NEAR(*stats::kendall(col(u, 0), col(u, 1)), copula::kendall_tau(s), 0.01) << copula::family_id(s.family);
  }
  // Fast τ agrees with the brute-force pair count on a subsample.
  math::RandomStream rng(6, 0);
  const Matrix u = copula::sample(CopulaSpec::clayton(2.0), 2000, rng);
  EXPECT_NEAR(*stats::kendall(col(u, 0), col(u, 1)), oracle::kendall_brute(col(u, 0), col(u, 1)), 1e-12);
}

TEST(Sample, Deterministic) {
  math::RandomStream a(7, 3), b(7, 3);
  const auto s = CopulaSpec::gumbel(1.7);
  EXPECT_EQ(copula::sample(s, 500, a), copula::sample(s, 500, b));
}

TEST(TailDependence, Formulas) {
  auto td = copula::tail_dependence(CopulaSpec::clayton(1.0));
  EXPECT_EQ(td.lower, 0.5);
  EXPECT_EQ(td.upper, 0.0);
  td = copula::tail_dependence(CopulaSpec::gumbel(2.0));
  EXPECT_NEAR(td.upper, 2.0 - std::sqrt(2.0), 1e-15);
  EXPECT_EQ(td.lower, 0.0);
  td = copula::tail_dependence(gauss2(0.95));
  EXPECT_EQ(td.lower, 0.0);
  EXPECT_EQ(td.upper, 0.0);
  td = copula::tail_dependence(CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 4.0));
  const double want = 2.0 * oracle::t_cdf_quadrature(-std::sqrt(5.0 * 0.5 / 1.5), 5.0);
  EXPECT_NEAR(td.lower, want, 1e-9);
  EXPECT_EQ(td.lower, td.upper);
  EXPECT_GT(td.lower, 0.0);
  EXPECT_LT(td.lower, 1.0);
}

TEST(EmpiricalCopula, HandEnumeration) {
  Matrix u(3, 2);
  u << 1, 1, 2, 3, 3, 2;
  u /= 4.0;
  const double a[2] = {0.6, 0.6}, ones[2] = {1.0, 1.0}, low[2] = {0.2, 0.9};
  EXPECT_DOUBLE_EQ(copula::empirical_copula(u, a), 1.0 / 3.0);
  EXPECT_EQ(copula::empirical_copula(u, ones), 1.0);
  EXPECT_EQ(copula::empirical_copula(u, low), 0.0);
  const double at[2] = {0.5, 0.75};  // right-continuous: boundary points count
  EXPECT_DOUBLE_EQ(copula::empirical_copula(u, at), 2.0 / 3.0);
}

TEST(DensityGrid, MidpointsAndShape) {
  const auto g = copula::density_grid(CopulaSpec::clayton(2.0), 10);
  EXPECT_EQ(g.rows(), 10);
  const double p[2] = {0.05, 0.95};
  EXPECT_EQ(g(0, 9), copula::density(CopulaSpec::clayton(2.0), p));
  EXPECT_THROW(copula::density_grid(CopulaSpec::clayton(2.0, 3), 10), DimensionError);
}

TEST(FitCopula, GaussianRecoversRho) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    math::RandomStream rng(10, seed);
    const Matrix u = copula::pseudo_observations(copula::sample(gauss2(0.6), 5000, rng));
    const auto fit = copula::fit_copula(u, Family::gaussian);
    EXPECT_NEAR(fit.spec.sigma(0, 1), 0.6, 0.03);
    EXPECT_EQ(fit.parameters, 1u);
    EXPECT_NEAR(fit.loglik, copula::log_likelihood(fit.spec, u), 1e-6);
    // Optimum is at least as good as the normal-scores start.
    const Matrix x = copula::detail::normal_scores(u);
    const double r0 = *stats::pearson(col(x, 0), col(x, 1));
    EXPECT_GE(fit.loglik, copula::log_likelihood(gauss2(r0), u) - 1e-9);
  }
}

TEST(FitCopula, ClaytonRecoversTheta) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    math::RandomStream rng(11, seed);
    const Matrix u = copula::pseudo_observations(copula::sample(CopulaSpec::clayton(2.0), 5000, rng));
    const auto fit = copula::fit_copula(u, Family::clayton);
    EXPECT_GE(fit.spec.theta, 1.8);
    EXPECT_LE(fit.spec.theta, 2.2);
    EXPECT_TRUE(fit.converged);
  }
}

TEST(FitCopula, ClaytonOnIndependentData) {
  math::RandomStream rng(12, 0);
  const Matrix u = copula::pseudo_observations(copula::sample(CopulaSpec::independence(2), 5000, rng));
  const auto fit = copula::fit_copula(u, Family::clayton);
  EXPECT_LT(fit.spec.theta, 0.1);
  EXPECT_LT(std::fabs(fit.loglik), 5.0);
}

TEST(FitCopula, GumbelAndStudentT) {
  math::RandomStream rng(13, 0);
  Matrix u = copula::pseudo_observations(copula::sample(CopulaSpec::gumbel(2.0), 5000, rng));
  auto fit = copula::fit_copula(u, Family::gumbel);
  EXPECT_NEAR(fit.spec.theta, 2.0, 0.15);

  u = copula::pseudo_observations(
      copula::sample(CopulaSpec::student_t(CorrelationMatrix::bivariate(0.5), 5.0), 5000, rng));
  fit = copula::fit_copula(u, Family::student_t);
  EXPECT_NEAR(fit.spec.sigma(0, 1), 0.5, 0.04);
  EXPECT_GE(fit.spec.nu, 3.0);
  EXPECT_LE(fit.spec.nu, 9.0);
  EXPECT_EQ(fit.parameters, 2u);
  EXPECT_NEAR(fit.loglik, copula::log_likelihood(fit.spec, u), 1e-6);
  // Never below any grid point evaluated at the τ-implied Σ.
  const double rho0 = std::sin(0.5 * std::numbers::pi * *stats::kendall(col(u, 0), col(u, 1)));
  for (double nu : {3.0, 5.0, 10.0, 30.0})
    EXPECT_GE(fit.loglik, copula::log_likelihood(CopulaSpec::student_t(CorrelationMatrix::bivariate(rho0), nu), u) - 1e-9);
}

TEST(FitCopula, TrivariateFits) {
  Matrix s(3, 3);
  s << 1, 0.5, 0.3, 0.5, 1, -0.2, 0.3, -0.2, 1;
  math::RandomStream rng(14, 0);
  Matrix u = copula::pseudo_observations(copula::sample(CopulaSpec::gaussian(CorrelationMatrix(s)), 4000, rng));
  const auto g = copula::fit_copula(u, Family::gaussian);
  EXPECT_LT((g.spec.sigma.matrix() - s).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_EQ(g.parameters, 3u);

  u = copula::pseudo_observations(copula::sample(CopulaSpec::gumbel(1.8, 3), 3000, rng));
  const auto gu = copula::fit_copula(u, Family::gumbel);
  EXPECT_NEAR(gu.loglik, copula::log_likelihood(gu.spec, u), 1e-9 * std::fabs(gu.loglik));
  EXPECT_NEAR(gu.spec.theta, 1.8, 0.12);
  const auto cl = copula::fit_copula(u, Family::clayton);
  EXPECT_EQ(cl.spec.dim, 3);
}

TEST(FitCopula, Preconditions) {
  Matrix u = Matrix::Constant(40, 2, 0.5);
  EXPECT_THROW(copula::fit_copula(u, Family::gaussian), InsufficientDataError);
  u = Matrix::Constant(60, 2, 0.5);
  u(3, 1) = 1.0;
  EXPECT_THROW(copula::fit_copula(u, Family::clayton), DomainError);
}

TEST(Families, NamesRoundTrip) {
  for (Family f : copula::kAllFamilies) EXPECT_EQ(copula::parse_family(copula::family_id(f)), f);
  EXPECT_EQ(copula::parse_family("T"), Family::student_t);
  EXPECT_FALSE(copula::parse_family("frank"));
  EXPECT_EQ(copula::family_display_name(Family::student_t), "Student-t");
}
