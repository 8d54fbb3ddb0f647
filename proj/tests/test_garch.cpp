#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cdg/garch.hpp"
#include "oracles.hpp"

using namespace cdg;
using garch::GarchParams;
using garch::Innovation;

namespace {

std::vector<double> simulated_returns(const GarchParams& p, std::size_t n, std::uint64_t seed) {
  math::RandomStream rng(seed, 0);
  return garch::simulate_garch(p, n, rng).returns;
}

garch::FitOptions gaussian_fit() {
  garch::FitOptions o;
  o.innovation = Innovation::gaussian;
  return o;
}

double gaussian_loglik_oracle(const GarchParams& p, const std::vector<double>& r) {
  const auto s = oracle::garch_sigma(p.omega, p.alpha, p.beta, p.mu, r);
  double ll = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double z = (r[t] - p.mu) / s[t];
    ll += std::log(std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) / s[t]);
  }
  return ll;
}

}  // namespace

TEST(FilterSigma, ConstantWhenNoDynamics) {
  const GarchParams p{2.0, 0.0, 0.0, 0.1};
  const auto s = garch::filter_sigma(p, std::vector<double>{0.3, -5.0, 10.0, 0.0});
  for (double v : s) EXPECT_DOUBLE_EQ(v, std::sqrt(2.0));
}

TEST(FilterSigma, FixedPointWithZeroShocks) {
  const GarchParams p{0.5, 0.0, 0.5, 0.0};
  const auto s = garch::filter_sigma(p, std::vector<double>(40, 0.0));
  for (double v : s) EXPECT_NEAR(v * v, 1.0, 1e-15);
  // From a perturbed start the same recursion contracts geometrically at rate β.
  double v = 3.0;
  for (int t = 0; t < 60; ++t) v = 0.5 + 0.5 * v;
  EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(FilterSigma, MatchesReferenceRecursionExactly) {
  math::RandomStream rng(3, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const GarchParams p{0.01 + rng.next_uniform(), 0.3 * rng.next_uniform(), 0.6 * rng.next_uniform(),
                        rng.next_gaussian()};
    std::vector<double> r(300);
    for (double& x : r) x = 2.0 * rng.next_gaussian();
    const auto got = garch::filter_sigma(p, r);
    const auto want = oracle::garch_sigma(p.omega, p.alpha, p.beta, p.mu, r);
    for (std::size_t t = 0; t < r.size(); ++t) EXPECT_EQ(got[t], want[t]);
  }
}

TEST(FilterSigma, RejectsInvalidParams) {
  const std::vector<double> r(5, 0.0);
  EXPECT_THROW(garch::filter_sigma({0.0, 0.1, 0.1, 0.0}, r), DomainError);
  EXPECT_THROW(garch::filter_sigma({1.0, 0.5, 0.5, 0.0}, r), DomainError);
  EXPECT_THROW(garch::filter_sigma({1.0, -0.1, 0.5, 0.0}, r), DomainError);
  GarchParams t{1.0, 0.1, 0.1, 0.0, Innovation::student_t, 2.0};
  EXPECT_THROW(garch::filter_sigma(t, r), DomainError);
}

TEST(Loglik, MatchesDensityOracle) {
  const GarchParams p{0.2, 0.1, 0.7, 0.05};
  const auto r = simulated_returns(p, 500, 11);
  EXPECT_NEAR(garch::loglik(p, r), gaussian_loglik_oracle(p, r), 1e-9);

  GarchParams t = p;
  t.innovation = Innovation::student_t;
  t.nu = 6.0;
  const auto s = oracle::garch_sigma(t.omega, t.alpha, t.beta, t.mu, r);
  double want = 0.0;
  const double scale = std::sqrt(t.nu / (t.nu - 2.0));
  for (std::size_t i = 0; i < r.size(); ++i)
    want += std::log(static_cast<double>(oracle::t_density((r[i] - t.mu) / s[i] * scale, t.nu)) *
                     scale / s[i]);
  EXPECT_NEAR(garch::loglik(t, r), want, 1e-9);
}

TEST(StandardizedResiduals, Identities) {
  const std::vector<double> r{0.5, -1.0, 2.0};
  const GarchParams p{1.0, 0.0, 0.0, 0.0};
  const auto z = garch::standardized_residuals(p, r, garch::filter_sigma(p, r));
  EXPECT_EQ(z, r);
  const GarchParams q{1.0, 0.1, 0.5, 0.7};
  const std::vector<double> flat(10, 0.7);
  for (double v : garch::standardized_residuals(q, flat, garch::filter_sigma(q, flat))) EXPECT_EQ(v, 0.0);
}

TEST(StandardizedResiduals, RecoverSimulatedInnovations) {
  const GarchParams p{0.05, 0.08, 0.9, 0.01, Innovation::student_t, 7.0};
  math::RandomStream rng(19, 0);
  const auto path = garch::simulate_garch(p, 2000, rng);
  const auto sigma = garch::filter_sigma(p, path.returns);
  const auto z = garch::standardized_residuals(p, path.returns, sigma);
  for (std::size_t t = 0; t < z.size(); ++t) {
    EXPECT_NEAR(z[t], path.z[t], 1e-10);
    if (t >= 100) {
      EXPECT_NEAR(sigma[t], path.sigma[t], 1e-10);
    }
  }
}

TEST(ForecastSigma, NoDynamicsAndFixedPoint) {
  garch::GarchFit fit;
  fit.params = {4.0, 0.0, 0.0, 0.0};
  fit.returns = {1.0, 3.0};
  fit.sigma = {2.0, 2.0};
  for (double s : garch::forecast_sigma(fit, 5)) EXPECT_DOUBLE_EQ(s, 2.0);

  fit.params = {0.05, 0.08, 0.9, 0.0};
  fit.returns = {0.4, -3.0};
  fit.sigma = {1.5, 1.4};
  const auto f = garch::forecast_sigma(fit, 5000);
  const double bar = std::sqrt(0.05 / (1.0 - 0.98));
  EXPECT_NEAR(f.back(), bar, 1e-9);
  // Monotone approach to the unconditional level.
  for (std::size_t k = 1; k < f.size(); ++k)
    EXPECT_LE(std::fabs(f[k] - bar), std::fabs(f[k - 1] - bar) + 1e-15);
  EXPECT_DOUBLE_EQ(f[0], std::sqrt(0.05 + 0.08 * 9.0 + 0.9 * 1.96));
  EXPECT_THROW(garch::forecast_sigma(fit, 0), DomainError);
}

TEST(SimulateGarch, IidGaussianVariance) {
  const GarchParams p{1.0, 0.0, 0.0, 0.3};
  const std::size_t n = 1'000'000;
  const auto r = simulated_returns(p, n, 5);
  const double v = stats::variance(r);
  EXPECT_NEAR(v, 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(stats::mean(r), 0.3, 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(SimulateGarch, Deterministic) {
  const GarchParams p{0.05, 0.08, 0.9, 0.0, Innovation::student_t, 5.0};
  math::RandomStream a(8, 2), b(8, 2);
  const auto x = garch::simulate_garch(p, 1000, a), y = garch::simulate_garch(p, 1000, b);
  EXPECT_EQ(x.returns, y.returns);
  EXPECT_EQ(x.sigma, y.sigma);
}

TEST(SimulateGarch, StudentTInnovationsHeavyTailed) {
  const GarchParams p{1.0, 0.0, 0.0, 0.0, Innovation::student_t, 5.0};
  math::RandomStream rng(9, 0);
  const std::size_t n = 1'000'000;
  const auto z = garch::simulate_garch(p, n, rng).z;
  const double m = stats::mean(z);
  double m2 = 0.0, m4 = 0.0;
  for (double v : z) {
    m2 += (v - m) * (v - m);
    m4 += std::pow(v - m, 4);
  }
  m2 /= n;
  m4 /= n;
  const double excess = m4 / (m2 * m2) - 3.0;
  EXPECT_GT(excess, 5.0 * std::sqrt(24.0 / n));
  EXPECT_NEAR(m2, 1.0, 0.02);  // unit-variance scaling
}

TEST(FitGarch, RecoversGaussianParameters) {
  const GarchParams truth{0.05, 0.08, 0.9, 0.0};
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    const auto fit = garch::fit_garch(simulated_returns(truth, 5000, seed), gaussian_fit());
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.params.omega, 0.05, 0.04);
    EXPECT_NEAR(fit.params.alpha, 0.08, 0.03);
    EXPECT_NEAR(fit.params.beta, 0.90, 0.04);
    EXPECT_NO_THROW(fit.params.validate());
    EXPECT_GE(fit.loglik, fit.start_loglik);
  }
}

TEST(FitGarch, StudentTRecoversTailIndex) {
  const GarchParams truth{0.05, 0.08, 0.9, 0.0, Innovation::student_t, 6.0};
  const auto fit = garch::fit_garch(simulated_returns(truth, 5000, 44));
  EXPECT_EQ(fit.params.innovation, Innovation::student_t);
  EXPECT_GT(fit.params.nu, 4.0);
  EXPECT_LT(fit.params.nu, 10.0);
  EXPECT_NEAR(fit.params.alpha, 0.08, 0.03);
  EXPECT_NEAR(fit.params.beta, 0.90, 0.04);
  // Never worse than any profile start point.
  for (double nu : {4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0}) {
    GarchParams start = fit.params;
    start.alpha = 0.05;
    start.beta = 0.9;
    start.nu = nu;
    start.omega = 0.05 * stats::variance(fit.returns) * (fit.returns.size() - 1.0) / fit.returns.size();
    EXPECT_GE(fit.loglik, garch::loglik(start, fit.returns));
  }
}

// With α = 0 the variance path does not depend on β, so β is unidentified on
// i.i.d. data; the identifiable claims are a negligible shock loading and no
// significant likelihood gain over constant variance.
TEST(FitGarch, IidDataShowsNoVolatilityClustering) {
  const GarchParams truth{1.0, 0.0, 0.0, 0.0};
  for (std::uint64_t seed : {201u, 202u, 203u, 204u}) {
    const auto r = simulated_returns(truth, 5000, seed);
    const auto fit = garch::fit_garch(r, gaussian_fit());
    EXPECT_LT(fit.params.alpha, 0.03);
    const double v = stats::variance(r) * (r.size() - 1.0) / r.size();
    const GarchParams flat{v, 0.0, 0.0, fit.params.mu};
    const double lr = 2.0 * (fit.loglik - garch::loglik(flat, r));
    EXPECT_GE(lr, -1e-6);
    EXPECT_LT(lr, 9.21);  // χ²(2) 99th percentile
  }
}

TEST(FitGarch, ArchRestrictionNeverBeatsFullModel) {
  for (std::uint64_t seed : {301u, 302u, 303u}) {
    const auto r = simulated_returns({0.1, 0.1, 0.85, 0.0}, 3000, seed);
    garch::FitOptions arch = gaussian_fit();
    arch.arch_only = true;
    const auto restricted = garch::fit_garch(r, arch);
    const auto full = garch::fit_garch(r, gaussian_fit());
    EXPECT_EQ(restricted.params.beta, 0.0);
    EXPECT_TRUE(restricted.arch_only);
    EXPECT_LE(restricted.loglik, full.loglik + 1e-9);
  }
}

TEST(FitGarch, RejectsDegenerateInput) {
  EXPECT_THROW(garch::fit_garch(std::vector<double>(100, 0.01)), FitError);
  EXPECT_THROW(garch::fit_garch(std::vector<double>(49, 0.01)), InsufficientDataError);
}
