#pragma once

// Goodness of fit: copula log-likelihood, information criteria, energy
// distance, rank correlations and the family comparison report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdg/copula.hpp"
#include "cdg/error.hpp"
#include "cdg/math/random.hpp"
#include "cdg/stats.hpp"

namespace cdg::gof {

using copula::CopulaSpec;
using copula::Family;
using math::Matrix;

// Log density assigned to rows whose density underflows.
inline const double kLogFloor = std::log(1e-300);

struct Loglik {
  double value = 0.0;
  std::size_t clamped_rows = 0;
};

namespace detail {

inline std::vector<double> row_log_densities(const CopulaSpec& spec, const Matrix& u) {
  const std::size_t k = static_cast<std::size_t>(u.rows());
  std::vector<double> out(k, 0.0);
  switch (spec.family) {
    case Family::gaussian:
    case Family::student_t: {
      const bool gauss = spec.family == Family::gaussian;
      const Matrix x = gauss ? copula::detail::normal_scores(u) : copula::detail::t_scores(u, spec.nu);
      const Matrix l = math::correlation_factor(spec.sigma);
      std::vector<double> q;
      double log_det;
      copula::detail::quadratic_forms(l, x, q, log_det);
      const double nu = spec.nu, n = static_cast<double>(u.cols());
      const double c = gauss ? 0.0
                             : math::log_gamma(0.5 * (nu + n)) + (n - 1.0) * math::log_gamma(0.5 * nu) -
                                   n * math::log_gamma(0.5 * (nu + 1.0)) - 0.5 * log_det;
      for (std::size_t t = 0; t < k; ++t) {
        const Eigen::Index r = static_cast<Eigen::Index>(t);
        if (gauss) {
          double s = 0.0;
          for (Eigen::Index j = 0; j < x.cols(); ++j) s += x(r, j) * x(r, j);
          out[t] = -0.5 * (log_det + q[t] - s);
        } else {
          double marg = 0.0;
          for (Eigen::Index j = 0; j < x.cols(); ++j) marg += std::log1p(x(r, j) * x(r, j) / nu);
          out[t] = c - 0.5 * (nu + n) * std::log1p(q[t] / nu) + 0.5 * (nu + 1.0) * marg;
        }
      }
      break;
    }
    case Family::clayton:
    case Family::gumbel: {
      std::vector<double> row(static_cast<std::size_t>(u.cols()));
      for (std::size_t t = 0; t < k; ++t) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) row[static_cast<std::size_t>(j)] = u(static_cast<Eigen::Index>(t), j);
        out[t] = spec.family == Family::clayton ? copula::detail::clayton_log_density(spec.theta, row)
                                                : copula::detail::gumbel_log_density(spec.theta, row);
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

// Σ_t log c(U_t) with underflowing rows clamped to log(1e-300) and counted.
inline Loglik copula_loglik_detail(const CopulaSpec& spec, const Matrix& u) {
  spec.validate();
  if (u.cols() != spec.dim) throw DimensionError("copula_loglik: U has " + std::to_string(u.cols()) +
                                                 " columns, spec has dimension " + std::to_string(spec.dim));
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      if (!(u(i, j) > 0.0 && u(i, j) < 1.0)) throw DomainError("copula_loglik: U must lie in (0,1)");
  Loglik out;
  for (double v : detail::row_log_densities(spec, u)) {
    if (!(v >= kLogFloor)) {
      v = kLogFloor;
      ++out.clamped_rows;
    }
    out.value += v;
  }
  return out;
}

inline double copula_loglik(const CopulaSpec& spec, const Matrix& u) {
  return copula_loglik_detail(spec, u).value;
}

// −2ℓ + 2p.
inline double aic(double loglik, std::size_t p) {
  if (p < 1) throw DomainError("aic: parameter count must be >= 1");
  return -2.0 * loglik + 2.0 * static_cast<double>(p);
}

// −2ℓ + p ln k.
inline double bic(double loglik, std::size_t p, double k) {
  if (p < 1) throw DomainError("bic: parameter count must be >= 1");
  if (!(k >= 1.0)) throw DomainError("bic: sample size must be >= 1");
  return -2.0 * loglik + static_cast<double>(p) * std::log(k);
}

// Two-sample energy distance with Euclidean norm:
//   2/(km) ΣΣ‖U_i − V_j‖ − 1/k² ΣΣ‖U_i − U_i'‖ − 1/m² ΣΣ‖V_j − V_j'‖.
// All three sums run the same full double loop, so identical samples give 0 exactly.
inline double energy_distance(const Matrix& u, const Matrix& v) {
  if (u.cols() != v.cols()) throw DimensionError("energy_distance: samples differ in dimension");
  if (u.rows() < 2 || v.rows() < 2) throw InsufficientDataError("energy_distance: need at least 2 rows per sample");
  const Eigen::Index n = u.cols();
  auto sum_dist = [n](const Matrix& a, const Matrix& b) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double row = 0.0;
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        double d2 = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
          const double d = a(i, c) - b(j, c);
          d2 += d * d;
        }
        row += std::sqrt(d2);
      }
      total += row;
    }
    return total;
  };
  const double k = static_cast<double>(u.rows()), m = static_cast<double>(v.rows());
  const double cross = sum_dist(u, v), uu = sum_dist(u, u), vv = sum_dist(v, v);
  const double e = 2.0 * (cross * (1.0 / (k * m))) - uu * (1.0 / (k * k)) - vv * (1.0 / (m * m));
  return std::max(e, 0.0);
}

inline constexpr std::size_t kEnergyCap = 5000;

// Rows of u drawn without replacement (partial Fisher–Yates), original order kept.
inline Matrix subsample_rows(const Matrix& u, std::size_t m, math::RandomStream& rng) {
  const std::size_t k = static_cast<std::size_t>(u.rows());
  if (m >= k) return u;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(k - i));
    std::swap(idx[i], idx[std::min(j, k - 1)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  Matrix out(static_cast<Eigen::Index>(m), u.cols());
  for (std::size_t i = 0; i < m; ++i) out.row(static_cast<Eigen::Index>(i)) = u.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

// Energy distance between U and m draws from spec. m = 0 means min(k, 5000);
// U is subsampled to the same cap.
inline double energy_score(const Matrix& u, const CopulaSpec& spec, std::size_t m, math::RandomStream& rng) {
  if (u.cols() != spec.dim) throw DimensionError("energy_score: dimension mismatch");
  const std::size_t k = static_cast<std::size_t>(u.rows());
  if (m == 0) m = std::min(k, kEnergyCap);
  const Matrix v = copula::sample(spec, m, rng);
  return energy_distance(subsample_rows(u, kEnergyCap, rng), v);
}

struct RankCorrelations {
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::optional<double> kendall;
};

// nullopt entries mark zero-variance input.
inline RankCorrelations rank_correlations(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("rank_correlations: series lengths differ");
  if (x.size() < 2) throw InsufficientDataError("rank_correlations: need at least 2 observations");
  return {stats::pearson(x, y), stats::spearman(x, y), stats::kendall(x, y)};
}

enum class RankKey { aic, bic, loglik, energy };

inline std::string_view rank_key_id(RankKey k) {
  switch (k) {
    case RankKey::aic: return "aic";
    case RankKey::bic: return "bic";
    case RankKey::loglik: return "loglik";
    case RankKey::energy: return "energy";
  }
  return "aic";
}

inline std::optional<RankKey> parse_rank_key(std::string_view s) {
  for (RankKey k : {RankKey::aic, RankKey::bic, RankKey::loglik, RankKey::energy})
    if (rank_key_id(k) == s) return k;
  return std::nullopt;
}

struct PairIndex {
  Eigen::Index i = 0;
  Eigen::Index j = 1;
};

struct FamilyResult {
  Family family = Family::gaussian;
  bool ok = false;
  std::string error;  // set when !ok
  copula::CopulaFit fit;
  std::size_t parameters = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();  // NaN when not computed
  std::size_t clamped_rows = 0;
  // Means over asset pairs: tail coefficients of the fitted spec, and
  // correlations measured on model draws.
  double lower_tail = 0.0;
  double upper_tail = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
  std::vector<PairIndex> pair_examples;  // pairs whose bivariate AIC winner is this family
};

struct PairResult {
  PairIndex pair;
  Family best = Family::gaussian;  // lowest bivariate AIC
  double lower_tail = 0.0;         // of the best family's bivariate fit
  double upper_tail = 0.0;
  std::optional<double> pearson;   // on U
  std::optional<double> spearman;
  std::optional<double> kendall;
};

struct GofReport {
  std::size_t k = 0;
  Eigen::Index n = 0;
  RankKey key = RankKey::aic;
  std::vector<FamilyResult> families;  // ranked, failures last
  std::vector<PairResult> pairs;
};

struct CompareOptions {
  RankKey key = RankKey::aic;
  bool energy = true;
  std::size_t energy_draws = 0;  // 0: min(k, 5000)
  std::size_t metric_draws = 20000;  // 0: skip the correlation columns (left at 0)
  bool pairwise = true;          // per-pair fits for PairResult and pair_examples
  std::uint64_t seed = 0;
  copula::FitOptions fit{};
};

namespace detail {

inline double rank_value(const FamilyResult& r, RankKey key) {
  switch (key) {
    case RankKey::aic: return r.aic;
    case RankKey::bic: return r.bic;
    case RankKey::loglik: return -r.loglik;
    case RankKey::energy: return std::isnan(r.energy) ? std::numeric_limits<double>::infinity() : r.energy;
  }
  return r.aic;
}

inline Matrix columns(const Matrix& u, Eigen::Index i, Eigen::Index j) {
  Matrix out(u.rows(), 2);
  out.col(0) = u.col(i);
  out.col(1) = u.col(j);
  return out;
}

inline std::vector<double> column(const Matrix& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

}  // namespace detail

// Orders results by the key, ascending; failed fits go last, ties keep family order.
inline void rank_results(std::vector<FamilyResult>& results, RankKey key) {
  std::stable_sort(results.begin(), results.end(), [key](const FamilyResult& a, const FamilyResult& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return false;
    return detail::rank_value(a, key) < detail::rank_value(b, key);
  });
}

// Outcome of fitting one family; fit is empty when fitting threw.
struct FitAttempt {
  Family family = Family::gaussian;
  std::optional<copula::CopulaFit> fit;
  std::string error;
};

inline FitAttempt attempt_fit(const Matrix& u, Family f, const copula::FitOptions& options) {
  FitAttempt a;
  a.family = f;
  try {
    a.fit = copula::fit_copula(u, f, options);
  } catch (const Error& e) {
    a.error = e.what();
  }
  return a;
}

namespace detail {

inline FamilyResult evaluate(const Matrix& u, const FitAttempt& attempt, const CompareOptions& options) {
  FamilyResult r;
  r.family = attempt.family;
  if (!attempt.fit) {
    r.error = attempt.error.empty() ? "fit unavailable" : attempt.error;
    return r;
  }
  const double k = static_cast<double>(u.rows());
  const Eigen::Index n = u.cols();
  try {
    r.fit = *attempt.fit;
    r.parameters = r.fit.parameters;
    const Loglik ll = copula_loglik_detail(r.fit.spec, u);
    r.loglik = ll.value;
    r.clamped_rows = ll.clamped_rows;
    r.aic = aic(r.loglik, r.parameters);
    r.bic = bic(r.loglik, r.parameters, k);
    // Each family draws from its own substream, so results do not depend on list order.
    math::RandomStream rng(options.seed, 100 + static_cast<std::uint64_t>(r.family));
    if (options.energy) r.energy = energy_score(u, r.fit.spec, options.energy_draws, rng);
    const Matrix v = options.metric_draws > 0 ? copula::sample(r.fit.spec, options.metric_draws, rng) : Matrix();
    double npairs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const auto td = copula::tail_dependence(r.fit.spec, i, j);
        r.lower_tail += td.lower;
        r.upper_tail += td.upper;
        if (options.metric_draws > 0) {
          const auto rc = rank_correlations(column(v, i), column(v, j));
          r.pearson += rc.pearson.value_or(0.0);
          r.spearman += rc.spearman.value_or(0.0);
          r.kendall += rc.kendall.value_or(0.0);
        }
        npairs += 1.0;
      }
    r.lower_tail /= npairs;
    r.upper_tail /= npairs;
    r.pearson /= npairs;
    r.spearman /= npairs;
    r.kendall /= npairs;
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

}  // namespace detail

// Evaluates already fitted families on U and ranks them.
inline GofReport evaluate_families(const Matrix& u, const std::vector<FitAttempt>& attempts,
                                   const CompareOptions& options = {}) {
  copula::detail::require_pseudo_observations(u);
  if (attempts.empty()) throw DomainError("compare_families: no families requested");
  GofReport report;
  report.k = static_cast<std::size_t>(u.rows());
  report.n = u.cols();
  report.key = options.key;
  const Eigen::Index n = u.cols();
  for (const auto& a : attempts) report.families.push_back(detail::evaluate(u, a, options));

  if (options.pairwise) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Matrix uij = detail::columns(u, i, j);
        PairResult p;
        p.pair = {i, j};
        const auto rc = rank_correlations(detail::column(u, i), detail::column(u, j));
        p.pearson = rc.pearson;
        p.spearman = rc.spearman;
        p.kendall = rc.kendall;
        double best = std::numeric_limits<double>::infinity();
        std::optional<CopulaSpec> best_spec;
        for (const auto& a : attempts) {
          const FitAttempt pa = attempt_fit(uij, a.family, options.fit);
          if (!pa.fit) continue;  // a failed family cannot win the pair
          const double v = aic(copula_loglik(pa.fit->spec, uij), pa.fit->parameters);
          if (v < best) {
            best = v;
            p.best = a.family;
            best_spec = pa.fit->spec;
          }
        }
        if (!best_spec) continue;
        const auto td = copula::tail_dependence(*best_spec);
        p.lower_tail = td.lower;
        p.upper_tail = td.upper;
        for (auto& r : report.families)
          if (r.family == p.best) r.pair_examples.push_back(p.pair);
        report.pairs.push_back(p);
      }
  }

  rank_results(report.families, options.key);
  return report;
}

// Fits every family on U, evaluates the criteria and ranks the families.
// A family that fails to fit is recorded with ok = false.
inline GofReport compare_families(const Matrix& u, const std::vector<Family>& families,
                                  const CompareOptions& options = {}) {
  copula::detail::require_pseudo_observations(u);
  if (families.empty()) throw DomainError("compare_families: no families requested");
  std::vector<FitAttempt> attempts;
  for (Family f : families) attempts.push_back(attempt_fit(u, f, options.fit));
  return evaluate_families(u, attempts, options);
}

}  // namespace cdg::gof
