#pragma once

// Monte-Carlo risk engine on the fitted copula-DCC-GARCH model: one-step-ahead
// joint scenarios, VaR/CVaR, CoVaR/ΔCoVaR, stress tables and portfolio risk.
// Signed convention throughout: returns, VaR and CVaR are negative in the loss tail.

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cdg/copula.hpp"
#include "cdg/dcc.hpp"
#include "cdg/error.hpp"
#include "cdg/garch.hpp"
#include "cdg/math/random.hpp"
#include "cdg/stats.hpp"

namespace cdg::risk {

using math::CorrelationMatrix;
using math::Matrix;

enum class MarginalTransform { empirical, parametric };

inline std::string_view transform_id(MarginalTransform t) {
  return t == MarginalTransform::empirical ? "empirical" : "student-t";
}

inline std::optional<MarginalTransform> parse_transform(std::string_view s) {
  if (s == "empirical") return MarginalTransform::empirical;
  if (s == "student-t" || s == "student_t" || s == "parametric") return MarginalTransform::parametric;
  return std::nullopt;
}

// Maps a uniform to the next-period return r = μ + σ_{T+1}·z(u).
struct Marginal {
  garch::GarchParams params;
  double sigma_next = 1.0;
  MarginalTransform transform = MarginalTransform::parametric;
  std::vector<double> sorted_residuals;  // used by the empirical transform

  // Empirical: linear interpolation between order statistics at h = (T−1)u.
  // Parametric: the GARCH innovation quantile.
  double innovation_quantile(double u) const {
    if (transform == MarginalTransform::parametric)
      return garch::innovation_quantile(u, params.innovation, params.nu);
    const auto& z = sorted_residuals;
    const double h = u * static_cast<double>(z.size() - 1);
    const std::size_t lo = std::min(static_cast<std::size_t>(h), z.size() - 1);
    const std::size_t hi = std::min(lo + 1, z.size() - 1);
    return z[lo] + (h - static_cast<double>(lo)) * (z[hi] - z[lo]);
  }

  double return_quantile(double u) const { return params.mu + sigma_next * innovation_quantile(u); }

  void validate() const {
    if (!(sigma_next > 0.0) || !std::isfinite(sigma_next)) throw DomainError("marginal: sigma_next must be positive");
    if (transform == MarginalTransform::empirical) {
      if (sorted_residuals.size() < 2) throw InsufficientDataError("marginal: empirical transform needs residuals");
      if (!std::is_sorted(sorted_residuals.begin(), sorted_residuals.end()))
        throw DomainError("marginal: residuals must be sorted");
    } else if (params.innovation == garch::Innovation::student_t && !(params.nu > 2.0)) {
      throw DomainError("marginal: student-t innovations need nu > 2");
    }
  }
};

inline Marginal marginal_from_fit(const garch::GarchFit& fit, MarginalTransform transform) {
  Marginal m;
  m.params = fit.params;
  m.sigma_next = garch::forecast_sigma(fit, 1).front();
  m.transform = transform;
  if (transform == MarginalTransform::empirical) {
    m.sorted_residuals = fit.residuals;
    std::sort(m.sorted_residuals.begin(), m.sorted_residuals.end());
  }
  return m;
}

struct FittedModel {
  std::vector<std::string> asset_ids;
  std::vector<Marginal> marginals;
  copula::CopulaSpec copula;
  std::optional<CorrelationMatrix> r_next;  // DCC forecast R_{T+1}; replaces Σ of elliptical copulas

  Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(marginals.size()); }

  void validate() const {
    if (marginals.empty()) throw DimensionError("model: no assets");
    if (!asset_ids.empty() && asset_ids.size() != marginals.size())
      throw DimensionError("model: asset_ids and marginals differ in length");
    if (copula.dim != dim()) throw DimensionError("model: copula dimension differs from asset count");
    if (r_next && r_next->dim() != dim()) throw DimensionError("model: R_{T+1} dimension differs from asset count");
    copula.validate();
    for (const auto& m : marginals) m.validate();
  }

  // The copula used for scenario draws.
  copula::CopulaSpec scenario_copula() const {
    copula::CopulaSpec s = copula;
    if (s.elliptical() && r_next) s.sigma = *r_next;
    return s;
  }

  std::string asset_name(Eigen::Index j) const {
    return asset_ids.empty() ? "asset" + std::to_string(j + 1) : asset_ids[static_cast<std::size_t>(j)];
  }
};

inline FittedModel build_model(std::vector<std::string> ids, const std::vector<garch::GarchFit>& garch_fits,
                               const std::optional<dcc::DccFit>& dcc_fit, copula::CopulaSpec spec,
                               MarginalTransform transform) {
  FittedModel m;
  m.asset_ids = std::move(ids);
  for (const auto& f : garch_fits) m.marginals.push_back(marginal_from_fit(f, transform));
  m.copula = std::move(spec);
  if (dcc_fit) m.r_next = dcc::forecast_correlation(*dcc_fit);
  m.validate();
  return m;
}

struct SimulationOptions {
  std::size_t chunk_size = 1 << 16;
  unsigned workers = 1;
};

inline constexpr std::uint64_t kScenarioStreamBase = 1'000'000;

// N × n next-period returns. Chunk c draws from RandomStream(seed, base + c),
// so the result is identical for any worker count.
inline Matrix simulate_joint(const FittedModel& model, std::size_t scenarios, std::uint64_t seed,
                             const SimulationOptions& options = {}) {
  model.validate();
  if (scenarios == 0) throw DomainError("simulate_joint: scenario count must be positive");
  if (options.chunk_size == 0) throw DomainError("simulate_joint: chunk size must be positive");
  const copula::CopulaSpec spec = model.scenario_copula();
  const Eigen::Index n = model.dim();
  Matrix out(static_cast<Eigen::Index>(scenarios), n);
  const std::size_t chunks = (scenarios + options.chunk_size - 1) / options.chunk_size;

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * options.chunk_size;
    const std::size_t len = std::min(options.chunk_size, scenarios - begin);
    math::RandomStream rng(seed, kScenarioStreamBase + c);
    const Matrix u = copula::sample(spec, len, rng);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        out(static_cast<Eigen::Index>(begin) + i, j) =
            model.marginals[static_cast<std::size_t>(j)].return_quantile(u(i, j));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct VarCvar {
  double var = 0.0;
  double cvar = 0.0;
  std::optional<std::string> warning;  // set when N·α < 10
};

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("alpha must lie in (0, 0.5)");
}

// VaR: lower empirical α-quantile (order statistic ⌈αN⌉). CVaR: mean of all scenarios ≤ VaR.
inline VarCvar var_cvar(std::span<const double> scenarios, double alpha) {
  require_alpha(alpha);
  if (scenarios.size() < 100) throw InsufficientDataError("var_cvar: need at least 100 scenarios");
  std::vector<double> s(scenarios.begin(), scenarios.end());
  std::sort(s.begin(), s.end());
  VarCvar out;
  out.var = stats::lower_quantile_sorted(s, alpha);
  const auto end = std::upper_bound(s.begin(), s.end(), out.var);
  double sum = 0.0;
  for (auto it = s.begin(); it != end; ++it) sum += *it;
  out.cvar = std::min(sum / static_cast<double>(end - s.begin()), out.var);
  if (alpha * static_cast<double>(s.size()) < 10.0)
    out.warning = "fewer than 10 tail scenarios (N·α = " + std::to_string(alpha * static_cast<double>(s.size())) + ")";
  return out;
}

struct CovarRow {
  std::string target;
  std::string conditioning;
  double var = 0.0;    // unconditional VaR of the target
  double covar = 0.0;  // VaR of the target within the conditioning asset's α-tail
  double delta = 0.0;  // covar − var
};

// Stress set: scenarios with conditioning ≤ its own α-quantile. CoVaR is the
// lower α-quantile of the target inside that set.
inline CovarRow covar(std::span<const double> target, std::span<const double> conditioning, double alpha) {
  require_alpha(alpha);
  if (target.size() != conditioning.size()) throw DimensionError("covar: series lengths differ");
  if (target.empty()) throw InsufficientDataError("covar: no scenarios");
  std::vector<double> c(conditioning.begin(), conditioning.end());
  std::sort(c.begin(), c.end());
  const double threshold = stats::lower_quantile_sorted(c, alpha);
  std::vector<double> t(target.begin(), target.end()), stressed;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (conditioning[i] <= threshold) stressed.push_back(target[i]);
  if (stressed.empty()) throw Error("covar: empty stress set");
  std::sort(t.begin(), t.end());
  std::sort(stressed.begin(), stressed.end());
  CovarRow row;
  row.var = stats::lower_quantile_sorted(t, alpha);
  row.covar = stats::lower_quantile_sorted(stressed, alpha);
  row.delta = row.covar - row.var;
  return row;
}

// Scenario count that leaves at least 1000 scenarios in the stress set.
inline std::size_t covar_scenarios(std::size_t requested, double alpha) {
  require_alpha(alpha);
  return std::max(requested, static_cast<std::size_t>(std::ceil(1000.0 / alpha - 1e-9)));
}

inline double systemic_impact(std::span<const CovarRow> rows) {
  if (rows.empty()) throw InsufficientDataError("systemic_impact: no rows");
  double s = 0.0;
  for (const auto& r : rows) s += r.delta;
  return s;
}

inline void validate_weights(std::span<const double> w, Eigen::Index n) {
  if (static_cast<Eigen::Index>(w.size()) != n)
    throw DimensionError("portfolio weights: expected " + std::to_string(n) + ", got " + std::to_string(w.size()));
  double s = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("portfolio weights must be finite and >= 0");
    s += v;
  }
  if (!(std::fabs(s - 1.0) <= 1e-12)) throw DomainError("portfolio weights must sum to 1");
}

inline std::vector<double> equal_weights(Eigen::Index n) {
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
}

// Σ_j w_j r_j per scenario, accumulated left to right from 0.
inline std::vector<double> portfolio_returns(const Matrix& scenarios, std::span<const double> weights) {
  validate_weights(weights, scenarios.cols());
  std::vector<double> p(static_cast<std::size_t>(scenarios.rows()), 0.0);
  for (Eigen::Index i = 0; i < scenarios.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < scenarios.cols(); ++j) s += weights[static_cast<std::size_t>(j)] * scenarios(i, j);
    p[static_cast<std::size_t>(i)] = s;
  }
  return p;
}

// Portfolio of every asset except `excluded`, weights renormalized over the rest
// (equal weights when the rest carries no weight).
inline std::vector<double> rest_of_portfolio_returns(const Matrix& scenarios, std::span<const double> weights,
                                                     Eigen::Index excluded) {
  validate_weights(weights, scenarios.cols());
  if (scenarios.cols() < 2) throw DimensionError("rest-of-portfolio needs at least 2 assets");
  std::vector<double> w(weights.begin(), weights.end());
  w[static_cast<std::size_t>(excluded)] = 0.0;
  double rest = 0.0;
  for (double v : w) rest += v;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (static_cast<Eigen::Index>(j) == excluded) continue;
    w[j] = rest > 0.0 ? w[j] / rest : 1.0 / static_cast<double>(w.size() - 1);
  }
  std::vector<double> p(static_cast<std::size_t>(scenarios.rows()), 0.0);
  for (Eigen::Index i = 0; i < scenarios.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < scenarios.cols(); ++j) s += w[static_cast<std::size_t>(j)] * scenarios(i, j);
    p[static_cast<std::size_t>(i)] = s;
  }
  return p;
}

inline VarCvar portfolio_risk(const Matrix& scenarios, std::span<const double> weights, double alpha) {
  return var_cvar(portfolio_returns(scenarios, weights), alpha);
}

inline std::vector<double> column(const Matrix& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

struct StressTable {
  std::string conditioning;
  std::vector<CovarRow> rows;  // every asset except the conditioning one
  double systemic_impact = 0.0;
};

inline StressTable stress_test(const Matrix& scenarios, const std::vector<std::string>& names,
                               Eigen::Index conditioning, double alpha) {
  if (conditioning < 0 || conditioning >= scenarios.cols()) throw DimensionError("stress_test: asset index");
  if (static_cast<Eigen::Index>(names.size()) != scenarios.cols()) throw DimensionError("stress_test: names");
  StressTable table;
  table.conditioning = names[static_cast<std::size_t>(conditioning)];
  const auto c = column(scenarios, conditioning);
  for (Eigen::Index j = 0; j < scenarios.cols(); ++j) {
    if (j == conditioning) continue;
    CovarRow row = covar(column(scenarios, j), c, alpha);
    row.target = names[static_cast<std::size_t>(j)];
    row.conditioning = table.conditioning;
    table.rows.push_back(std::move(row));
  }
  if (!table.rows.empty()) table.systemic_impact = systemic_impact(table.rows);
  return table;
}

struct AssetRisk {
  std::string name;
  VarCvar risk;
};

struct RiskOptions {
  double alpha = 0.05;
  std::size_t scenarios = 1'000'000;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> weights;  // default: equal weights
  SimulationOptions simulation{};
};

struct RiskReport {
  double alpha = 0.05;
  std::size_t scenarios = 0;  // after raising to the CoVaR minimum
  std::vector<double> weights;
  std::vector<AssetRisk> assets;
  AssetRisk portfolio;
  // Each asset as target, conditioned on the portfolio of the other assets
  // being in its α-tail. The target is excluded so that independent assets give ΔCoVaR ≈ 0.
  std::vector<CovarRow> covar_rows;
  double systemic_impact = 0.0;
  std::vector<StressTable> stress;  // one per conditioning asset
  std::vector<std::string> warnings;
};

inline constexpr const char* kPortfolioName = "High-Corr Portfolio";
inline constexpr const char* kRestOfPortfolioName = "Rest of Portfolio";

// ΔCoVaR = CoVaR − VaR must hold exactly in every row.
inline void check_covar_identity(std::span<const CovarRow> rows) {
  for (const auto& r : rows)
    if (r.delta != r.covar - r.var) throw Error("ΔCoVaR identity violated for " + r.target);
}

inline RiskReport build_report(const FittedModel& model, const RiskOptions& options) {
  require_alpha(options.alpha);
  model.validate();
  const Eigen::Index n = model.dim();
  RiskReport rep;
  rep.alpha = options.alpha;
  rep.weights = options.weights ? *options.weights : equal_weights(n);
  validate_weights(rep.weights, n);
  rep.scenarios = covar_scenarios(options.scenarios, options.alpha);
  const Matrix sc = simulate_joint(model, rep.scenarios, options.seed, options.simulation);

  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < n; ++j) names.push_back(model.asset_name(j));
  auto note = [&](const std::string& who, const VarCvar& v) {
    if (v.warning) rep.warnings.push_back(who + ": " + *v.warning);
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    rep.assets.push_back({names[static_cast<std::size_t>(j)], var_cvar(column(sc, j), options.alpha)});
    note(rep.assets.back().name, rep.assets.back().risk);
  }
  const auto port = portfolio_returns(sc, rep.weights);
  rep.portfolio = {kPortfolioName, var_cvar(port, options.alpha)};
  note(rep.portfolio.name, rep.portfolio.risk);

  for (Eigen::Index j = 0; j < n; ++j) {
    CovarRow row = covar(column(sc, j), rest_of_portfolio_returns(sc, rep.weights, j), options.alpha);
    row.target = names[static_cast<std::size_t>(j)];
    row.conditioning = kRestOfPortfolioName;
    rep.covar_rows.push_back(std::move(row));
  }
  rep.systemic_impact = systemic_impact(rep.covar_rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    rep.stress.push_back(stress_test(sc, names, i, options.alpha));
    check_covar_identity(rep.stress.back().rows);
  }
  check_covar_identity(rep.covar_rows);
  return rep;
}

}  // namespace cdg::risk
