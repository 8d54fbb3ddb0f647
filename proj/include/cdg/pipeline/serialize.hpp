#pragma once

// JSON forms of the fitted model, the comparison report and the risk report.
// Doubles are written at full round-trip precision.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cdg/copula.hpp"
#include "cdg/dcc.hpp"
#include "cdg/garch.hpp"
#include "cdg/gof.hpp"
#include "cdg/pipeline/config.hpp"
#include "cdg/risk.hpp"

namespace cdg::pipeline {

using math::CorrelationMatrix;
using math::Matrix;
using math::Vector;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto m = n ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(i)).size()) != m)
      throw DataError("model file: ragged matrix");
    for (Eigen::Index k = 0; k < m; ++k)
      out(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
  }
  return out;
}

inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Json spec_to_json(const copula::CopulaSpec& s) {
  Json j;
  j["family"] = std::string(copula::family_id(s.family));
  j["dim"] = s.dim;
  j["sigma"] = s.elliptical() ? matrix_to_json(s.sigma.matrix()) : Json(nullptr);
  j["nu"] = s.nu;
  j["theta"] = s.theta;
  return j;
}

inline copula::CopulaSpec spec_from_json(const Json& j) {
  copula::CopulaSpec s;
  s.family = parse_family_or_throw(j.at("family").get<std::string>());
  s.dim = j.at("dim").get<Eigen::Index>();
  if (!j.at("sigma").is_null()) s.sigma = CorrelationMatrix(matrix_from_json(j.at("sigma")));
  s.nu = j.at("nu").get<double>();
  s.theta = j.at("theta").get<double>();
  s.validate();
  return s;
}

// Per-asset marginal: what the downstream commands need from a GARCH fit.
struct MarginalRecord {
  std::string asset;
  garch::GarchParams params;
  double loglik = 0.0;
  bool converged = false;
  bool arch_only = false;
  double sigma_next = 0.0;
  std::vector<double> residuals;  // standardized, in time order
};

struct DccRecord {
  dcc::DccParams params;
  Matrix q_last;
  Vector z_last;
  double loglik = 0.0;
  bool converged = false;
  CorrelationMatrix r_next;
};

struct CopulaRecord {
  copula::Family family = copula::Family::gaussian;
  std::optional<copula::CopulaFit> fit;  // empty when the fit failed
  std::string error;
};

struct ModelFile {
  std::vector<std::string> assets;
  risk::MarginalTransform marginal_transform = risk::MarginalTransform::empirical;
  garch::Innovation garch_innovation = garch::Innovation::student_t;
  std::vector<MarginalRecord> marginals;
  DccRecord dcc;
  std::vector<CopulaRecord> copulas;
  copula::Family risk_family = copula::Family::gaussian;

  Matrix residual_matrix() const {
    const auto T = static_cast<Eigen::Index>(marginals.front().residuals.size());
    Matrix z(T, static_cast<Eigen::Index>(marginals.size()));
    for (std::size_t j = 0; j < marginals.size(); ++j) {
      if (static_cast<Eigen::Index>(marginals[j].residuals.size()) != T)
        throw DataError("model file: residual series differ in length");
      for (Eigen::Index t = 0; t < T; ++t) z(t, static_cast<Eigen::Index>(j)) = marginals[j].residuals[static_cast<std::size_t>(t)];
    }
    return z;
  }

  const copula::CopulaFit& risk_fit() const {
    for (const auto& c : copulas)
      if (c.family == risk_family && c.fit) return *c.fit;
    throw FitError("model file: no successful fit for risk family " + std::string(copula::family_id(risk_family)));
  }

  // Marginals plus the chosen copula, with Σ of elliptical families replaced by R_{T+1}.
  risk::FittedModel fitted_model() const {
    risk::FittedModel m;
    m.asset_ids = assets;
    for (const auto& r : marginals) {
      risk::Marginal g;
      g.params = r.params;
      g.sigma_next = r.sigma_next;
      g.transform = marginal_transform;
      if (marginal_transform == risk::MarginalTransform::empirical) {
        g.sorted_residuals = r.residuals;
        std::sort(g.sorted_residuals.begin(), g.sorted_residuals.end());
      }
      m.marginals.push_back(std::move(g));
    }
    m.copula = risk_fit().spec;
    m.r_next = dcc.r_next;
    m.validate();
    return m;
  }
};

inline Json garch_params_to_json(const garch::GarchParams& p) {
  Json j;
  j["omega"] = p.omega;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["mu"] = p.mu;
  j["innovation"] = innovation_id(p.innovation);
  j["nu"] = p.nu;
  return j;
}

inline garch::GarchParams garch_params_from_json(const Json& j) {
  garch::GarchParams p;
  p.omega = j.at("omega").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.mu = j.at("mu").get<double>();
  p.innovation = parse_innovation(j.at("innovation").get<std::string>());
  p.nu = j.at("nu").get<double>();
  p.validate();
  return p;
}

inline Json model_to_json(const ModelFile& m) {
  Json j;
  j["assets"] = m.assets;
  j["marginal_transform"] = std::string(risk::transform_id(m.marginal_transform));
  j["garch_innovation"] = innovation_id(m.garch_innovation);
  j["garch"] = Json::array();
  for (const auto& r : m.marginals) {
    Json g;
    g["asset"] = r.asset;
    g["params"] = garch_params_to_json(r.params);
    g["loglik"] = r.loglik;
    g["converged"] = r.converged;
    g["arch_only"] = r.arch_only;
    g["sigma_next"] = r.sigma_next;
    g["residuals"] = r.residuals;
    j["garch"].push_back(std::move(g));
  }
  Json d;
  d["theta1"] = m.dcc.params.theta1;
  d["theta2"] = m.dcc.params.theta2;
  d["loglik"] = m.dcc.loglik;
  d["converged"] = m.dcc.converged;
  d["qbar"] = matrix_to_json(m.dcc.params.qbar);
  d["q_last"] = matrix_to_json(m.dcc.q_last);
  d["z_last"] = vector_to_json(m.dcc.z_last);
  d["r_next"] = matrix_to_json(m.dcc.r_next.matrix());
  j["dcc"] = std::move(d);
  j["copulas"] = Json::array();
  for (const auto& c : m.copulas) {
    Json e;
    e["family"] = std::string(copula::family_id(c.family));
    e["ok"] = c.fit.has_value();
    e["error"] = c.error;
    if (c.fit) {
      e["spec"] = spec_to_json(c.fit->spec);
      e["loglik"] = c.fit->loglik;
      e["parameters"] = c.fit->parameters;
      e["converged"] = c.fit->converged;
      e["aic"] = gof::aic(c.fit->loglik, c.fit->parameters);
    }
    j["copulas"].push_back(std::move(e));
  }
  j["risk_family"] = std::string(copula::family_id(m.risk_family));
  return j;
}

inline ModelFile model_from_json(const Json& j) {
  ModelFile m;
  try {
    m.assets = j.at("assets").get<std::vector<std::string>>();
    const auto t = risk::parse_transform(j.at("marginal_transform").get<std::string>());
    if (!t) throw DataError("model file: unknown marginal_transform");
    m.marginal_transform = *t;
    m.garch_innovation = parse_innovation(j.at("garch_innovation").get<std::string>());
    for (const auto& g : j.at("garch")) {
      MarginalRecord r;
      r.asset = g.at("asset").get<std::string>();
      r.params = garch_params_from_json(g.at("params"));
      r.loglik = g.at("loglik").get<double>();
      r.converged = g.at("converged").get<bool>();
      r.arch_only = g.at("arch_only").get<bool>();
      r.sigma_next = g.at("sigma_next").get<double>();
      r.residuals = g.at("residuals").get<std::vector<double>>();
      m.marginals.push_back(std::move(r));
    }
    if (m.marginals.size() != m.assets.size()) throw DataError("model file: one GARCH entry per asset required");
    const auto& d = j.at("dcc");
    m.dcc.params = {d.at("theta1").get<double>(), d.at("theta2").get<double>(), matrix_from_json(d.at("qbar"))};
    m.dcc.loglik = d.at("loglik").get<double>();
    m.dcc.converged = d.at("converged").get<bool>();
    m.dcc.q_last = matrix_from_json(d.at("q_last"));
    m.dcc.z_last = vector_from_json(d.at("z_last"));
    m.dcc.r_next = CorrelationMatrix(matrix_from_json(d.at("r_next")));
    for (const auto& e : j.at("copulas")) {
      CopulaRecord c;
      c.family = parse_family_or_throw(e.at("family").get<std::string>());
      c.error = e.at("error").get<std::string>();
      if (e.at("ok").get<bool>()) {
        copula::CopulaFit f;
        f.spec = spec_from_json(e.at("spec"));
        f.loglik = e.at("loglik").get<double>();
        f.parameters = e.at("parameters").get<std::size_t>();
        f.converged = e.at("converged").get<bool>();
        c.fit = std::move(f);
      }
      m.copulas.push_back(std::move(c));
    }
    m.risk_family = parse_family_or_throw(j.at("risk_family").get<std::string>());
  } catch (const Json::exception& e) {
    throw DataError(std::string("model file is malformed: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file is malformed: ") + e.what());
  }
  return m;
}

inline ModelFile read_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("model file not found: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

inline Json null_if_nan(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json null_if_empty(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json gof_to_json(const gof::GofReport& g, const std::vector<std::string>& names) {
  Json j;
  j["k"] = g.k;
  j["n"] = g.n;
  j["rank_key"] = std::string(gof::rank_key_id(g.key));
  j["families"] = Json::array();
  for (const auto& f : g.families) {
    Json e;
    e["family"] = std::string(copula::family_id(f.family));
    e["ok"] = f.ok;
    e["error"] = f.error;
    if (f.ok) {
      e["spec"] = spec_to_json(f.fit.spec);
      e["parameters"] = f.parameters;
      e["loglik"] = f.loglik;
      e["aic"] = f.aic;
      e["bic"] = f.bic;
      e["energy"] = null_if_nan(f.energy);
      e["clamped_rows"] = f.clamped_rows;
      e["converged"] = f.fit.converged;
      e["lower_tail"] = f.lower_tail;
      e["upper_tail"] = f.upper_tail;
      e["pearson"] = f.pearson;
      e["spearman"] = f.spearman;
      e["kendall"] = f.kendall;
    }
    e["pair_examples"] = Json::array();
    for (const auto& p : f.pair_examples) e["pair_examples"].push_back({names[p.i], names[p.j]});
    j["families"].push_back(std::move(e));
  }
  j["pairs"] = Json::array();
  for (const auto& p : g.pairs) {
    Json e;
    e["assets"] = {names[p.pair.i], names[p.pair.j]};
    e["best"] = std::string(copula::family_id(p.best));
    e["lower_tail"] = p.lower_tail;
    e["upper_tail"] = p.upper_tail;
    e["pearson"] = null_if_empty(p.pearson);
    e["spearman"] = null_if_empty(p.spearman);
    e["kendall"] = null_if_empty(p.kendall);
    j["pairs"].push_back(std::move(e));
  }
  return j;
}

inline Json var_cvar_to_json(const std::string& name, const risk::VarCvar& v) {
  Json j;
  j["name"] = name;
  j["var"] = v.var;
  j["cvar"] = v.cvar;
  j["warning"] = v.warning ? Json(*v.warning) : Json(nullptr);
  return j;
}

inline Json covar_rows_to_json(const std::vector<risk::CovarRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json e;
    e["target"] = r.target;
    e["conditioning"] = r.conditioning;
    e["var"] = r.var;
    e["covar"] = r.covar;
    e["delta"] = r.delta;
    a.push_back(std::move(e));
  }
  return a;
}

inline Json risk_to_json(const risk::RiskReport& r, copula::Family family) {
  Json j;
  j["alpha"] = r.alpha;
  j["scenarios"] = r.scenarios;
  j["copula"] = std::string(copula::family_id(family));
  j["weights"] = r.weights;
  j["assets"] = Json::array();
  for (const auto& a : r.assets) j["assets"].push_back(var_cvar_to_json(a.name, a.risk));
  j["portfolio"] = var_cvar_to_json(r.portfolio.name, r.portfolio.risk);
  j["covar"] = covar_rows_to_json(r.covar_rows);
  j["systemic_impact"] = r.systemic_impact;
  j["stress"] = Json::array();
  for (const auto& s : r.stress) {
    Json e;
    e["conditioning"] = s.conditioning;
    e["rows"] = covar_rows_to_json(s.rows);
    e["systemic_impact"] = s.systemic_impact;
    j["stress"].push_back(std::move(e));
  }
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace cdg::pipeline
