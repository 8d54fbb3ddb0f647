#pragma once

// CSV writers whose headers and column order follow the published tables.
// Numbers are written with 6 decimals; undefined values as NA.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cdg/data.hpp"
#include "cdg/gof.hpp"
#include "cdg/risk.hpp"

namespace cdg::pipeline {

inline std::string fmt6(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string fmt6(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

// α as written in column headers, e.g. 0.05.
inline std::string fmt_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
  out << '\n';
}

namespace headers {
inline const std::vector<std::string> table1{"Asset", "Mean", "Std. Dev", "Min/Max"};
inline std::vector<std::string> table3(double alpha) {
  return {"Asset", "VaR (α = " + fmt_alpha(alpha) + ")", "CVaR (α = " + fmt_alpha(alpha) + ")"};
}
inline const std::vector<std::string> table4{"Asset", "VaR", "CoVaR", "ΔCoVaR"};
inline const std::vector<std::string> table5{"Copula Family",  "Energy Score",  "Lower Tail",
                                             "Upper Tail",     "Pearson Corr",  "Spearman Corr",
                                             "Kendall's Tau",  "Asset Pair Examples"};
inline const std::vector<std::string> table6{"Conditioning Asset", "Systemic Impact (ΣΔCoVaR)"};
inline std::vector<std::string> table7(double alpha) {
  return {"Asset/Portfolio", "VaR (α=" + fmt_alpha(alpha) + ")", "CVaR (α=" + fmt_alpha(alpha) + ")"};
}
inline const std::vector<std::string> table8{"Copula Family", "AIC", "BIC", "Energy Score"};
}  // namespace headers

// Table 1: per-asset mean, standard deviation and (min, max) of log returns.
inline void write_table1(std::ostream& out, const data::SummaryStats& s) {
  csv_row(out, headers::table1);
  for (const auto& a : s.assets)
    csv_row(out, {a.asset_id, fmt6(a.mean), fmt6(a.stddev), "(" + fmt6(a.min) + ", " + fmt6(a.max) + ")"});
}

// Table 2: Pearson correlation matrix of returns.
inline void write_table2(std::ostream& out, const data::SummaryStats& s) {
  std::vector<std::string> h{"Asset"};
  for (const auto& a : s.assets) h.push_back(a.asset_id);
  csv_row(out, h);
  for (std::size_t i = 0; i < s.assets.size(); ++i) {
    std::vector<std::string> row{s.assets[i].asset_id};
    for (std::size_t j = 0; j < s.assets.size(); ++j) row.push_back(fmt6(s.correlation.at(i, j)));
    csv_row(out, row);
  }
}

// Table 3: per-asset VaR/CVaR, then the portfolio row.
inline void write_table3(std::ostream& out, const risk::RiskReport& r) {
  csv_row(out, headers::table3(r.alpha));
  for (const auto& a : r.assets) csv_row(out, {a.name, fmt6(a.risk.var), fmt6(a.risk.cvar)});
  csv_row(out, {r.portfolio.name, fmt6(r.portfolio.risk.var), fmt6(r.portfolio.risk.cvar)});
}

// Table 4: CoVaR rows and the systemic-impact footer (sum of the ΔCoVaR column).
inline void write_table4(std::ostream& out, const risk::RiskReport& r) {
  risk::check_covar_identity(r.covar_rows);
  csv_row(out, headers::table4);
  for (const auto& row : r.covar_rows) csv_row(out, {row.target, fmt6(row.var), fmt6(row.covar), fmt6(row.delta)});
  csv_row(out, {"Systemic Impact", "", "", fmt6(r.systemic_impact)});
}

inline std::string pair_label(const std::vector<std::string>& names, const gof::PairIndex& p) {
  return names[static_cast<std::size_t>(p.i)] + "–" + names[static_cast<std::size_t>(p.j)];
}

// Table 5: one row per family in ranked order.
inline void write_table5(std::ostream& out, const gof::GofReport& g, const std::vector<std::string>& names) {
  csv_row(out, headers::table5);
  for (const auto& f : g.families) {
    std::string pairs;
    for (const auto& p : f.pair_examples) pairs += (pairs.empty() ? "" : "; ") + pair_label(names, p);
    const std::string name(copula::family_display_name(f.family));
    if (!f.ok) {
      csv_row(out, {name, "NA", "NA", "NA", "NA", "NA", "NA", pairs});
      continue;
    }
    csv_row(out, {name, fmt6(f.energy), fmt6(f.lower_tail), fmt6(f.upper_tail), fmt6(f.pearson), fmt6(f.spearman),
                  fmt6(f.kendall), pairs});
  }
}

// Table 6: systemic impact per conditioning asset.
inline void write_table6(std::ostream& out, const risk::RiskReport& r) {
  csv_row(out, headers::table6);
  for (const auto& s : r.stress) csv_row(out, {s.conditioning, fmt6(s.systemic_impact)});
}

// Table 7: portfolio first, then each asset.
inline void write_table7(std::ostream& out, const risk::RiskReport& r) {
  csv_row(out, headers::table7(r.alpha));
  csv_row(out, {r.portfolio.name, fmt6(r.portfolio.risk.var), fmt6(r.portfolio.risk.cvar)});
  for (const auto& a : r.assets) csv_row(out, {a.name, fmt6(a.risk.var), fmt6(a.risk.cvar)});
}

// Table 8: information criteria and energy score per family.
inline void write_table8(std::ostream& out, const gof::GofReport& g) {
  csv_row(out, headers::table8);
  for (const auto& f : g.families) {
    const std::string name(copula::family_display_name(f.family));
    if (!f.ok) csv_row(out, {name, "NA", "NA", "NA"});
    else csv_row(out, {name, fmt6(f.aic), fmt6(f.bic), fmt6(f.energy)});
  }
}

// Full comparison: every criterion, the fit status and the rank.
inline void write_gof_summary(std::ostream& out, const gof::GofReport& g) {
  csv_row(out, {"Rank", "Copula Family", "Status", "LogLik", "Parameters", "AIC", "BIC", "Energy Score", "Lower Tail",
                "Upper Tail", "Pearson Corr", "Spearman Corr", "Kendall's Tau", "Converged"});
  std::size_t rank = 0;
  for (const auto& f : g.families) {
    const std::string name(copula::family_display_name(f.family));
    if (!f.ok) {
      csv_row(out, {"", name, "failed: " + f.error, "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA"});
      continue;
    }
    csv_row(out, {std::to_string(++rank), name, "ok", fmt6(f.loglik), std::to_string(f.parameters), fmt6(f.aic),
                  fmt6(f.bic), fmt6(f.energy), fmt6(f.lower_tail), fmt6(f.upper_tail), fmt6(f.pearson),
                  fmt6(f.spearman), fmt6(f.kendall), f.fit.converged ? "yes" : "no"});
  }
}

// Per-pair diagnostics: empirical correlations on U and the bivariate AIC winner.
inline void write_pair_metrics(std::ostream& out, const gof::GofReport& g, const std::vector<std::string>& names) {
  csv_row(out, {"Asset Pair", "Best Family", "Lower Tail", "Upper Tail", "Pearson Corr", "Spearman Corr",
                "Kendall's Tau"});
  for (const auto& p : g.pairs)
    csv_row(out, {pair_label(names, p.pair), std::string(copula::family_display_name(p.best)), fmt6(p.lower_tail),
                  fmt6(p.upper_tail), fmt6(p.pearson), fmt6(p.spearman), fmt6(p.kendall)});
}

// Every stress table: one row per (conditioning, target).
inline void write_stress_tables(std::ostream& out, const risk::RiskReport& r) {
  csv_row(out, {"Conditioning Asset", "Asset", "VaR", "CoVaR", "ΔCoVaR"});
  for (const auto& s : r.stress) {
    risk::check_covar_identity(s.rows);
    for (const auto& row : s.rows)
      csv_row(out, {s.conditioning, row.target, fmt6(row.var), fmt6(row.covar), fmt6(row.delta)});
  }
}

}  // namespace cdg::pipeline
