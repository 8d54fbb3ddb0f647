#pragma once

// Pipeline commands. Each reads its inputs from the data or output directory,
// writes its outputs into the output directory, records itself in
// manifest.json and reports warnings and an exit code.
//
//   preprocess  data/*.csv        -> panel.csv, table1_summary.csv, table2_correlation.csv
//   fit         panel.csv         -> model.json
//   compare     model.json        -> table5_copula_comparison.csv, table8_goodness_of_fit.csv,
//                                    gof_summary.csv, pair_metrics.csv, gof.json
//   risk        model.json        -> table3_risk.csv, table4_covar.csv, table7_portfolio.csv, risk.json
//   stress      model.json        -> table6_systemic.csv, stress_tables.csv
//   plotdata    model.json        -> plot/copula_density_<family>.csv, plot/qq_<asset>.csv,
//                                    plot/hist_<asset>.csv

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cdg/copula.hpp"
#include "cdg/data.hpp"
#include "cdg/dcc.hpp"
#include "cdg/garch.hpp"
#include "cdg/gof.hpp"
#include "cdg/pipeline/config.hpp"
#include "cdg/pipeline/manifest.hpp"
#include "cdg/pipeline/report.hpp"
#include "cdg/pipeline/serialize.hpp"
#include "cdg/risk.hpp"

namespace cdg::pipeline {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,  // data, fit or I/O failure
  kExitUsage = 2,    // bad flags or config
  kExitStrict = 4,   // a stage did not converge and strict is set
};

namespace files {
inline constexpr const char* panel = "panel.csv";
inline constexpr const char* table1 = "table1_summary.csv";
inline constexpr const char* table2 = "table2_correlation.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* table5 = "table5_copula_comparison.csv";
inline constexpr const char* table8 = "table8_goodness_of_fit.csv";
inline constexpr const char* gof_summary = "gof_summary.csv";
inline constexpr const char* pair_metrics = "pair_metrics.csv";
inline constexpr const char* gof_json = "gof.json";
inline constexpr const char* table3 = "table3_risk.csv";
inline constexpr const char* table4 = "table4_covar.csv";
inline constexpr const char* table7 = "table7_portfolio.csv";
inline constexpr const char* risk_json = "risk.json";
inline constexpr const char* table6 = "table6_systemic.csv";
inline constexpr const char* stress = "stress_tables.csv";
inline constexpr const char* plot_dir = "plot";
}  // namespace files

struct CommandResult {
  std::string command;
  std::vector<fs::path> outputs;
  std::vector<std::string> log;
  std::vector<std::string> warnings;
  bool nonconverged = false;
  int exit_code = kExitOk;
};

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw DataError("cannot write " + path.string());
}

template <class Writer>
void emit(CommandResult& r, const fs::path& path, Writer&& w) {
  std::ostringstream s;
  w(s);
  write_file(path, s.str());
  r.outputs.push_back(path);
}

inline void warn(CommandResult& r, std::string msg) { r.warnings.push_back(std::move(msg)); }

// Wraps a command body: timestamps, exit code and the manifest entry.
inline CommandResult run_command(const RunConfig& cfg, const std::string& name,
                                 const std::function<std::vector<fs::path>(CommandResult&)>& body) {
  cfg.validate();
  CommandRecord rec;
  rec.command = name;
  rec.started = utc_timestamp();
  CommandResult r;
  r.command = name;
  rec.inputs = body(r);
  r.exit_code = (cfg.strict && r.nonconverged) ? kExitStrict : kExitOk;
  rec.finished = utc_timestamp();
  rec.outputs = r.outputs;
  rec.warnings = r.warnings;
  rec.exit_code = r.exit_code;
  update_manifest(cfg, rec);
  return r;
}

inline std::string safe_name(const std::string& s) {
  std::string out;
  for (unsigned char c : s) out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? static_cast<char>(c) : '_';
  return out;
}

inline ModelFile load_model(const RunConfig& cfg) { return read_model(cfg.out_dir / files::model); }

}  // namespace detail

// Price files: the configured list, or every *.csv in data_dir sorted by name.
inline std::vector<fs::path> input_files(const RunConfig& cfg) {
  if (!fs::is_directory(cfg.data_dir)) throw DataError("data directory not found: " + cfg.data_dir.string());
  std::vector<fs::path> out;
  if (cfg.assets.empty()) {
    for (const auto& e : fs::directory_iterator(cfg.data_dir))
      if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
  } else {
    for (const auto& a : cfg.assets) {
      fs::path p = cfg.data_dir / a;
      if (!fs::exists(p) && !p.has_extension()) p += ".csv";
      if (!fs::exists(p)) throw DataError("price file not found: " + p.string());
      out.push_back(p);
    }
  }
  if (out.empty()) throw DataError("no price files in " + cfg.data_dir.string());
  return out;
}

inline CommandResult cmd_preprocess(const RunConfig& cfg) {
  return detail::run_command(cfg, "preprocess", [&](CommandResult& r) {
    const auto inputs = input_files(cfg);
    std::vector<data::ReturnSeries> series;
    for (const auto& f : inputs) {
      const auto loaded = data::load_price_series(f);
      if (loaded.duplicates_collapsed)
        detail::warn(r, loaded.series.asset_id + ": " + std::to_string(loaded.duplicates_collapsed) +
                            " duplicate dates collapsed");
      series.push_back(data::log_returns(loaded.series));
    }
    const auto aligned = data::align_panel(series, cfg.min_obs);
    for (const auto& d : aligned.dropped)
      detail::warn(r, "excluded " + d + ": fewer than " + std::to_string(cfg.min_obs) + " returns");
    const auto& panel = aligned.panel;
    r.log.push_back("panel: " + std::to_string(panel.rows()) + " common dates x " + std::to_string(panel.cols()) +
                    " assets");
    const auto stats = data::summarize(panel);
    detail::emit(r, cfg.out_dir / files::panel, [&](std::ostream& o) { data::write_panel_csv(panel, o); });
    detail::emit(r, cfg.out_dir / files::table1, [&](std::ostream& o) { write_table1(o, stats); });
    detail::emit(r, cfg.out_dir / files::table2, [&](std::ostream& o) { write_table2(o, stats); });
    return inputs;
  });
}

// The configured risk family if set, else the lowest-AIC successful fit.
inline copula::Family choose_risk_family(const std::vector<CopulaRecord>& copulas,
                                         const std::optional<copula::Family>& requested) {
  if (requested) {
    for (const auto& c : copulas)
      if (c.family == *requested && c.fit) return c.family;
    throw FitError("risk family " + std::string(copula::family_id(*requested)) + " has no successful fit");
  }
  const CopulaRecord* best = nullptr;
  for (const auto& c : copulas)
    if (c.fit && (!best || gof::aic(c.fit->loglik, c.fit->parameters) < gof::aic(best->fit->loglik, best->fit->parameters)))
      best = &c;
  if (!best) throw FitError("no copula family could be fitted");
  return best->family;
}

inline CommandResult cmd_fit(const RunConfig& cfg) {
  return detail::run_command(cfg, "fit", [&](CommandResult& r) {
    const fs::path panel_path = cfg.out_dir / files::panel;
    const auto panel = data::read_panel_csv(panel_path);
    const Eigen::Index T = panel.rows(), n = panel.cols();
    ModelFile m;
    m.assets = panel.asset_ids;
    m.marginal_transform = cfg.marginal_transform;
    m.garch_innovation = cfg.garch_innovation;
    Matrix z(T, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::vector<double> col(panel.returns.col(j).data(), panel.returns.col(j).data() + T);
      garch::FitOptions go;
      go.innovation = cfg.garch_innovation;
      const auto fit = garch::fit_garch(col, go);
      const std::string& id = panel.asset_ids[static_cast<std::size_t>(j)];
      if (!fit.converged) {
        detail::warn(r, "GARCH fit for " + id + " did not converge");
        r.nonconverged = true;
      }
      if (fit.arch_only) detail::warn(r, "GARCH fit for " + id + " fell back to ARCH(1)");
      for (Eigen::Index t = 0; t < T; ++t) z(t, j) = fit.residuals[static_cast<std::size_t>(t)];
      m.marginals.push_back({id, fit.params, fit.loglik, fit.converged, fit.arch_only,
                             garch::forecast_sigma(fit, 1).front(), fit.residuals});
    }
    const auto d = dcc::fit_dcc(z);
    if (!d.converged) {
      detail::warn(r, "DCC fit did not converge");
      r.nonconverged = true;
    }
    m.dcc = {d.params, d.q_last, d.z_last, d.loglik, d.converged, dcc::forecast_correlation(d)};
    const Matrix u = copula::pseudo_observations(z);
    for (auto f : cfg.families) {
      auto a = gof::attempt_fit(u, f, copula::FitOptions{});
      const std::string id(copula::family_id(f));
      if (!a.fit) {
        detail::warn(r, "copula " + id + " failed: " + a.error);
      } else if (!a.fit->converged) {
        detail::warn(r, "copula " + id + " did not converge");
        r.nonconverged = true;
      }
      m.copulas.push_back({f, std::move(a.fit), a.error});
    }
    m.risk_family = choose_risk_family(m.copulas, cfg.risk_family);
    r.log.push_back("risk copula: " + std::string(copula::family_id(m.risk_family)));
    detail::emit(r, cfg.out_dir / files::model, [&](std::ostream& o) { o << model_to_json(m).dump(1) << '\n'; });
    return std::vector<fs::path>{panel_path};
  });
}

inline gof::GofReport compare_model(const RunConfig& cfg, const ModelFile& m, CommandResult* r = nullptr) {
  std::vector<gof::FitAttempt> attempts;
  for (const auto& c : m.copulas) {
    if (std::find(cfg.families.begin(), cfg.families.end(), c.family) == cfg.families.end()) continue;
    attempts.push_back({c.family, c.fit, c.error});
    if (r && c.fit && !c.fit->converged) r->nonconverged = true;
  }
  for (auto f : cfg.families)
    if (std::none_of(m.copulas.begin(), m.copulas.end(), [&](const CopulaRecord& c) { return c.family == f; }))
      throw ConfigError("copula " + std::string(copula::family_id(f)) + " is not in the model file; rerun fit");
  gof::CompareOptions opts;
  opts.key = cfg.rank_key;
  opts.pairwise = cfg.pairwise;
  opts.seed = cfg.seed;
  const Matrix u = copula::pseudo_observations(m.residual_matrix());
  return gof::evaluate_families(u, attempts, opts);
}

inline CommandResult cmd_compare(const RunConfig& cfg) {
  return detail::run_command(cfg, "compare", [&](CommandResult& r) {
    const fs::path model_path = cfg.out_dir / files::model;
    const auto m = read_model(model_path);
    const auto g = compare_model(cfg, m, &r);
    for (const auto& f : g.families)
      if (f.ok && f.clamped_rows)
        detail::warn(r, std::string(copula::family_id(f.family)) + ": " + std::to_string(f.clamped_rows) +
                            " rows clamped in the log-likelihood");
    r.log.push_back("best by " + std::string(gof::rank_key_id(g.key)) + ": " +
                    std::string(copula::family_id(g.families.front().family)));
    detail::emit(r, cfg.out_dir / files::table5, [&](std::ostream& o) { write_table5(o, g, m.assets); });
    detail::emit(r, cfg.out_dir / files::table8, [&](std::ostream& o) { write_table8(o, g); });
    detail::emit(r, cfg.out_dir / files::gof_summary, [&](std::ostream& o) { write_gof_summary(o, g); });
    detail::emit(r, cfg.out_dir / files::pair_metrics, [&](std::ostream& o) { write_pair_metrics(o, g, m.assets); });
    detail::emit(r, cfg.out_dir / files::gof_json, [&](std::ostream& o) { o << gof_to_json(g, m.assets).dump(2) << '\n'; });
    return std::vector<fs::path>{model_path};
  });
}

struct RiskRun {
  risk::RiskReport report;
  copula::Family family;
};

inline RiskRun compute_risk(const RunConfig& cfg, ModelFile m) {
  m.risk_family = choose_risk_family(m.copulas, cfg.risk_family ? cfg.risk_family : std::optional(m.risk_family));
  const auto model = m.fitted_model();
  if (cfg.weights && static_cast<Eigen::Index>(cfg.weights->size()) != model.dim())
    throw ConfigError("weights has " + std::to_string(cfg.weights->size()) + " entries for " +
                      std::to_string(model.dim()) + " assets");
  risk::RiskOptions opts;
  opts.alpha = cfg.alpha;
  opts.scenarios = cfg.scenarios;
  opts.seed = cfg.seed;
  opts.weights = cfg.weights;
  opts.simulation = {cfg.chunk_size, cfg.workers};
  return {risk::build_report(model, opts), m.risk_family};
}

inline void emit_risk(CommandResult& r, const RunConfig& cfg, const RiskRun& run) {
  const auto& rep = run.report;
  for (const auto& w : rep.warnings) detail::warn(r, w);
  detail::emit(r, cfg.out_dir / files::table3, [&](std::ostream& o) { write_table3(o, rep); });
  detail::emit(r, cfg.out_dir / files::table4, [&](std::ostream& o) { write_table4(o, rep); });
  detail::emit(r, cfg.out_dir / files::table7, [&](std::ostream& o) { write_table7(o, rep); });
  detail::emit(r, cfg.out_dir / files::risk_json,
               [&](std::ostream& o) { o << risk_to_json(rep, run.family).dump(2) << '\n'; });
}

inline void emit_stress(CommandResult& r, const RunConfig& cfg, const RiskRun& run) {
  detail::emit(r, cfg.out_dir / files::table6, [&](std::ostream& o) { write_table6(o, run.report); });
  detail::emit(r, cfg.out_dir / files::stress, [&](std::ostream& o) { write_stress_tables(o, run.report); });
}

inline CommandResult cmd_risk(const RunConfig& cfg) {
  return detail::run_command(cfg, "risk", [&](CommandResult& r) {
    const fs::path model_path = cfg.out_dir / files::model;
    const auto run = compute_risk(cfg, read_model(model_path));
    r.log.push_back("scenarios: " + std::to_string(run.report.scenarios) + ", copula " +
                    std::string(copula::family_id(run.family)));
    emit_risk(r, cfg, run);
    return std::vector<fs::path>{model_path};
  });
}

inline CommandResult cmd_stress(const RunConfig& cfg) {
  return detail::run_command(cfg, "stress", [&](CommandResult& r) {
    const fs::path model_path = cfg.out_dir / files::model;
    emit_stress(r, cfg, compute_risk(cfg, read_model(model_path)));
    return std::vector<fs::path>{model_path};
  });
}

// Bivariate (0, 1) margin of a fitted spec.
inline copula::CopulaSpec bivariate_margin(const copula::CopulaSpec& s) {
  switch (s.family) {
    case copula::Family::gaussian:
      return copula::CopulaSpec::gaussian(math::CorrelationMatrix::bivariate(s.sigma.matrix()(0, 1)));
    case copula::Family::student_t:
      return copula::CopulaSpec::student_t(math::CorrelationMatrix::bivariate(s.sigma.matrix()(0, 1)), s.nu);
    case copula::Family::clayton:
      return copula::CopulaSpec::clayton(s.theta, 2);
    case copula::Family::gumbel:
      return copula::CopulaSpec::gumbel(s.theta, 2);
  }
  throw DomainError("bivariate_margin: unknown family");
}

struct QqPoint {
  double probability;
  double empirical;
  double theoretical;
};

// Sorted residuals against the fitted innovation quantile at (i − ½)/T.
inline std::vector<QqPoint> qq_points(std::vector<double> residuals, const garch::GarchParams& p) {
  std::sort(residuals.begin(), residuals.end());
  const double T = static_cast<double>(residuals.size());
  std::vector<QqPoint> out;
  out.reserve(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double prob = (static_cast<double>(i) + 0.5) / T;
    out.push_back({prob, residuals[i], garch::innovation_quantile(prob, p.innovation, p.nu)});
  }
  return out;
}

struct HistogramBin {
  double left, right;
  std::size_t count;
  double density;         // count / (T · width)
  double fitted_density;  // innovation density at the bin midpoint
};

// Equal-width bins over [min, max]; the last bin is closed.
inline std::vector<HistogramBin> histogram(const std::vector<double>& x, std::size_t bins, const garch::GarchParams& p) {
  if (x.empty() || bins == 0) throw DomainError("histogram: need data and at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  double width = (*hi_it - lo) / static_cast<double>(bins);
  if (!(width > 0.0)) width = 1.0;
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = lo + width * static_cast<double>(b + 1);
    out[b].count = 0;
  }
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  const double T = static_cast<double>(x.size());
  for (auto& h : out) {
    h.density = static_cast<double>(h.count) / (T * width);
    h.fitted_density = std::exp(garch::innovation_log_pdf(0.5 * (h.left + h.right), p.innovation, p.nu));
  }
  return out;
}

inline CommandResult cmd_plotdata(const RunConfig& cfg) {
  return detail::run_command(cfg, "plotdata", [&](CommandResult& r) {
    const fs::path model_path = cfg.out_dir / files::model;
    const auto m = read_model(model_path);
    const fs::path dir = cfg.out_dir / files::plot_dir;
    for (const auto& c : m.copulas) {
      if (!c.fit) continue;
      const auto grid = copula::density_grid(bivariate_margin(c.fit->spec), cfg.grid_resolution);
      const double res = static_cast<double>(cfg.grid_resolution);
      detail::emit(r, dir / ("copula_density_" + std::string(copula::family_id(c.family)) + ".csv"),
                   [&](std::ostream& o) {
                     csv_row(o, {"u", "v", "density"});
                     for (Eigen::Index a = 0; a < grid.rows(); ++a)
                       for (Eigen::Index b = 0; b < grid.cols(); ++b)
                         csv_row(o, {fmt6((static_cast<double>(a) + 0.5) / res),
                                     fmt6((static_cast<double>(b) + 0.5) / res), fmt6(grid(a, b))});
                   });
    }
    for (const auto& g : m.marginals) {
      const std::string name = detail::safe_name(g.asset);
      detail::emit(r, dir / ("qq_" + name + ".csv"), [&](std::ostream& o) {
        csv_row(o, {"probability", "empirical", "theoretical"});
        for (const auto& q : qq_points(g.residuals, g.params))
          csv_row(o, {fmt6(q.probability), fmt6(q.empirical), fmt6(q.theoretical)});
      });
      detail::emit(r, dir / ("hist_" + name + ".csv"), [&](std::ostream& o) {
        csv_row(o, {"bin_left", "bin_right", "count", "density", "fitted_density"});
        for (const auto& h : histogram(g.residuals, cfg.histogram_bins, g.params))
          csv_row(o, {fmt6(h.left), fmt6(h.right), std::to_string(h.count), fmt6(h.density), fmt6(h.fitted_density)});
      });
    }
    return std::vector<fs::path>{model_path};
  });
}

// preprocess, fit, compare, risk, stress, plotdata in order; stops at the first throw.
inline std::vector<CommandResult> run_all(const RunConfig& cfg) {
  std::vector<CommandResult> out;
  out.push_back(cmd_preprocess(cfg));
  out.push_back(cmd_fit(cfg));
  out.push_back(cmd_compare(cfg));
  std::optional<RiskRun> run;
  out.push_back(detail::run_command(cfg, "risk", [&](CommandResult& r) {
    const fs::path model_path = cfg.out_dir / files::model;
    run = compute_risk(cfg, read_model(model_path));
    emit_risk(r, cfg, *run);
    return std::vector<fs::path>{model_path};
  }));
  out.push_back(detail::run_command(cfg, "stress", [&](CommandResult& r) {
    emit_stress(r, cfg, *run);
    return std::vector<fs::path>{cfg.out_dir / files::model};
  }));
  out.push_back(cmd_plotdata(cfg));
  return out;
}

inline int combined_exit_code(const std::vector<CommandResult>& results) {
  int code = kExitOk;
  for (const auto& r : results) code = std::max(code, r.exit_code);
  return code;
}

}  // namespace cdg::pipeline
