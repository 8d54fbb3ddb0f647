#pragma once

// Run configuration: defaults, JSON file, then command-line overrides.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cdg/copula.hpp"
#include "cdg/data.hpp"
#include "cdg/error.hpp"
#include "cdg/garch.hpp"
#include "cdg/gof.hpp"
#include "cdg/risk.hpp"
#include "json.hpp"

namespace cdg::pipeline {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RunConfig {
  fs::path data_dir = "data";
  std::vector<std::string> assets;  // file names under data_dir; empty = every *.csv, sorted
  double alpha = 0.05;
  std::vector<copula::Family> families{std::begin(copula::kAllFamilies), std::end(copula::kAllFamilies)};
  std::size_t scenarios = 1'000'000;
  std::uint64_t seed = 20240101;
  std::optional<std::vector<double>> weights;
  fs::path out_dir = "out";
  risk::MarginalTransform marginal_transform = risk::MarginalTransform::empirical;
  std::size_t min_obs = 50;
  unsigned workers = 1;
  std::size_t chunk_size = 1 << 16;
  gof::RankKey rank_key = gof::RankKey::aic;
  std::optional<copula::Family> risk_family;  // default: best-ranked fitted family
  garch::Innovation garch_innovation = garch::Innovation::student_t;
  bool pairwise = true;  // per-pair fits in the comparison
  std::size_t grid_resolution = 50;
  std::size_t histogram_bins = 30;
  bool strict = false;   // non-converged stages fail the command

  void validate() const {
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
    if (scenarios < 10'000) throw ConfigError("scenarios must be at least 10000");
    if (families.empty()) throw ConfigError("at least one copula family is required");
    if (min_obs < 2) throw ConfigError("min_obs must be at least 2");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (chunk_size < 1) throw ConfigError("chunk_size must be at least 1");
    if (grid_resolution < 1) throw ConfigError("grid_resolution must be at least 1");
    if (histogram_bins < 1) throw ConfigError("histogram_bins must be at least 1");
    if (weights) {
      double s = 0.0;
      for (double w : *weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
        s += w;
      }
      if (!(std::fabs(s - 1.0) <= 1e-12)) throw ConfigError("weights must sum to 1");
    }
  }
};

inline std::string innovation_id(garch::Innovation i) {
  return i == garch::Innovation::gaussian ? "gaussian" : "student-t";
}

inline garch::Innovation parse_innovation(const std::string& s) {
  if (s == "gaussian" || s == "normal") return garch::Innovation::gaussian;
  if (s == "student-t" || s == "student_t" || s == "t") return garch::Innovation::student_t;
  throw ConfigError("unknown GARCH innovation '" + s + "'");
}

inline copula::Family parse_family_or_throw(const std::string& s) {
  const auto f = copula::parse_family(s);
  if (!f) throw ConfigError("unknown copula family '" + s + "'");
  return *f;
}

// Comma-separated family list, e.g. "gaussian,clayton".
inline std::vector<copula::Family> parse_family_list(const std::string& text) {
  std::vector<copula::Family> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(',', pos), text.size());
    const std::string item = data::detail::trim(std::string_view(text).substr(pos, next - pos));
    if (!item.empty()) {
      const auto f = parse_family_or_throw(item);
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    pos = next + 1;
  }
  if (out.empty()) throw ConfigError("empty copula family list");
  return out;
}

inline Json config_to_json(const RunConfig& c) {
  Json j;
  j["data_dir"] = c.data_dir.generic_string();
  j["assets"] = c.assets;
  j["alpha"] = c.alpha;
  j["families"] = Json::array();
  for (auto f : c.families) j["families"].push_back(std::string(copula::family_id(f)));
  j["scenarios"] = c.scenarios;
  j["seed"] = c.seed;
  j["weights"] = c.weights ? Json(*c.weights) : Json(nullptr);
  j["out_dir"] = c.out_dir.generic_string();
  j["marginal_transform"] = std::string(risk::transform_id(c.marginal_transform));
  j["min_obs"] = c.min_obs;
  j["workers"] = c.workers;
  j["chunk_size"] = c.chunk_size;
  j["rank_key"] = std::string(gof::rank_key_id(c.rank_key));
  j["risk_family"] = c.risk_family ? Json(std::string(copula::family_id(*c.risk_family))) : Json(nullptr);
  j["garch_innovation"] = innovation_id(c.garch_innovation);
  j["pairwise"] = c.pairwise;
  j["grid_resolution"] = c.grid_resolution;
  j["histogram_bins"] = c.histogram_bins;
  j["strict"] = c.strict;
  return j;
}

// Applies the keys present in j on top of c. Unknown keys are rejected.
inline void apply_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "data_dir") c.data_dir = v.get<std::string>();
      else if (key == "assets") c.assets = v.get<std::vector<std::string>>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "families") {
        c.families.clear();
        for (const auto& f : v) c.families.push_back(parse_family_or_throw(f.get<std::string>()));
      } else if (key == "scenarios") c.scenarios = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "weights") {
        if (v.is_null()) c.weights.reset();
        else c.weights = v.get<std::vector<double>>();
      } else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "marginal_transform") {
        const auto t = risk::parse_transform(v.get<std::string>());
        if (!t) throw ConfigError("unknown marginal_transform '" + v.get<std::string>() + "'");
        c.marginal_transform = *t;
      } else if (key == "min_obs") c.min_obs = v.get<std::size_t>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "chunk_size") c.chunk_size = v.get<std::size_t>();
      else if (key == "rank_key") {
        const auto k = gof::parse_rank_key(v.get<std::string>());
        if (!k) throw ConfigError("unknown rank_key '" + v.get<std::string>() + "'");
        c.rank_key = *k;
      } else if (key == "risk_family") {
        if (v.is_null()) c.risk_family.reset();
        else c.risk_family = parse_family_or_throw(v.get<std::string>());
      } else if (key == "garch_innovation") c.garch_innovation = parse_innovation(v.get<std::string>());
      else if (key == "pairwise") c.pairwise = v.get<bool>();
      else if (key == "grid_resolution") c.grid_resolution = v.get<std::size_t>();
      else if (key == "histogram_bins") c.histogram_bins = v.get<std::size_t>();
      else if (key == "strict") c.strict = v.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c;
  apply_json(c, j);
  return c;
}

}  // namespace cdg::pipeline
