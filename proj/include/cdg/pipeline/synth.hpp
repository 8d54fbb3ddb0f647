#pragma once

// Synthetic price files from a known DCC-GARCH process, for fixtures and demos.
// Each asset gets <id>.csv with a Date,Close header over business days.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cdg/dcc.hpp"
#include "cdg/garch.hpp"
#include "cdg/pipeline/config.hpp"

namespace cdg::pipeline {

struct SynthOptions {
  std::vector<std::string> ids{"AAA", "BBB", "CCC"};
  std::size_t returns = 1000;  // prices = returns + 1
  std::uint64_t seed = 7;
  garch::GarchParams garch{2e-6, 0.08, 0.90, 0.0003, garch::Innovation::gaussian, 0.0};
  double theta1 = 0.05;
  double theta2 = 0.90;
  double rho = 0.5;  // equicorrelation of Q̄
  // Extra asset with this many returns, to exercise the min_obs exclusion; 0 = none.
  std::size_t short_asset_returns = 0;
  std::string short_asset_id = "SHORT";
};

struct SynthResult {
  std::vector<fs::path> files;
  dcc::DccSimulation simulation;
};

inline std::vector<data::Date> business_days(std::size_t count) {
  using namespace std::chrono;
  std::vector<data::Date> out;
  sys_days d = sys_days(year{2019} / January / 2);
  while (out.size() < count) {
    const weekday w{d};
    if (w != Saturday && w != Sunday) out.emplace_back(year_month_day{d});
    d += days{1};
  }
  return out;
}

inline void write_price_file(const fs::path& path, const std::vector<data::Date>& dates,
                             const std::vector<double>& log_returns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "Date,Close\n";
  double price = 100.0;
  char buf[40];
  for (std::size_t t = 0; t < dates.size(); ++t) {
    if (t > 0) price *= std::exp(log_returns[t - 1]);
    std::snprintf(buf, sizeof buf, "%.17g", price);
    out << dates[t].iso() << ',' << buf << '\n';
  }
}

inline SynthResult write_synthetic_dataset(const fs::path& dir, const SynthOptions& o) {
  const auto n = static_cast<Eigen::Index>(o.ids.size());
  if (n < 2) throw ConfigError("synthetic dataset needs at least 2 assets");
  math::Matrix qbar = math::Matrix::Constant(n, n, o.rho);
  qbar.diagonal().setOnes();
  const dcc::DccParams p{o.theta1, o.theta2, qbar};
  math::RandomStream rng(o.seed, 0);
  SynthResult res;
  res.simulation = dcc::simulate_dcc(p, std::vector<garch::GarchParams>(o.ids.size(), o.garch), o.returns, rng);
  fs::create_directories(dir);
  const auto dates = business_days(o.returns + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> r(o.returns);
    for (std::size_t t = 0; t < o.returns; ++t) r[t] = res.simulation.returns(static_cast<Eigen::Index>(t), j);
    const fs::path path = dir / (o.ids[static_cast<std::size_t>(j)] + ".csv");
    write_price_file(path, dates, r);
    res.files.push_back(path);
  }
  if (o.short_asset_returns > 0) {
    math::RandomStream srng(o.seed, 1);
    const auto path_sim = garch::simulate_garch(o.garch, o.short_asset_returns, srng);
    const std::vector<data::Date> sd(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(o.short_asset_returns + 1));
    const fs::path path = dir / (o.short_asset_id + ".csv");
    write_price_file(path, sd, path_sim.returns);
    res.files.push_back(path);
  }
  return res;
}

}  // namespace cdg::pipeline
