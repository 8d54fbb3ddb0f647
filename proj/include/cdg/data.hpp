#pragma once

// Price ingestion, log returns, inner-join alignment and summary diagnostics.

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cdg/error.hpp"
#include "cdg/stats.hpp"

namespace cdg::data {

// Calendar date (no intraday component).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : days_(std::chrono::sys_days(ymd)) {}
  Date(int y, unsigned m, unsigned d)
      : Date(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                         std::chrono::day{d}}) {}

  // Accepts YYYY-MM-DD, YYYY/MM/DD, MM/DD/YYYY, optionally followed by a time
  // component after 'T' or a space (ignored).
  static std::optional<Date> parse(std::string_view text) {
    auto cut = text.find_first_of("T ");
    if (cut != std::string_view::npos && cut >= 8) text = text.substr(0, cut);
    int a = 0, b = 0, c = 0;
    char s1 = 0, s2 = 0;
    const std::string buf(text);
    int consumed = 0;
    if (std::sscanf(buf.c_str(), "%d%c%d%c%d%n", &a, &s1, &b, &s2, &c, &consumed) != 5 ||
        consumed != static_cast<int>(buf.size()) || s1 != s2 || (s1 != '-' && s1 != '/'))
      return std::nullopt;
    int y, m, d;
    if (a >= 1000) {
      y = a; m = b; d = c;
    } else if (c >= 1000 && s1 == '/') {
      y = c; m = a; d = b;
    } else {
      return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(ymd);
  }

  std::string iso() const {
    const std::chrono::year_month_day ymd{days_};
    char out[16];
    std::snprintf(out, sizeof out, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return out;
  }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

struct Observation {
  Date date;
  double price = 0.0;
};

struct PriceSeries {
  std::string asset_id;
  std::vector<Observation> observations;  // strictly increasing dates, prices > 0
};

struct LoadResult {
  PriceSeries series;
  std::size_t duplicates_collapsed = 0;
};

struct ReturnSeries {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> returns;
};

struct ReturnPanel {
  std::vector<std::string> asset_ids;
  std::vector<Date> dates;
  Eigen::MatrixXd returns;  // T x n

  Eigen::Index rows() const noexcept { return returns.rows(); }
  Eigen::Index cols() const noexcept { return returns.cols(); }
};

struct AlignResult {
  ReturnPanel panel;
  std::vector<std::string> dropped;
};

struct AssetSummary {
  std::string asset_id;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Pairwise Pearson matrix; cells involving a zero-variance column are nullopt.
struct CorrelationTable {
  std::size_t n = 0;
  std::vector<std::optional<double>> cells;

  const std::optional<double>& at(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
};

struct SummaryStats {
  std::vector<AssetSummary> assets;
  CorrelationTable correlation;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline void strip_bom_and_cr(std::string& line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

// Reads one asset's CSV. The timestamp column is the first one whose value in
// the first data row parses as a date; the price column is headed "price" or
// "close" (case-insensitive), otherwise the first other numeric column. Rows
// are sorted by date; duplicate dates keep the last occurrence in the file.
inline LoadResult load_price_series(const std::filesystem::path& path, std::string asset_id = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file " + path.string());
  if (asset_id.empty()) asset_id = path.stem().string();

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_bom_and_cr(line);
    if (!detail::trim(line).empty()) {
      header = detail::split_csv(line);
      break;
    }
  }
  if (header.empty()) throw DataError("empty price file " + path.string());

  std::optional<std::size_t> date_col, price_col;
  std::map<Date, double> rows;
  std::size_t duplicates = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_bom_and_cr(line);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (!date_col) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (Date::parse(fields[c])) {
          date_col = c;
          break;
        }
      }
      if (!date_col) throw DataError("no date column in " + path.string(), line_no);
      for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string h = detail::lower(header[c]);
        if (c != *date_col && (h == "price" || h == "close")) {
          price_col = c;
          break;
        }
      }
      if (!price_col) {
        for (std::size_t c = 0; c < fields.size(); ++c) {
          if (c != *date_col && detail::parse_number(fields[c])) {
            price_col = c;
            break;
          }
        }
      }
      if (!price_col) throw DataError("no price column in " + path.string(), line_no);
    }
    if (fields.size() <= std::max(*date_col, *price_col))
      throw DataError("too few fields in " + path.string(), line_no);
    const auto date = Date::parse(fields[*date_col]);
    if (!date) throw DataError("unparseable timestamp '" + fields[*date_col] + "'", line_no);
    const auto price = detail::parse_number(fields[*price_col]);
    if (!price || !std::isfinite(*price))
      throw DataError("unparseable price '" + fields[*price_col] + "'", line_no);
    if (!(*price > 0.0)) throw DataError("non-positive price " + fields[*price_col], line_no);
    auto [it, inserted] = rows.insert_or_assign(*date, *price);
    if (!inserted) ++duplicates;
  }

  LoadResult result;
  result.series.asset_id = std::move(asset_id);
  result.series.observations.reserve(rows.size());
  for (const auto& [d, p] : rows) result.series.observations.push_back({d, p});
  result.duplicates_collapsed = duplicates;
  return result;
}

// r_t = ln(P_t / P_{t-1}), dated at t.
inline ReturnSeries log_returns(const PriceSeries& s) {
  if (s.observations.size() < 2)
    throw InsufficientDataError("log_returns: " + s.asset_id + " has fewer than 2 prices");
  ReturnSeries out;
  out.asset_id = s.asset_id;
  out.dates.reserve(s.observations.size() - 1);
  out.returns.reserve(s.observations.size() - 1);
  for (std::size_t t = 1; t < s.observations.size(); ++t) {
    out.dates.push_back(s.observations[t].date);
    out.returns.push_back(std::log(s.observations[t].price / s.observations[t - 1].price));
  }
  return out;
}

// Drops series with fewer than min_obs observations, then inner-joins the
// rest on their dates.
inline AlignResult align_panel(const std::vector<ReturnSeries>& series, std::size_t min_obs = 50) {
  if (series.size() < 2) throw InsufficientDataError("align_panel: need at least 2 series");
  AlignResult result;
  std::vector<const ReturnSeries*> kept;
  for (const auto& s : series) {
    if (s.returns.size() < min_obs) result.dropped.push_back(s.asset_id);
    else kept.push_back(&s);
  }
  if (kept.size() < 2)
    throw InsufficientDataError("align_panel: fewer than 2 assets have at least " +
                                std::to_string(min_obs) + " observations");

  std::vector<Date> common = kept.front()->dates;
  for (std::size_t k = 1; k < kept.size(); ++k) {
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), kept[k]->dates.begin(),
                          kept[k]->dates.end(), std::back_inserter(next));
    common = std::move(next);
  }

  ReturnPanel& panel = result.panel;
  panel.dates = common;
  panel.returns.resize(static_cast<Eigen::Index>(common.size()), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    panel.asset_ids.push_back(kept[k]->asset_id);
    const auto& dates = kept[k]->dates;
    std::size_t pos = 0;
    for (std::size_t t = 0; t < common.size(); ++t) {
      while (dates[pos] < common[t]) ++pos;
      panel.returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = kept[k]->returns[pos];
    }
  }
  return result;
}

inline SummaryStats summarize(const ReturnPanel& panel) {
  const Eigen::Index T = panel.rows(), n = panel.cols();
  if (T == 0 || n == 0) throw InsufficientDataError("summarize: empty panel");
  SummaryStats out;
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& c = cols[static_cast<std::size_t>(j)];
    c.resize(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) c[static_cast<std::size_t>(t)] = panel.returns(t, j);
    AssetSummary a;
    a.asset_id = j < static_cast<Eigen::Index>(panel.asset_ids.size()) ? panel.asset_ids[static_cast<std::size_t>(j)] : "";
    a.mean = stats::mean(c);
    a.stddev = T > 1 ? std::sqrt(stats::variance(c)) : 0.0;
    a.min = *std::min_element(c.begin(), c.end());
    a.max = *std::max_element(c.begin(), c.end());
    out.assets.push_back(std::move(a));
  }
  const std::size_t nn = static_cast<std::size_t>(n);
  out.correlation.n = nn;
  out.correlation.cells.assign(nn * nn, std::nullopt);
  for (std::size_t i = 0; i < nn; ++i) {
    for (std::size_t j = i; j < nn; ++j) {
      std::optional<double> r;
      if (T >= 2) r = stats::pearson(cols[i], cols[j]);
      if (r && i == j) r = 1.0;
      out.correlation.cells[i * nn + j] = r;
      out.correlation.cells[j * nn + i] = r;
    }
  }
  return out;
}

// Full-precision panel CSV: timestamp column then one column per asset.
inline void write_panel_csv(const ReturnPanel& panel, std::ostream& out) {
  out << "timestamp";
  for (const auto& id : panel.asset_ids) out << ',' << id;
  out << '\n';
  char buf[40];
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    out << panel.dates[static_cast<std::size_t>(t)].iso();
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", panel.returns(t, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

inline ReturnPanel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("panel file not found: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty panel file " + path.string());
  ++line_no;
  detail::strip_bom_and_cr(line);
  const auto header = detail::split_csv(line);
  if (header.size() < 2) throw DataError("panel header needs timestamp and asset columns", 1);
  ReturnPanel panel;
  panel.asset_ids.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_bom_and_cr(line);
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != header.size()) throw DataError("panel row has wrong field count", line_no);
    const auto d = Date::parse(f[0]);
    if (!d) throw DataError("unparseable timestamp in panel", line_no);
    if (!panel.dates.empty() && !(panel.dates.back() < *d))
      throw DataError("panel timestamps not strictly increasing", line_no);
    panel.dates.push_back(*d);
    std::vector<double> row;
    for (std::size_t j = 1; j < f.size(); ++j) {
      const auto v = detail::parse_number(f[j]);
      if (!v) throw DataError("unparseable return in panel", line_no);
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  panel.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.asset_ids.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < rows[t].size(); ++j)
      panel.returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
  return panel;
}

}  // namespace cdg::data
