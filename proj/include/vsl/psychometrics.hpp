#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "vsl/dataset.hpp"
#include "vsl/errors.hpp"
#include "vsl/normal.hpp"
#include "vsl/records.hpp"
#include "vsl/text_io.hpp"

namespace vsl {

struct DPrimePoint {
  int set_size = 1;
  double dprime = 0.0;
  bool clamped = false;
};

struct SlopeEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
};

/// Proportion correct to display-level d' for an unbiased yes/no observer:
/// d' = 2 z(pc). pc is first clamped into [1/(2N), 1 - 1/(2N)].
inline DPrimePoint pc_to_dprime(double pc, long n_trials, int set_size = 0) {
  if (!(pc >= 0.0 && pc <= 1.0)) throw ValidationError("pc must lie in [0, 1]");
  if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
  const double lo = 1.0 / (2.0 * static_cast<double>(n_trials));
  const double hi = 1.0 - lo;
  DPrimePoint p;
  p.set_size = set_size;
  p.clamped = pc < lo || pc > hi || pc == 0.0 || pc == 1.0;
  const double used = std::clamp(pc, lo, hi);
  // z(0.5) is exactly zero; keep chance at exactly zero d'.
  p.dprime = used == 0.5 ? 0.0 : 2.0 * normal_quantile(used);
  return p;
}

/// OLS of ln d' on ln n, over points with positive d'.
inline SlopeEstimate loglog_slope(const std::vector<DPrimePoint>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points)
    if (p.dprime > 0.0 && p.set_size >= 1)
      xy.emplace_back(std::log(static_cast<double>(p.set_size)), std::log(p.dprime));
  std::set<double> distinct_x;
  for (const auto& [x, _] : xy) distinct_x.insert(x);
  if (xy.size() < 2 || distinct_x.size() < 2)
    throw InsufficientDataError("log-log slope needs at least 2 points with d' > 0 at distinct set sizes");

  const double n = static_cast<double>(xy.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  SlopeEstimate s;
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  s.points_used = static_cast<int>(xy.size());
  return s;
}

/// Key ordering cells by task, difficulty, set size.
using CellKey = std::tuple<TaskKind, int, int>;

/// Joins responses to test-split manifest rows and counts per cell.
/// Unknown, duplicated, train-split and missing trial ids are all reported
/// together in one ValidationError.
inline std::vector<CellStats> aggregate_cells(const Manifest& manifest, const ResponseFile& responses) {
  std::unordered_map<std::string, const ManifestRow*> by_id;
  for (const auto& row : manifest) by_id.emplace(row.trial_id, &row);

  std::vector<std::string> unknown, duplicate, not_test, missing;
  std::unordered_map<std::string, Response> answered;
  for (const auto& r : responses) {
    const auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) {
      unknown.push_back(r.trial_id);
      continue;
    }
    if (it->second->split != Split::Test) {
      not_test.push_back(r.trial_id);
      continue;
    }
    if (!answered.emplace(r.trial_id, r.response).second) duplicate.push_back(r.trial_id);
  }
  for (const auto& row : manifest)
    if (row.split == Split::Test && !answered.count(row.trial_id)) missing.push_back(row.trial_id);

  if (!unknown.empty() || !duplicate.empty() || !not_test.empty() || !missing.empty()) {
    std::ostringstream msg;
    msg << "response validation failed";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "\n  " << label << " (" << ids.size() << "):";
      const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
      for (std::size_t i = 0; i < shown; ++i) msg << ' ' << ids[i];
      if (shown < ids.size()) msg << " ...";
    };
    list("unknown trial_id", unknown);
    list("duplicate trial_id", duplicate);
    list("not a test trial", not_test);
    list("missing response", missing);
    throw ValidationError(msg.str());
  }

  std::map<CellKey, CellStats> cells;
  for (const auto& row : manifest) {
    if (row.split != Split::Test) continue;
    CellStats& c = cells[{row.task, row.difficulty, row.set_size}];
    c.task = row.task;
    c.difficulty = row.difficulty;
    c.set_size = row.set_size;
    const bool said_present = answered.at(row.trial_id) == Response::Present;
    if (row.target_present) {
      ++c.n_present;
      c.hits += said_present ? 1 : 0;
    } else {
      ++c.n_absent;
      c.false_alarms += said_present ? 1 : 0;
    }
  }
  std::vector<CellStats> out;
  for (auto& [_, c] : cells) {
    c.pc = proportion_correct(c.hits, c.false_alarms, c.n_present, c.n_absent);
    out.push_back(c);
  }
  return out;
}

/// d' point for a cell, with the clamp sized by the cell's trial count.
inline DPrimePoint cell_dprime(const CellStats& c) { return pc_to_dprime(c.pc, c.trials(), c.set_size); }

struct SlopeRow {
  TaskKind task;
  int difficulty;
  SlopeEstimate estimate;
};

/// One slope per (task, difficulty) series.
inline std::vector<SlopeRow> slopes_by_series(const std::vector<CellStats>& cells) {
  std::map<std::pair<TaskKind, int>, std::vector<DPrimePoint>> series;
  for (const auto& c : cells) series[{c.task, c.difficulty}].push_back(cell_dprime(c));
  std::vector<SlopeRow> out;
  for (const auto& [key, pts] : series) out.push_back({key.first, key.second, loglog_slope(pts)});
  return out;
}

// ---- CSV I/O ---------------------------------------------------------------

inline constexpr std::string_view kCellsHeader =
    "task,difficulty,set_size,n_present,n_absent,hits,false_alarms,pc,dprime,clamped";
inline constexpr std::string_view kDPrimeHeader = "task,difficulty,set_size,dprime,clamped";
inline constexpr std::string_view kSlopesHeader = "task,difficulty,slope,intercept,points_used";

inline void write_cells(std::ostream& out, const std::vector<CellStats>& cells) {
  out << kCellsHeader << '\n';
  for (const auto& c : cells) {
    const DPrimePoint d = cell_dprime(c);
    out << to_string(c.task) << ',' << c.difficulty << ',' << c.set_size << ',' << c.n_present << ','
        << c.n_absent << ',' << c.hits << ',' << c.false_alarms << ',' << text::format_double(c.pc) << ','
        << text::format_double(d.dprime) << ',' << (d.clamped ? "true" : "false") << '\n';
  }
}

inline void write_dprimes(std::ostream& out, const std::vector<CellStats>& cells) {
  out << kDPrimeHeader << '\n';
  for (const auto& c : cells) {
    const DPrimePoint d = cell_dprime(c);
    out << to_string(c.task) << ',' << c.difficulty << ',' << c.set_size << ','
        << text::format_double(d.dprime) << ',' << (d.clamped ? "true" : "false") << '\n';
  }
}

inline void write_slopes(std::ostream& out, const std::vector<SlopeRow>& rows) {
  out << kSlopesHeader << '\n';
  for (const auto& r : rows)
    out << to_string(r.task) << ',' << r.difficulty << ',' << text::format_double(r.estimate.slope) << ','
        << text::format_double(r.estimate.intercept) << ',' << r.estimate.points_used << '\n';
}

namespace detail {

inline std::vector<std::vector<std::string>> read_table(std::istream& in, std::string_view header,
                                                        const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || text::strip_cr(line) != header)
    throw ValidationError(text::where(source, 1) + ": header must be '" + std::string(header) + "'");
  const std::size_t width = text::split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = text::strip_cr(line);
    if (line.empty()) continue;
    auto f = text::split_csv(line);
    if (f.size() != width)
      throw ValidationError(text::where(source, lineno) + ": expected " + std::to_string(width) +
                            " fields, got " + std::to_string(f.size()));
    f.push_back(std::to_string(lineno));  // trailing line number for diagnostics
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace detail

/// Reads cells.csv. pc is recomputed from the counts; the d' columns are ignored.
inline std::vector<CellStats> read_cells(std::istream& in, const std::string& source = "cells") {
  std::vector<CellStats> cells;
  for (const auto& f : detail::read_table(in, kCellsHeader, source)) {
    const std::string ctx = text::where(source, std::stoul(f.back()));
    try {
      cells.push_back(make_cell(parse_task(f[0]), text::parse_int<int>(f[1], ctx),
                                text::parse_int<int>(f[2], ctx), text::parse_int<long>(f[3], ctx),
                                text::parse_int<long>(f[4], ctx), text::parse_int<long>(f[5], ctx),
                                text::parse_int<long>(f[6], ctx)));
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.rfind(ctx, 0) == 0) throw;
      throw ValidationError(ctx + ": " + msg);
    }
  }
  return cells;
}

inline std::vector<CellStats> read_cells(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_cells(in, path.string());
}

struct DPrimeRow {
  TaskKind task;
  int difficulty;
  DPrimePoint point;
};

inline std::vector<DPrimeRow> read_dprimes(std::istream& in, const std::string& source = "dprime") {
  std::vector<DPrimeRow> rows;
  for (const auto& f : detail::read_table(in, kDPrimeHeader, source)) {
    const std::string ctx = text::where(source, std::stoul(f.back()));
    DPrimeRow r{parse_task(f[0]), text::parse_int<int>(f[1], ctx), {}};
    r.point.set_size = text::parse_int<int>(f[2], ctx);
    r.point.dprime = text::parse_double(f[3], ctx);
    r.point.clamped = text::parse_bool(f[4], ctx);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<DPrimeRow> read_dprimes(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_dprimes(in, path.string());
}

}  // namespace vsl
