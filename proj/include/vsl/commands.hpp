#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "vsl/capacity_model.hpp"
#include "vsl/dataset.hpp"
#include "vsl/errors.hpp"
#include "vsl/observer.hpp"
#include "vsl/psychometrics.hpp"
#include "vsl/report.hpp"
#include "vsl/text_io.hpp"

namespace vsl {

/// Everything a command may need. Unset optionals fall back to defaults or
/// are reported as missing by the command that requires them.
struct ExperimentConfig {
  std::optional<TaskKind> task;
  std::vector<int> difficulties;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
  unsigned jobs = 1;

  // simulate
  std::optional<double> d1;
  std::optional<double> alpha;
  CriterionPolicy criterion = OptimalCriterion{};

  // inputs
  std::filesystem::path manifest, responses, cells, dprime, fit;

  FitOptions fit_options;
};

inline CriterionPolicy parse_criterion(const std::string& s) {
  if (s == "optimal") return OptimalCriterion{};
  return FixedCriterion{text::parse_double(s, "criterion")};
}

/// Fills `cfg` from a JSON document; keys mirror ExperimentConfig. Only keys
/// that are present are applied, so flags parsed afterwards take precedence.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  try {
    if (j.contains("task")) cfg.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("difficulties")) cfg.difficulties = j.at("difficulties").get<std::vector<int>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
    const std::pair<const char*, std::filesystem::path*> paths[] = {
        {"manifest", &cfg.manifest}, {"responses", &cfg.responses}, {"cells", &cfg.cells},
        {"dprime", &cfg.dprime}, {"fit", &cfg.fit}};
    for (auto [key, dst] : paths)
      if (j.contains(key) && j.at(key).is_string()) *dst = j.at(key).get<std::string>();
    if (j.contains("observer")) {
      const auto& o = j.at("observer");
      if (o.contains("d1")) cfg.d1 = o.at("d1").get<double>();
      if (o.contains("alpha")) cfg.alpha = o.at("alpha").get<double>();
      if (o.contains("criterion")) {
        const auto& c = o.at("criterion");
        cfg.criterion = c.is_number() ? CriterionPolicy{FixedCriterion{c.get<double>()}}
                                      : parse_criterion(c.get<std::string>());
      }
    }
    if (j.contains("fit_options")) {
      const auto& f = j.at("fit_options");
      if (f.contains("alpha_grid")) cfg.fit_options.alpha_grid = f.at("alpha_grid").get<std::vector<double>>();
      if (f.contains("tolerance")) cfg.fit_options.simplex.diameter_tolerance = f.at("tolerance").get<double>();
      if (f.contains("max_evaluations")) cfg.fit_options.simplex.max_evaluations = f.at("max_evaluations").get<int>();
      if (f.contains("d1_max")) cfg.fit_options.d1_max = f.at("d1_max").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  auto in = text::open_in(path);
  try {
    apply_config_json(cfg, nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

namespace detail {

template <class T>
const T& require(const std::optional<T>& v, const char* what) {
  if (!v) throw ValidationError(std::string("missing required option --") + what);
  return *v;
}

inline void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string("missing required option --") + what);
}

inline void ensure_dir(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());
}

}  // namespace detail

/// gen: one dataset per difficulty level, all written into out_dir, plus a
/// combined manifest.jsonl. Each level draws from its own derived seed.
inline Manifest cmd_gen(const ExperimentConfig& cfg, std::ostream& log) {
  const TaskKind task = detail::require(cfg.task, "task");
  const std::uint64_t seed = detail::require(cfg.seed, "seed");
  detail::require_path(cfg.out_dir, "out");
  const std::vector<int> levels = cfg.difficulties.empty() ? std::vector<int>{1} : cfg.difficulties;
  for (int lv : levels) (void)feature_level(task, lv);

  Manifest all;
  for (int lv : levels) {
    Manifest rows = generate_dataset(task, lv, derive_seed(seed, static_cast<std::uint64_t>(lv)), cfg.out_dir,
                                     {true, cfg.jobs});
    all.insert(all.end(), rows.begin(), rows.end());
  }
  write_manifest(cfg.out_dir / "manifest.jsonl", all);

  std::map<std::tuple<int, int, Split>, std::pair<int, int>> counts;
  for (const auto& r : all) {
    auto& c = counts[{r.difficulty, r.set_size, r.split}];
    (r.target_present ? c.first : c.second) += 1;
  }
  log << "task " << to_string(task) << ", " << all.size() << " images in " << cfg.out_dir.string() << "\n";
  log << "difficulty  set_size  split  present  absent\n";
  for (const auto& [key, c] : counts) {
    const auto& [lv, n, split] = key;
    log << std::setw(10) << lv << std::setw(10) << n << std::setw(7) << to_string(split) << std::setw(9) << c.first
        << std::setw(8) << c.second << "\n";
  }
  return all;
}

inline ResponseFile cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  detail::require_path(cfg.manifest, "manifest");
  ObserverParams p;
  p.d1 = detail::require(cfg.d1, "d1");
  p.alpha = detail::require(cfg.alpha, "alpha");
  p.criterion = cfg.criterion;
  p.seed = detail::require(cfg.seed, "seed");
  p.validate();

  const Manifest manifest = read_manifest(cfg.manifest);
  ResponseFile responses = simulate_observer(p, manifest);
  const std::filesystem::path out = cfg.out_dir.empty() ? "responses.csv" : cfg.out_dir;
  if (out.has_parent_path()) detail::ensure_dir(out.parent_path());
  write_responses(out, responses);

  const auto cells = aggregate_cells(manifest, responses);
  log << responses.size() << " responses written to " << out.string() << "\n";
  for (const auto& c : cells)
    log << "  " << to_string(c.task) << " d" << c.difficulty << " n=" << c.set_size
        << " pc=" << text::format_fixed(c.pc, 4) << "\n";
  return responses;
}

/// analyze: writes cells.csv, dprime.csv and slopes.csv into out_dir.
/// Series with fewer than two positive d' values get no slope row.
inline std::vector<CellStats> cmd_analyze(const ExperimentConfig& cfg, std::ostream& log) {
  detail::require_path(cfg.manifest, "manifest");
  detail::require_path(cfg.responses, "responses");
  const Manifest manifest = read_manifest(cfg.manifest);
  const ResponseFile responses = read_responses(cfg.responses);
  const auto cells = aggregate_cells(manifest, responses);

  const std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(".") : cfg.out_dir;
  detail::ensure_dir(dir);
  {
    std::ostringstream s;
    write_cells(s, cells);
    text::write_file(dir / "cells.csv", s.str());
  }
  {
    std::ostringstream s;
    write_dprimes(s, cells);
    text::write_file(dir / "dprime.csv", s.str());
  }
  std::map<std::pair<TaskKind, int>, std::vector<DPrimePoint>> series;
  for (const auto& c : cells) series[{c.task, c.difficulty}].push_back(cell_dprime(c));
  std::vector<SlopeRow> slopes;
  for (const auto& [key, pts] : series) {
    try {
      slopes.push_back({key.first, key.second, loglog_slope(pts)});
    } catch (const InsufficientDataError&) {
      log << "warning: no slope for " << to_string(key.first) << " difficulty " << key.second
          << " (fewer than 2 positive d' values)\n";
    }
  }
  {
    std::ostringstream s;
    write_slopes(s, slopes);
    text::write_file(dir / "slopes.csv", s.str());
  }
  log << cells.size() << " cells analyzed\n";
  for (const auto& r : slopes)
    log << "  " << to_string(r.task) << " d" << r.difficulty << " log-log slope "
        << text::format_fixed(r.estimate.slope, 4) << " (" << r.estimate.points_used << " points)\n";
  return cells;
}

inline CapacityFit cmd_fit(const ExperimentConfig& cfg, std::ostream& log) {
  detail::require_path(cfg.cells, "cells");
  std::vector<CellStats> cells = read_cells(cfg.cells);
  if (cfg.task) std::erase_if(cells, [&](const CellStats& c) { return c.task != *cfg.task; });
  std::set<TaskKind> tasks;
  for (const auto& c : cells) tasks.insert(c.task);
  if (tasks.size() > 1) throw ValidationError("cells hold several tasks; select one with --task");

  const CapacityFit fit = fit_capacity(cells, cfg.fit_options);
  const std::filesystem::path out = cfg.out_dir.empty() ? "fit.json" : cfg.out_dir;
  if (out.has_parent_path()) detail::ensure_dir(out.parent_path());
  write_fit(out, fit);

  log << "alpha = " << text::format_fixed(fit.params.alpha, 4) << (fit.converged ? "" : " (not converged)") << "\n";
  for (const auto& [lv, d1] : fit.params.d1_by_difficulty)
    log << "d1[" << lv << "] = " << text::format_fixed(d1, 4) << "\n";
  log << "nll = " << text::format_fixed(fit.neg_log_likelihood, 4) << ", " << fit.evaluations << " evaluations\n";
  return fit;
}

/// report: report.svg and report.csv into out_dir.
inline std::vector<ReportRow> cmd_report(const ExperimentConfig& cfg, std::ostream& log) {
  detail::require_path(cfg.cells, "cells");
  detail::require_path(cfg.dprime, "dprime");
  detail::require_path(cfg.fit, "fit");
  std::vector<CellStats> cells = read_cells(cfg.cells);
  std::vector<DPrimeRow> dprimes = read_dprimes(cfg.dprime);
  if (cfg.task) {
    std::erase_if(cells, [&](const CellStats& c) { return c.task != *cfg.task; });
    std::erase_if(dprimes, [&](const DPrimeRow& r) { return r.task != *cfg.task; });
  }
  const CapacityFit fit = read_fit(cfg.fit);
  const auto rows = build_report(cells, dprimes, fit);

  const std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(".") : cfg.out_dir;
  detail::ensure_dir(dir);
  text::write_file(dir / "report.svg", render_report_svg(rows, fit));
  std::ostringstream csv;
  write_report_csv(csv, rows);
  text::write_file(dir / "report.csv", csv.str());
  log << "wrote " << (dir / "report.svg").string() << " and " << (dir / "report.csv").string() << "\n";
  return rows;
}

}  // namespace vsl
