#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vsl/capacity_model.hpp"
#include "vsl/errors.hpp"
#include "vsl/psychometrics.hpp"
#include "vsl/text_io.hpp"

namespace vsl {

// ---- fit.json ----------------------------------------------------------------

inline nlohmann::ordered_json fit_to_json(const CapacityFit& fit) {
  nlohmann::ordered_json j;
  j["alpha"] = fit.params.alpha;
  nlohmann::ordered_json d1 = nlohmann::ordered_json::object();
  for (const auto& [lv, v] : fit.params.d1_by_difficulty) d1[std::to_string(lv)] = v;
  j["d1"] = d1;
  j["nll"] = fit.neg_log_likelihood;
  j["converged"] = fit.converged;
  j["evaluations"] = fit.evaluations;
  nlohmann::ordered_json profile = nlohmann::ordered_json::array();
  for (const auto& [a, nll] : fit.alpha_profile) profile.push_back({a, nll});
  j["alpha_profile"] = profile;
  return j;
}

inline void write_fit(const std::filesystem::path& path, const CapacityFit& fit) {
  text::write_file(path, fit_to_json(fit).dump(2) + "\n");
}

inline CapacityFit fit_from_json(const nlohmann::json& j, const std::string& source = "fit") {
  try {
    CapacityFit fit;
    fit.params.alpha = j.at("alpha").get<double>();
    for (const auto& [key, v] : j.at("d1").items())
      fit.params.d1_by_difficulty[text::parse_int<int>(key, source + ": d1 key")] = v.get<double>();
    fit.neg_log_likelihood = j.at("nll").get<double>();
    fit.converged = j.at("converged").get<bool>();
    fit.evaluations = j.at("evaluations").get<int>();
    for (const auto& pair : j.at("alpha_profile"))
      fit.alpha_profile.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": malformed fit document (" + e.what() + ")");
  }
}

inline CapacityFit read_fit(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  return fit_from_json(j, path.string());
}

// ---- report ------------------------------------------------------------------

/// Observed and model values for one cell, as written to report.csv.
struct ReportRow {
  TaskKind task;
  int difficulty;
  int set_size;
  double pc;
  double pc_model;
  double dprime;
  double dprime_model;
};

inline double model_dprime(double pc_model) {
  return pc_model <= 0.5 ? 0.0 : 2.0 * normal_quantile(std::min(pc_model, 1.0 - 1e-16));
}

/// Joins cells, d' rows and the fit; every key must be present on all sides.
inline std::vector<ReportRow> build_report(const std::vector<CellStats>& cells,
                                           const std::vector<DPrimeRow>& dprimes, const CapacityFit& fit) {
  std::set<TaskKind> tasks;
  for (const auto& c : cells) tasks.insert(c.task);
  if (tasks.size() != 1) throw ValidationError("report expects cells from exactly one task");

  std::map<CellKey, double> dp;
  for (const auto& r : dprimes) dp[{r.task, r.difficulty, r.point.set_size}] = r.point.dprime;
  if (dp.size() != cells.size()) throw ValidationError("cells and d' tables list different cells");

  std::vector<ReportRow> rows;
  for (const auto& c : cells) {
    const auto d1 = fit.params.d1_by_difficulty.find(c.difficulty);
    if (d1 == fit.params.d1_by_difficulty.end())
      throw ValidationError("fit has no d1 for difficulty " + std::to_string(c.difficulty));
    const auto obs = dp.find({c.task, c.difficulty, c.set_size});
    if (obs == dp.end())
      throw ValidationError("no d' row for " + std::string(to_string(c.task)) + " difficulty " +
                            std::to_string(c.difficulty) + " set size " + std::to_string(c.set_size));
    const double pcm = predicted_pc(d1->second, fit.params.alpha, c.set_size);
    rows.push_back({c.task, c.difficulty, c.set_size, c.pc, pcm, obs->second, model_dprime(pcm)});
  }
  return rows;
}

inline constexpr std::string_view kReportHeader =
    "task,difficulty,set_size,pc,pc_model,dprime,dprime_model";

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows)
    out << to_string(r.task) << ',' << r.difficulty << ',' << r.set_size << ',' << text::format_double(r.pc)
        << ',' << text::format_double(r.pc_model) << ',' << text::format_double(r.dprime) << ','
        << text::format_double(r.dprime_model) << '\n';
}

namespace detail {

inline constexpr std::array<const char*, 6> kSeriesColors = {"#1b6ca8", "#d1495b", "#2e933c",
                                                             "#edae49", "#6a4c93", "#00798c"};

struct Axis {
  double lo, hi;  // data range (already log-transformed for log axes)
  double pix_lo, pix_hi;
  double map(double v) const { return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo); }
};

inline std::string fx(double v) { return text::format_fixed(v, 2); }

struct Panel {
  std::string title, x_label, y_label;
  bool log_axes;
  double ox, oy;  // top-left corner of the panel
};

inline constexpr double kPanelW = 420, kPanelH = 340;
inline constexpr double kPlotL = 60, kPlotR = 20, kPlotT = 40, kPlotB = 50;

// Draws one chart. `observed` and `model` hold, per difficulty, (n, value) pairs.
inline void draw_panel(std::ostream& svg, const Panel& p, const std::map<int, std::vector<std::pair<int, double>>>& observed,
                       const std::map<int, std::vector<std::pair<int, double>>>& model,
                       const std::vector<double>& y_ticks) {
  auto tx = [&](double n) { return p.log_axes ? std::log2(n) : n; };
  auto ty = [&](double v) { return p.log_axes ? std::log2(v) : v; };
  const double x_lo = p.log_axes ? tx(1) - 0.25 : 0.0;
  const double x_hi = p.log_axes ? tx(8) + 0.25 : 9.0;
  const Axis ax{x_lo, x_hi, p.ox + kPlotL, p.ox + kPanelW - kPlotR};
  const Axis ay{ty(y_ticks.front()), ty(y_ticks.back()), p.oy + kPanelH - kPlotB, p.oy + kPlotT};

  svg << "<g>\n";
  svg << "<text x=\"" << fx(p.ox + kPanelW / 2) << "\" y=\"" << fx(p.oy + 24)
      << "\" text-anchor=\"middle\" font-size=\"15\">" << p.title << "</text>\n";
  svg << "<rect x=\"" << fx(ax.pix_lo) << "\" y=\"" << fx(ay.pix_hi) << "\" width=\"" << fx(ax.pix_hi - ax.pix_lo)
      << "\" height=\"" << fx(ay.pix_lo - ay.pix_hi) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int n : kSetSizes) {
    const double x = ax.map(tx(n));
    svg << "<line x1=\"" << fx(x) << "\" y1=\"" << fx(ay.pix_lo) << "\" x2=\"" << fx(x) << "\" y2=\""
        << fx(ay.pix_lo + 5) << "\" stroke=\"#444\"/>";
    svg << "<text x=\"" << fx(x) << "\" y=\"" << fx(ay.pix_lo + 19) << "\" text-anchor=\"middle\" font-size=\"12\">"
        << n << "</text>\n";
  }
  for (double t : y_ticks) {
    const double y = ay.map(ty(t));
    svg << "<line x1=\"" << fx(ax.pix_lo - 5) << "\" y1=\"" << fx(y) << "\" x2=\"" << fx(ax.pix_lo) << "\" y2=\""
        << fx(y) << "\" stroke=\"#444\"/>";
    svg << "<text x=\"" << fx(ax.pix_lo - 8) << "\" y=\"" << fx(y + 4) << "\" text-anchor=\"end\" font-size=\"12\">"
        << text::format_double(t) << "</text>\n";
  }
  svg << "<text x=\"" << fx((ax.pix_lo + ax.pix_hi) / 2) << "\" y=\"" << fx(p.oy + kPanelH - 10)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << p.x_label << "</text>\n";
  svg << "<text x=\"" << fx(p.ox + 16) << "\" y=\"" << fx((ay.pix_lo + ay.pix_hi) / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 " << fx(p.ox + 16) << ' '
      << fx((ay.pix_lo + ay.pix_hi) / 2) << ")\">" << p.y_label << "</text>\n";

  auto clip_y = [&](double v) { return std::clamp(ty(v), ay.lo, ay.hi); };
  std::size_t k = 0;
  for (const auto& [level, pts] : observed) {
    const char* color = kSeriesColors[k++ % kSeriesColors.size()];
    if (auto m = model.find(level); m != model.end()) {
      svg << "<polyline class=\"model\" data-difficulty=\"" << level << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-dasharray=\"5 4\" points=\"";
      for (std::size_t i = 0; i < m->second.size(); ++i)
        svg << (i ? " " : "") << fx(ax.map(tx(m->second[i].first))) << ',' << fx(ay.map(clip_y(m->second[i].second)));
      svg << "\"/>\n";
    }
    svg << "<polyline class=\"data\" data-difficulty=\"" << level << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      svg << (i ? " " : "") << fx(ax.map(tx(pts[i].first))) << ',' << fx(ay.map(clip_y(pts[i].second)));
    svg << "\"/>\n";
    for (const auto& [n, v] : pts)
      svg << "<circle cx=\"" << fx(ax.map(tx(n))) << "\" cy=\"" << fx(ay.map(clip_y(v))) << "\" r=\"3.5\" fill=\""
          << color << "\"/>\n";
    svg << "<text x=\"" << fx(ax.pix_hi - 8) << "\" y=\"" << fx(ay.pix_hi + 16 * static_cast<double>(k))
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">difficulty " << level << "</text>\n";
  }
  svg << "</g>\n";
}

// Powers of two spanning [lo, hi].
inline std::vector<double> log2_ticks(double lo, double hi) {
  double t = std::exp2(std::floor(std::log2(lo)));
  std::vector<double> ticks;
  while (ticks.empty() || ticks.back() < hi) {
    ticks.push_back(t);
    t *= 2.0;
  }
  if (ticks.size() < 2) ticks.push_back(t);
  return ticks;
}

}  // namespace detail

/// Two charts side by side: proportion correct against set size on linear
/// axes, and d' against set size on log-log axes. Dashed lines are the fitted
/// model. Output depends only on `rows` and `fit`.
inline std::string render_report_svg(const std::vector<ReportRow>& rows, const CapacityFit& fit) {
  using Series = std::map<int, std::vector<std::pair<int, double>>>;
  Series pc_obs, pc_model, dp_obs, dp_model;
  double dp_lo = std::numeric_limits<double>::infinity(), dp_hi = 0.0;
  for (const auto& r : rows) {
    pc_obs[r.difficulty].emplace_back(r.set_size, r.pc);
    if (r.dprime > 0.0) {
      dp_obs[r.difficulty].emplace_back(r.set_size, r.dprime);
      dp_lo = std::min(dp_lo, r.dprime);
      dp_hi = std::max(dp_hi, r.dprime);
    }
  }
  for (const auto& [level, d1] : fit.params.d1_by_difficulty) {
    if (!pc_obs.count(level)) continue;
    for (int n = 1; n <= 8; ++n) {
      const double pcm = predicted_pc(d1, fit.params.alpha, n);
      pc_model[level].emplace_back(n, pcm);
      const double dm = model_dprime(pcm);
      if (dm > 0.0) {
        dp_model[level].emplace_back(n, dm);
        dp_lo = std::min(dp_lo, dm);
        dp_hi = std::max(dp_hi, dm);
      }
    }
  }
  if (!(dp_hi > 0.0)) {
    dp_lo = 0.5;
    dp_hi = 4.0;
  }
  const std::string task = rows.empty() ? "" : std::string(to_string(rows.front().task));

  std::ostringstream svg;
  const double width = 2 * detail::kPanelW, height = detail::kPanelH + 30;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fx(width) << "\" height=\""
      << detail::fx(height) << "\" viewBox=\"0 0 " << detail::fx(width) << ' ' << detail::fx(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  detail::draw_panel(svg, {"Proportion correct (" + task + ")", "set size", "proportion correct", false, 0, 0},
                     pc_obs, pc_model, {0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  detail::draw_panel(svg, {"d' (" + task + ", log-log)", "set size", "d'", true, detail::kPanelW, 0}, dp_obs,
                     dp_model, detail::log2_ticks(dp_lo, dp_hi));
  svg << "<text x=\"" << detail::fx(width / 2) << "\" y=\"" << detail::fx(height - 8)
      << "\" text-anchor=\"middle\" font-size=\"12\">fitted alpha = " << text::format_fixed(fit.params.alpha, 3)
      << " (dashed: model)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace vsl
