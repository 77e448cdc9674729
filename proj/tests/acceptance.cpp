// Acceptance suite: one PASS/FAIL line per criterion; exit status is nonzero
// if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <sys/wait.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mc_oracle.hpp"
#include "test_util.hpp"
#include "vsl/vsl.hpp"

namespace {

using namespace vsl;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

int failures = 0;

void verdict(int id, const char* name, bool ok, const std::string& summary) {
  std::cout << (ok ? "PASS" : "FAIL") << " [PRIMARY] " << id << ". " << name << ": " << summary << std::endl;
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) { return text::format_fixed(v, digits); }

Manifest test_manifest(int per_class) {
  Manifest m;
  int k = 0;
  for (int n : kSetSizes)
    for (bool present : {true, false})
      for (int i = 0; i < per_class; ++i, ++k)
        m.push_back({"t" + std::to_string(k), Split::Test, TaskKind::Length, 1, n, present, "", 0});
  return m;
}

void model_vs_oracle() {
  const auto t0 = Clock::now();
  const long trials = 1'000'000;
  double worst = 0.0;
  std::string where;
  std::uint64_t seed = 1;
  for (double d1 : {0.5, 1.0, 2.0, 4.0})
    for (int n : kSetSizes)
      for (double alpha : {0.0, 0.5, 1.0}) {
        const double c = optimal_criterion(d1, alpha, n);
        const ModelEval m = predicted_rates(d1, alpha, n, c);
        const double pc = predicted_pc(d1, alpha, n);
        const auto mc = test_support::monte_carlo_max_rule(d1, alpha, n, c, trials, seed++);
        for (double err : {std::abs(m.hit_rate - mc.hit), std::abs(m.fa_rate - mc.fa), std::abs(m.pc - mc.pc()),
                           std::abs(pc - mc.pc())}) {
          if (err > worst) {
            worst = err;
            where = "d1=" + fmt(d1, 1) + " n=" + std::to_string(n) + " alpha=" + fmt(alpha, 1);
          }
        }
      }
  const double secs = seconds_since(t0);
  verdict(1, "model vs Monte-Carlo oracle", worst <= 0.005 && secs < 120.0,
          "48 grid points x 1e6 trials, max |error| " + fmt(worst, 5) + " at " + where + " (limit 0.005), " +
              fmt(secs, 1) + " s (limit 120 s)");
}

void dprime_transform() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big phi2 = erfc(-Big(2) / sqrt(Big(2))) / 2;
  const double d_half = pc_to_dprime(0.5, 800).dprime;
  const double d_phi2 = pc_to_dprime(phi2.convert_to<double>(), 1'000'000).dprime;

  const long n_trials = 1600;
  const double lo = 1.0 / (2.0 * n_trials);
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(lo, 1.0 - lo);
  std::vector<double> pcs(1000);
  for (double& p : pcs) p = u(eng);
  std::sort(pcs.begin(), pcs.end());
  pcs.erase(std::unique(pcs.begin(), pcs.end()), pcs.end());
  bool monotone = pcs.size() == 1000;
  for (std::size_t i = 1; i < pcs.size(); ++i)
    monotone = monotone && pc_to_dprime(pcs[i], n_trials).dprime > pc_to_dprime(pcs[i - 1], n_trials).dprime;

  const bool ok = d_half == 0.0 && std::abs(d_phi2 - 4.0) <= 1e-6 && monotone;
  std::ostringstream s;
  s << "d'(0.5) = " << d_half << ", d'(Phi(2)) - 4 = " << std::scientific << std::setprecision(2) << (d_phi2 - 4.0)
    << " (limit 1e-6), strictly increasing over 1000 random pc: " << (monotone ? "yes" : "no");
  verdict(2, "d' transform", ok, s.str());
}

void parameter_recovery() {
  const auto t0 = Clock::now();
  const Manifest manifest = test_manifest(800);  // 1600 trials per set size
  bool ok = true;
  std::ostringstream s;
  for (double alpha : {0.0, 0.3, 0.6, 1.0}) {
    double abs_err = 0.0, mean = 0.0, worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto cells = aggregate_cells(manifest, simulate_observer({3.0, alpha, OptimalCriterion{}, seed}, manifest));
      const double a = fit_capacity(cells).params.alpha;
      abs_err += std::abs(a - alpha) / 20.0;
      mean += a / 20.0;
      worst = std::max(worst, std::abs(a - alpha));
    }
    const bool row_ok = abs_err <= 0.05 && (alpha != 0.0 || mean <= 0.05);
    ok = ok && row_ok;
    std::cout << "    alpha_true " << fmt(alpha, 1) << ": mean |error| " << fmt(abs_err) << ", mean estimate "
              << fmt(mean) << ", worst |error| " << fmt(worst) << (row_ok ? "" : "  <-- over limit") << "\n";
    s << fmt(alpha, 1) << ":" << fmt(abs_err) << " ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  verdict(3, "parameter recovery", ok,
          "mean |alpha_hat - alpha_true| over 20 seeds " + s.str() + "(limit 0.05), " + fmt(secs, 1) +
              " s (limit 300 s)");
}

void slope_engine() {
  std::vector<DPrimePoint> exact;
  for (int n : kSetSizes) exact.push_back({n, 2.0 * std::pow(n, -0.5), false});
  const double s_exact = loglog_slope(exact).slope;

  const Manifest manifest = test_manifest(400);  // 800 test trials per set size
  const auto cells = aggregate_cells(manifest, simulate_observer({3.0, 0.6, OptimalCriterion{}, 7}, manifest));
  std::vector<DPrimePoint> simulated;
  for (const auto& c : cells) simulated.push_back(cell_dprime(c));
  const double s_sim = loglog_slope(simulated).slope;

  std::ostringstream s;
  s << "power law slope + 0.5 = " << std::scientific << std::setprecision(2) << (s_exact + 0.5)
    << " (limit 1e-9), simulated alpha=0.6 slope " << std::fixed << std::setprecision(4) << s_sim
    << " (limit -0.6 +/- 0.1)";
  verdict(4, "slope engine", std::abs(s_exact + 0.5) <= 1e-9 && std::abs(s_sim + 0.6) <= 0.1, s.str());
}

// Pixel-level check: nothing drawn inside the edge band.
bool margin_band_empty(const Image& img) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const bool inside = x >= kEdgeMargin && x < img.width - kEdgeMargin && y >= kEdgeMargin &&
                          y < img.height - kEdgeMargin;
      if (!inside && !(img.at(x, y) == kBackground)) return false;
    }
  return true;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = test_support::slurp(e.path());
  return files;
}

void stimulus_constraints() {
  std::mt19937_64 eng(99);
  int violations = 0;
  for (int i = 0; i < 10'000; ++i) {
    const TaskKind task = kAllTasks[eng() % kAllTasks.size()];
    const int level = static_cast<int>(eng() % 3) + 1;
    const int n = kSetSizes[eng() % kSetSizes.size()];
    const bool present = eng() % 2;
    const DisplaySpec d = plan_display(task, level, n, present, eng());
    int targets = 0;
    bool ok = static_cast<int>(d.items.size()) == n;
    for (std::size_t a = 0; a < d.items.size(); ++a) {
      targets += d.items[a].is_target;
      const Point p = d.items[a].center;
      for (std::size_t b = a + 1; b < d.items.size(); ++b) {
        const double dx = p.x - d.items[b].center.x, dy = p.y - d.items[b].center.y;
        ok = ok && dx * dx + dy * dy >= 48.0 * 48.0;
      }
    }
    ok = ok && targets == (present ? 1 : 0) && margin_band_empty(render_display(d));
    violations += !ok;
  }

  bool counts_ok = true;
  for (TaskKind task : kAllTasks) {
    const Manifest m = plan_dataset(task, 2, 5);
    std::map<std::tuple<Split, int, bool>, int> c;
    for (const auto& r : m) ++c[{r.split, r.set_size, r.target_present}];
    counts_ok = counts_ok && m.size() == 9600;
    for (int n : kSetSizes)
      for (bool p : {true, false})
        counts_ok = counts_ok && c[{Split::Test, n, p}] == 400 && c[{Split::Train, n, p}] == 800;
  }

  test_support::TempDir a("acc_gen_a"), b("acc_gen_b");
  generate_dataset(TaskKind::RotatedT, 3, 11, a.path());
  generate_dataset(TaskKind::RotatedT, 3, 11, b.path());
  const auto fa = read_tree(a.path()), fb = read_tree(b.path());
  const bool identical = fa.size() == 9601 && fa == fb;

  verdict(5, "stimulus constraints", violations == 0 && counts_ok && identical,
          std::to_string(violations) + " violations in 10000 fuzzed displays, dataset counts " +
              (counts_ok ? "9600 / 400 per test class" : "WRONG") + ", regeneration of " +
              std::to_string(fa.size()) + " files " + (identical ? "byte-identical" : "DIFFERS"));
}

int run(const std::string& args) {
  const int status = std::system((std::string(VSL_CLI_PATH) + " " + args + " > /dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string pipeline(const fs::path& dir) {
  const std::string d = dir.string();
  const std::pair<const char*, std::string> steps[] = {
      {"gen", "gen --task orientation --difficulty 1 --difficulty 3 --seed 42 --out " + d + "/data"},
      {"simulate", "simulate --manifest " + d + "/data/manifest.jsonl --d1 3 --alpha 0.6 --seed 7 --out " + d +
                       "/responses.csv"},
      {"analyze", "analyze --manifest " + d + "/data/manifest.jsonl --responses " + d + "/responses.csv --out " + d +
                      "/analysis"},
      {"fit", "fit --cells " + d + "/analysis/cells.csv --out " + d + "/fit.json"},
      {"report", "report --cells " + d + "/analysis/cells.csv --dprime " + d + "/analysis/dprime.csv --fit " + d +
                     "/fit.json --out " + d + "/report"},
  };
  for (const auto& [name, args] : steps)
    if (run(args) != 0) return std::string(name) + " failed";
  return "";
}

void end_to_end() {
  test_support::TempDir a("acc_e2e_a"), b("acc_e2e_b");
  const std::string err = pipeline(a.path()) + pipeline(b.path());
  const char* artifacts[] = {"data/manifest.jsonl", "responses.csv",   "analysis/cells.csv", "analysis/dprime.csv",
                             "analysis/slopes.csv", "fit.json",        "report/report.svg",  "report/report.csv"};
  int differing = 0;
  if (err.empty()) {
    for (const char* f : artifacts) {
      const bool same = fs::exists(a.path() / f) && test_support::slurp(a.path() / f) == test_support::slurp(b.path() / f);
      differing += !same;
    }
  }
  const bool images_same = err.empty() && read_tree(a.path() / "data") == read_tree(b.path() / "data");
  verdict(6, "end-to-end determinism", err.empty() && differing == 0 && images_same,
          err.empty() ? std::to_string(std::size(artifacts) - differing) + "/" + std::to_string(std::size(artifacts)) +
                            " CSV/JSON/SVG artifacts and " + (images_same ? "all" : "NOT all") +
                            " images byte-identical across two runs"
                      : err);
}

}  // namespace

int main() {
  model_vs_oracle();
  dprime_transform();
  parameter_recovery();
  slope_engine();
  stimulus_constraints();
  end_to_end();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
