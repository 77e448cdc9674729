// vsl: command-line front end for stimulus generation, observer simulation,
// analysis, capacity fitting and reporting.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "vsl/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2 };

struct Flags {
  std::string config;
  std::string task;
  std::vector<int> difficulties;
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 1;
  double d1 = 0.0, alpha = 0.0;
  std::string criterion;
  std::string manifest, responses, cells, dprime, fit;
  std::vector<double> alpha_grid;
  double tolerance = 0.0;
  int max_evaluations = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual search set-size experiments: stimuli, simulated observers, d' analysis, capacity fits"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "Generate stimulus datasets (PNG images + manifest.jsonl)");
  auto* sim = app.add_subcommand("simulate", "Simulate a capacity-limited max-rule observer on the test split");
  auto* ana = app.add_subcommand("analyze", "Aggregate responses into cells.csv, dprime.csv and slopes.csv");
  auto* fit = app.add_subcommand("fit", "Fit the capacity exponent and per-level sensitivities");
  auto* rep = app.add_subcommand("report", "Render report.svg and report.csv");

  for (auto* sc : {gen, sim, ana, fit, rep})
    sc->add_option("--config", f.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);

  gen->add_option("--task", f.task, "luminance|color|length|orientation|rotated_t");
  gen->add_option("--difficulty", f.difficulties, "difficulty level(s), 1..3 (repeatable)");
  gen->add_option("--seed", f.seed, "dataset seed");
  gen->add_option("--out", f.out, "output directory");
  gen->add_option("--jobs", f.jobs, "rendering threads (output does not depend on this)");

  sim->add_option("--manifest", f.manifest, "manifest.jsonl");
  sim->add_option("--d1", f.d1, "item sensitivity at set size 1");
  sim->add_option("--alpha", f.alpha, "capacity exponent in [0, 2]");
  sim->add_option("--criterion", f.criterion, "'optimal' (default) or a fixed criterion value");
  sim->add_option("--seed", f.seed, "observer seed");
  sim->add_option("--out", f.out, "response CSV path (default responses.csv)");

  ana->add_option("--manifest", f.manifest, "manifest.jsonl");
  ana->add_option("--responses", f.responses, "responses CSV");
  ana->add_option("--out", f.out, "output directory (default .)");

  fit->add_option("--cells", f.cells, "cells.csv from analyze");
  fit->add_option("--task", f.task, "restrict to one task");
  fit->add_option("--alpha-grid", f.alpha_grid, "alpha values for the profile stage");
  fit->add_option("--tolerance", f.tolerance, "simplex diameter tolerance");
  fit->add_option("--max-evaluations", f.max_evaluations, "Nelder-Mead evaluation budget");
  fit->add_option("--out", f.out, "fit JSON path (default fit.json)");

  rep->add_option("--cells", f.cells, "cells.csv");
  rep->add_option("--dprime", f.dprime, "dprime.csv");
  rep->add_option("--fit", f.fit, "fit.json");
  rep->add_option("--task", f.task, "restrict to one task");
  rep->add_option("--out", f.out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  CLI::App* cmd = app.get_subcommands().front();
  auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };

  try {
    vsl::ExperimentConfig cfg;
    if (given("--config")) vsl::load_config_file(cfg, f.config);
    if (given("--task")) cfg.task = vsl::parse_task(f.task);
    if (given("--difficulty")) cfg.difficulties = f.difficulties;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--out")) cfg.out_dir = f.out;
    if (given("--jobs")) cfg.jobs = f.jobs;
    if (given("--d1")) cfg.d1 = f.d1;
    if (given("--alpha")) cfg.alpha = f.alpha;
    if (given("--criterion")) cfg.criterion = vsl::parse_criterion(f.criterion);
    if (given("--manifest")) cfg.manifest = f.manifest;
    if (given("--responses")) cfg.responses = f.responses;
    if (given("--cells")) cfg.cells = f.cells;
    if (given("--dprime")) cfg.dprime = f.dprime;
    if (given("--fit")) cfg.fit = f.fit;
    if (given("--alpha-grid")) cfg.fit_options.alpha_grid = f.alpha_grid;
    if (given("--tolerance")) cfg.fit_options.simplex.diameter_tolerance = f.tolerance;
    if (given("--max-evaluations")) cfg.fit_options.simplex.max_evaluations = f.max_evaluations;

    const std::string name = cmd->get_name();
    if (name == "gen") vsl::cmd_gen(cfg, std::cout);
    else if (name == "simulate") vsl::cmd_simulate(cfg, std::cout);
    else if (name == "analyze") vsl::cmd_analyze(cfg, std::cout);
    else if (name == "fit") vsl::cmd_fit(cfg, std::cout);
    else if (name == "report") vsl::cmd_report(cfg, std::cout);
    return kOk;
  } catch (const vsl::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
