// Command-line front end: sweep, trace, feasibility and diag.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "optoblockade/config.hpp"
#include "optoblockade/sweep.hpp"

namespace ob = optoblockade;

namespace {

struct Common {
  std::string config_path;
  std::string out;
  int workers = 1;
  int truncation = 0;
  bool paper_fidelity = false;
  bool timing = false;
};

ob::RunConfig load(const Common& c) {
  ob::RunConfig cfg = ob::load_config(c.config_path);
  if (c.truncation > 0) {
    if (c.truncation < 2) throw ob::ConfigError("--truncation must be >= 2");
    cfg.truncation = c.truncation;
  }
  if (c.paper_fidelity) cfg.paper_fidelity = true;
  return cfg;
}

// Writes to --out when given, stdout otherwise.
std::unique_ptr<std::ostream, void (*)(std::ostream*)> output(const std::string& path) {
  if (path.empty() || path == "-") return {&std::cout, [](std::ostream*) {}};
  auto* f = new std::ofstream(path);
  if (!*f) {
    delete f;
    throw ob::ConfigError("cannot open output file '" + path + "'");
  }
  return {f, [](std::ostream* s) { delete s; }};
}

void run(const ob::RunConfig& cfg, const Common& c, std::ostream& os, CLI::App* sweep, CLI::App* trace,
         CLI::App* feas, CLI::App* diag) {
  if (sweep->parsed()) {
    const auto records = ob::run_sweep(cfg, c.workers);
    ob::write_sweep_csv(os, cfg, records, c.timing);
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.ok ? 0 : 1;
    if (failed) fmt::print(stderr, "{} of {} points failed; see the message column\n", failed, records.size());
  } else if (trace->parsed()) {
    const auto runs = ob::run_time_trace(cfg, cfg.truncation);
    ob::write_trace_csv(os, cfg, runs);
    for (const auto& run : runs)
      if (run.status != ob::EvolutionStatus::ok)
        fmt::print(stderr, "cooling {}: {} ({})\n", run.cooling ? "on" : "off", ob::to_string(run.status), run.message);
  } else if (feas->parsed()) {
    os << ob::feasibility_report(cfg);
  } else if (diag->parsed()) {
    os << ob::diag_report(cfg);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon blockade near the optomechanical instability"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("config", c.config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--truncation", c.truncation, "Fock dimension per mode");
    sub->add_flag("--paper-fidelity", c.paper_fidelity, "first-order coefficients and the nine-ket solve");
  };

  CLI::App* sweep = app.add_subcommand("sweep", "steady-state g2 over a parameter grid (CSV)");
  add_common(sweep);
  sweep->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--timing", c.timing, "append a wall-time column");

  CLI::App* trace = app.add_subcommand("trace", "g2 and n_d versus time, cooling off and on (CSV)");
  add_common(trace);

  CLI::App* feas = app.add_subcommand("feasibility", "figure of merit and the rate hierarchy");
  add_common(feas);

  CLI::App* diag = app.add_subcommand("diag", "normal-mode report");
  add_common(diag);

  CLI11_PARSE(app, argc, argv);

  ob::RunConfig cfg;
  std::unique_ptr<std::ostream, void (*)(std::ostream*)> os{nullptr, [](std::ostream*) {}};
  try {
    cfg = load(c);
    os = output(c.out);
  } catch (const ob::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }

  try {
    run(cfg, c, *os, sweep, trace, feas, diag);
  } catch (const std::exception& e) {
    // Only reachable for inputs that cannot describe a stable system at all.
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
