#pragma once

// Grid sweeps, time traces and text reports built on a RunConfig.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optoblockade/config.hpp"
#include "optoblockade/dynamics.hpp"

namespace optoblockade {

/// One grid point. Fields that could not be computed stay nullopt.
struct ResultRecord {
  std::size_t index = 0;
  std::vector<std::pair<Axis, double>> coords;
  SystemParams params;
  double delta_bbar = 0.0;
  int inner_points = 1;  ///< > 1 when g2 is minimized over an inner axis

  std::optional<double> g2;
  std::optional<double> g2_output;
  std::optional<double> n_a, n_bbar, n_d;
  std::optional<UpDownRates> rates;
  bool stable = false;
  double instability_margin = 0.0;
  bool chain_ok = false;

  std::optional<double> probe_rel_change;  ///< |g2(beta/2) / g2(beta) - 1|, no-jump pipeline
  std::optional<double> residual;          ///< stationary-state residual, master-equation pipeline
  std::string method;

  std::optional<double> g2_refined;            ///< g2 at truncation + 1 (minimal-g2 point only)
  std::optional<double> refinement_rel_change;

  bool ok = true;
  std::string message;
  int truncation = 0;
  double wall_seconds = 0.0;
};

/// Evaluates a point at the given truncation. Failures are captured in the record.
ResultRecord evaluate_point(const RunConfig& cfg, const PointInputs& inputs, int truncation,
                            const SteadyStateOptions& steady = {});

/// Full grid in row-major order over `cfg.scan`, followed by the truncation
/// re-run on the minimal-g2 point when enabled. Output order does not depend
/// on `workers`.
std::vector<ResultRecord> run_sweep(const RunConfig& cfg, int workers = 1);

void write_sweep_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ResultRecord>& records,
                     bool timing = false);

struct TraceRecord {
  bool cooling = false;
  double time = 0.0;
  std::optional<double> g2;
  double n_a = 0.0, n_bbar = 0.0, n_d = 0.0;
  double trace_drift = 0.0;
  double min_eigenvalue = 0.0;
};

struct TraceRun {
  bool cooling = false;
  EvolutionStatus status = EvolutionStatus::ok;
  std::string message;
  std::vector<TraceRecord> records;
};

/// Master-equation evolution from the vacuum with cooling off and on. The
/// probe is switched on at t = 0.
std::vector<TraceRun> run_time_trace(const RunConfig& cfg, int truncation);

void write_trace_csv(std::ostream& os, const RunConfig& cfg, const std::vector<TraceRun>& runs);

std::string feasibility_report(const RunConfig& cfg);
std::string diag_report(const RunConfig& cfg);

}  // namespace optoblockade
