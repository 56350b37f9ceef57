#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kflow/monitor.hpp"

namespace kflow {

enum class Stepper { automatic, explicit_midpoint, implicit_euler };
enum class RunStatus { converged, horizon_reached, degenerate, blowup };

const char* to_string(RunStatus status);
const char* to_string(Stepper stepper);
Stepper stepper_from_string(const std::string& name);

struct RunOptions {
  double t0 = 0.0;  ///< start time (continuing a run)
  double t_max = 10.0;
  double dt_safety = 0.2;
  double tol_w = 1e-7;
  double record_interval = 0.1;
  double snapshot_interval = 1.0;
  int p = 4;
  int k = 1;
  /// automatic: explicit on the torus, backward Euler on the radial model.
  Stepper stepper = Stepper::automatic;
  /// Overrides the controller with a fixed step.
  std::optional<double> fixed_dt;
  /// Backward Euler: first step and geometric growth factor.
  double implicit_dt0 = 1e-3;
  double implicit_growth = 1.25;
  double implicit_dt_max = 1e6;
  std::size_t max_steps = 50'000'000;
  /// Compute the parabolic 2+alpha seminorm between consecutive records, at
  /// the second record and every this many records after it (0 = off).
  int holder_every = 0;
  double holder_alpha = 0.5;
};

struct Snapshot {
  double t = 0.0;
  GridField v;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  FlowState terminal;
};

struct RunResult {
  Trajectory trajectory;
  MonitorReport report;
  RunStatus status = RunStatus::horizon_reached;
  std::string message;  ///< error text for degenerate / blowup
};

/// Advances until t_max, convergence (sup|w| < tol_w, checked first and only
/// when sigma and f are static), or a step error, recording the monitor every
/// record_interval.
RunResult run(const Problem& problem, const GridField& v0, const RunOptions& options);

/// Steps two problems in lockstep with the same fixed dt and returns the
/// largest node-wise difference of their metrics over all steps.
double gauge_agreement(const Problem& a, const GridField& va, const Problem& b,
                       const GridField& vb, double dt, std::size_t steps, Stepper stepper);

}  // namespace kflow
