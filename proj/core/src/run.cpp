#include "kflow/run.hpp"

#include <algorithm>
#include <cmath>

#include "kflow/error.hpp"

namespace kflow {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::horizon_reached: return "horizon_reached";
    case RunStatus::degenerate: return "degenerate";
    case RunStatus::blowup: return "blowup";
  }
  return "?";
}

const char* to_string(Stepper stepper) {
  switch (stepper) {
    case Stepper::automatic: return "auto";
    case Stepper::explicit_midpoint: return "explicit_midpoint";
    case Stepper::implicit_euler: return "implicit_euler";
  }
  return "?";
}

Stepper stepper_from_string(const std::string& name) {
  if (name == "auto") return Stepper::automatic;
  if (name == "explicit_midpoint") return Stepper::explicit_midpoint;
  if (name == "implicit_euler") return Stepper::implicit_euler;
  throw InvalidArgument("unknown stepper '" + name +
                        "' (expected auto, explicit_midpoint or implicit_euler)");
}

namespace {

Stepper resolve(Stepper s, const Problem& p) {
  if (s != Stepper::automatic) return s;
  return p.geometry().kind() == ModelKind::radial_plane ? Stepper::implicit_euler
                                                        : Stepper::explicit_midpoint;
}

bool reached(double t, double mark) { return t >= mark - 1e-12 * std::max(1.0, std::abs(mark)); }

}  // namespace

RunResult run(const Problem& problem, const GridField& v0, const RunOptions& opt) {
  if (!std::isfinite(opt.t0)) throw InvalidArgument("t0 must be finite");
  if (!(opt.t_max >= opt.t0)) throw InvalidArgument("t_max must be >= t0");
  if (!(opt.dt_safety > 0.0 && opt.dt_safety <= 0.5))
    throw InvalidArgument("dt safety must lie in (0, 0.5]");
  if (!(opt.tol_w > 0.0)) throw InvalidArgument("tol_w must be > 0");
  if (!(opt.record_interval > 0.0) || !(opt.snapshot_interval > 0.0))
    throw InvalidArgument("record and snapshot intervals must be > 0");
  if (opt.fixed_dt && !(*opt.fixed_dt > 0.0)) throw InvalidArgument("fixed dt must be > 0");
  const Stepper stepper = resolve(opt.stepper, problem);
  const MonitorSettings ms{opt.p, opt.k, 0.1};

  RunResult res;
  FlowState state = make_state(problem, v0, opt.t0);
  std::optional<FlowState> prev1, prev2, last_recorded;
  std::size_t record_count = 0;

  auto record = [&]() {
    MonitorRecord r = monitor_record(state, problem, ms);
    if (prev1 && prev2) r.heat_residual = heat_residual({&*prev2, &*prev1, &state}, problem);
    if (opt.holder_every > 0 && last_recorded &&
        (record_count - 1) % static_cast<std::size_t>(opt.holder_every) == 0)
      r.holder_2a = holder_2a(*last_recorded, state, problem.geometry(), opt.holder_alpha);
    res.report.records.push_back(std::move(r));
    ++record_count;
    if (opt.holder_every > 0) last_recorded = state;
  };

  record();
  res.trajectory.snapshots.push_back({state.t, state.v});
  double next_record = opt.t0 + opt.record_interval;
  double next_snapshot = opt.t0 + opt.snapshot_interval;
  double dt_impl = opt.implicit_dt0;
  RunStatus status = RunStatus::horizon_reached;
  // With a moving background w = 0 does not mean the metric is stationary.
  const bool can_converge = problem.path.is_static() && problem.forcing.is_static();

  while (true) {
    if (can_converge && active_sup(state.w) < opt.tol_w) {
      status = RunStatus::converged;
      break;
    }
    if (reached(state.t, opt.t_max)) break;
    if (state.steps >= opt.max_steps) {
      res.message = "step budget exhausted";
      break;
    }
    const double remaining = opt.t_max - state.t;
    try {
      FlowState next;
      if (stepper == Stepper::explicit_midpoint) {
        double dt = opt.fixed_dt ? *opt.fixed_dt : stable_dt(state, opt.dt_safety);
        next = step(state, problem, std::min(dt, remaining));
      } else {
        double dt = opt.fixed_dt ? *opt.fixed_dt : dt_impl;
        for (int attempt = 0;; ++attempt) {
          try {
            next = implicit_step(state, problem, std::min(dt, remaining));
            break;
          } catch (const Error&) {
            if (opt.fixed_dt || attempt >= 30) throw;
            dt *= 0.5;
          }
        }
        if (!opt.fixed_dt) dt_impl = std::min(dt * opt.implicit_growth, opt.implicit_dt_max);
      }
      prev2 = std::move(prev1);
      prev1 = std::move(state);
      state = std::move(next);
    } catch (const DegenerateMetricError& e) {
      status = RunStatus::degenerate;
      res.message = e.what();
      break;
    } catch (const NumericBlowupError& e) {
      status = RunStatus::blowup;
      res.message = e.what();
      break;
    }
    if (reached(state.t, next_record)) {
      record();
      while (reached(state.t, next_record)) next_record += opt.record_interval;
    }
    if (reached(state.t, next_snapshot)) {
      res.trajectory.snapshots.push_back({state.t, state.v});
      while (reached(state.t, next_snapshot)) next_snapshot += opt.snapshot_interval;
    }
  }

  if (res.report.records.back().t != state.t) record();
  if (res.trajectory.snapshots.back().t != state.t)
    res.trajectory.snapshots.push_back({state.t, state.v});
  res.status = status;
  res.report.status = to_string(status);
  res.report.records.back().status = to_string(status);
  res.report.realized = realize(res.report.records, problem.path.realized_c());
  res.trajectory.terminal = std::move(state);
  return res;
}

double gauge_agreement(const Problem& a, const GridField& va, const Problem& b,
                       const GridField& vb, double dt, std::size_t steps, Stepper stepper) {
  const Stepper st = resolve(stepper, a);
  FlowState sa = make_state(a, va, 0.0);
  FlowState sb = make_state(b, vb, 0.0);
  auto diff = [](const HermitianField& x, const HermitianField& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i)
      m = std::max(m, std::abs(x.data()[i] - y.data()[i]));
    return m;
  };
  double worst = diff(sa.g, sb.g);
  for (std::size_t k = 0; k < steps; ++k) {
    if (st == Stepper::implicit_euler) {
      sa = implicit_step(sa, a, dt);
      sb = implicit_step(sb, b, dt);
    } else {
      sa = step(sa, a, dt);
      sb = step(sb, b, dt);
    }
    worst = std::max(worst, diff(sa.g, sb.g));
  }
  return worst;
}

}  // namespace kflow
