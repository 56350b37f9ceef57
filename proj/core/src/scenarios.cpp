#include "kflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/error.hpp"

namespace kflow {

namespace {

const std::vector<std::string> kNames = {"cao_torus", "radial_prescribed_ricci", "krf_torus",
                                         "krf_radial_stein", "psh_gauge_check"};

std::string valid_names() {
  std::string out;
  for (const auto& n : kNames) out += (out.empty() ? "" : ", ") + n;
  return out;
}

void add_check(Verdict& v, std::string name, double value, double tol, bool pass) {
  v.checks.push_back({std::move(name), value, tol, pass});
  v.pass = v.pass && pass;
}

void check_le(Verdict& v, std::string name, double value, double tol) {
  add_check(v, std::move(name), value, tol, value <= tol);
}

void check_ge(Verdict& v, std::string name, double value, double tol) {
  add_check(v, std::move(name), value, tol, value >= tol);
}

void check_status(Verdict& v, const RunResult& r, RunStatus want) {
  add_check(v, std::string("status ") + to_string(r.status), r.trajectory.terminal.t, 0.0,
            r.status == want);
}

// Reaching the horizon or converging before it both mean no degeneracy or blowup.
void check_completed(Verdict& v, const RunResult& r) {
  const bool ok = r.status == RunStatus::converged || r.status == RunStatus::horizon_reached;
  add_check(v, std::string("no degeneracy (") + to_string(r.status) + ")", r.trajectory.terminal.t,
            0.0, ok);
}

double tol(const ScenarioSpec& s, const std::string& key) { return s.tolerances.at(key); }

std::pair<double, double> equivalence_extremes(const MonitorReport& report) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : report.records) {
    lo = std::min(lo, r.equiv_cmin);
    hi = std::max(hi, r.equiv_cmax);
  }
  return {lo, hi};
}

std::shared_ptr<const ModelGeometry> build_model(const ScenarioSpec& s) {
  if (s.kind == ModelKind::radial_plane)
    return std::make_shared<const ModelGeometry>(ModelGeometry::radial(
        s.n, s.resolution, s.s_min, s.s_max, RadialProfile::named(s.profile, s.profile_param,
                                                      s.profile_center, s.profile_order)));
  CoordFn psi;
  if (s.name == "krf_torus" && s.amplitude != 0.0) {
    const double a = s.amplitude;
    psi = [a](const double* x) { return a * std::cos(x[0]); };
  }
  return std::make_shared<const ModelGeometry>(ModelGeometry::torus(s.n, s.resolution, psi));
}

// Continues a converged radial run in the gauge v - v(s_min). The metric is
// unchanged, but near the origin the stored potential is small, so its
// rounding error (amplified by e^{-s}/h^2 in the equation and again in the
// Ricci form) shrinks. A few backward Euler steps at a tighter tolerance
// remove the rounding noise left by the first pass.
void refine_anchored(ScenarioResult& out, const RunOptions& base) {
  const ModelGeometry& m = *out.model;
  const FlowState& end = out.run.trajectory.terminal;
  const double anchor = end.v[0];
  const std::size_t steps0 = end.steps;
  GaugeShift shift{GridField(m.grid(), anchor), m.zeros()};
  const Problem anchored = transform_problem(out.problem, shift);
  RunOptions opt = base;
  opt.t0 = end.t;
  opt.t_max = std::max(base.t_max, end.t);
  opt.tol_w = base.tol_w * 1e-2;
  GridField v = end.v;
  for (double& x : v.data()) x -= anchor;
  RunResult more = run(anchored, v, opt);
  auto& records = out.run.report.records;
  records.back().status = "running";
  for (auto it = more.report.records.begin() + 1; it != more.report.records.end(); ++it) {
    it->steps += steps0;
    records.push_back(std::move(*it));
  }
  for (auto it = more.trajectory.snapshots.begin() + 1; it != more.trajectory.snapshots.end(); ++it) {
    for (double& x : it->v.data()) x += anchor;
    out.run.trajectory.snapshots.push_back(std::move(*it));
  }
  GridField terminal = more.trajectory.terminal.v;
  for (double& x : terminal.data()) x += anchor;
  FlowState restored = make_state(out.problem, std::move(terminal), more.trajectory.terminal.t,
                                  more.trajectory.terminal.steps + steps0);
  restored.dt_used = more.trajectory.terminal.dt_used;
  out.run.trajectory.terminal = std::move(restored);
  out.run.status = more.status;
  out.run.message = more.message;
  out.run.report.status = more.report.status;
  out.run.report.realized = realize(records, out.problem.path.realized_c());
}

ScenarioResult cao_torus(const ScenarioSpec& s) {
  ScenarioResult out;
  out.model = build_model(s);
  const ModelGeometry& m = *out.model;
  const double a = s.amplitude;
  const GridField phi = m.sample([a](const double* x) { return a * std::cos(x[0]); });
  const HermitianField g1 = m.g0() + complex_hessian(phi, m);
  GridField f0 = log_det(g1);
  f0 -= m.log_det_g0();
  out.problem = make_problem(out.model, make_schedule(ScheduleKind::constant, m), Forcing::fixed(f0));
  out.run = run(out.problem, m.zeros(), s.run);
  Verdict& v = out.verdict;
  check_le(v, "prescribed consistency", prescribed_consistency(m, out.problem.target(), f0), 1e-10);
  check_status(v, out.run, RunStatus::converged);
  check_le(v, "ricci residual", out.run.report.records.back().ricci_residual,
           tol(s, "ricci_residual"));
  check_le(v, "|g - g1|", (out.run.trajectory.terminal.g - g1).max_abs_component(),
           tol(s, "metric_error"));
  return out;
}

ScenarioResult radial_prescribed_ricci(const ScenarioSpec& s) {
  ScenarioResult out;
  out.model = build_model(s);
  const ModelGeometry& m = *out.model;
  Forcing f = forcing_profile(s.c1, s.eps, m);
  const GridField f0 = f.f0;
  out.problem = make_problem(out.model, make_schedule(ScheduleKind::constant, m), std::move(f));
  out.run = run(out.problem, m.zeros(), s.run);
  if (out.run.status == RunStatus::converged) refine_anchored(out, s.run);
  Verdict& v = out.verdict;
  check_le(v, "prescribed consistency", prescribed_consistency(m, out.problem.target(), f0), 1e-10);
  check_status(v, out.run, RunStatus::converged);
  check_le(v, "interior ricci residual", out.run.report.records.back().ricci_residual,
           tol(s, "ricci_residual"));
  check_le(v, "decay certificate", decay_certificate(out.problem.forcing, m),
           s.c1 * (1.0 + 1e-12));
  const auto [lo, hi] = equivalence_extremes(out.run.report);
  check_ge(v, "equivalence min", lo, tol(s, "equiv_min"));
  check_le(v, "equivalence max", hi, tol(s, "equiv_max"));
  return out;
}

ScenarioResult krf_torus(const ScenarioSpec& s) {
  ScenarioResult out;
  out.model = build_model(s);
  const ModelGeometry& m = *out.model;
  ScheduleParams sp;
  sp.horizon = s.horizon;
  out.problem = make_problem(out.model, make_schedule(ScheduleKind::krf_linear, m, sp),
                             Forcing::zero(m));
  out.run = run(out.problem, m.zeros(), s.run);
  Verdict& v = out.verdict;
  check_completed(v, out.run);
  check_le(v, "sup curvature", curvature_norm(out.run.trajectory.terminal.g, m).max(),
           tol(s, "curvature"));
  return out;
}

ScenarioResult krf_radial_stein(const ScenarioSpec& s) {
  ScenarioResult out;
  out.model = build_model(s);
  const ModelGeometry& m = *out.model;
  ScheduleParams sp;
  sp.horizon = s.horizon;
  sp.check_end = false;
  const BackgroundPath path = make_schedule(ScheduleKind::krf_linear, m, sp);
  const double c = s.barrier_scale;
  const GridField barrier = m.sample([c](const double* x) { return c * std::exp(x[0]); });
  const HatTransform hat = psh_gauge_transform(path, Forcing::zero(m), barrier, s.horizon, m);
  const Problem original = make_problem(out.model, path, Forcing::zero(m));
  out.problem = transform_problem(original, hat.shift);
  out.run = run(out.problem, m.zeros(), s.run);
  Verdict& v = out.verdict;
  check_completed(v, out.run);
  const auto [lo, hi] = equivalence_extremes(out.run.report);
  check_ge(v, "equivalence min", lo, tol(s, "equiv_min"));
  check_le(v, "equivalence max", hi, tol(s, "equiv_max"));
  return out;
}

ScenarioResult psh_gauge_check(const ScenarioSpec& s) {
  ScenarioResult out;
  out.model = build_model(s);
  const ModelGeometry& m = *out.model;
  ScheduleParams sp;
  sp.horizon = s.horizon;
  const GridField end_potential = m.sample([](const double* x) { return 0.4 * std::sin(x[0]); });
  sp.sigma_end = m.g0() + complex_hessian(end_potential, m);
  const BackgroundPath path = make_schedule(ScheduleKind::interpolation, m, sp);
  const Forcing forcing =
      Forcing::fixed(m.sample([](const double* x) { return 0.1 * std::cos(x[0] + x[1]); }));
  const double c = s.barrier_scale;
  const GridField barrier =
      m.sample([c](const double* x) { return c * std::cos(x[0]) * std::cos(x[1]); });
  const Problem original = make_problem(out.model, path, forcing);
  const HatTransform hat = psh_gauge_transform(path, forcing, barrier, s.horizon, m);
  out.problem = transform_problem(original, hat.shift);

  RunOptions opt = s.run;
  const double t_end = std::min(opt.t_max, s.horizon);
  const double dt = stable_dt(make_state(original, m.zeros(), 0.0), opt.dt_safety);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt));
  const double step = steps > 0 ? t_end / static_cast<double>(steps) : dt;
  opt.fixed_dt = step;
  opt.t_max = t_end;
  out.run = run(out.problem, m.zeros(), opt);
  const double agreement = gauge_agreement(original, m.zeros(), out.problem, m.zeros(), step,
                                           steps, Stepper::explicit_midpoint);
  check_le(out.verdict, "gauge metric agreement", agreement, tol(s, "agreement"));
  return out;
}

}  // namespace

std::vector<std::string> list_scenarios() { return kNames; }

ScenarioSpec scenario_spec(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  if (name == "cao_torus") {
    s.resolution = 64;
    s.amplitude = 0.1;
    s.run.t_max = 200.0;
    s.tolerances = {{"ricci_residual", 1e-3}, {"metric_error", 5e-3}};
  } else if (name == "radial_prescribed_ricci") {
    s.kind = ModelKind::radial_plane;
    s.n = 2;
    s.resolution = 2048;
    s.s_min = -8.0;
    s.s_max = 10.0;
    s.c1 = 0.2;
    s.eps = 1.0;
    s.run.t_max = 1e9;
    s.run.stepper = Stepper::implicit_euler;
    s.run.record_interval = 1.0;
    s.run.snapshot_interval = 100.0;
    s.tolerances = {{"ricci_residual", 1e-4}, {"equiv_min", 0.5}, {"equiv_max", 2.0}};
  } else if (name == "krf_torus") {
    s.resolution = 64;
    s.amplitude = 0.4;
    s.schedule = ScheduleKind::krf_linear;
    s.horizon = 5.0;
    s.run.t_max = 5.0;
    s.tolerances = {{"curvature", 1e-3}};
  } else if (name == "krf_radial_stein") {
    s.kind = ModelKind::radial_plane;
    s.n = 2;
    s.resolution = 512;
    s.s_min = -4.0;
    s.s_max = 4.0;
    s.profile = "log_bump";
    // Bump curvature vanishes at the origin, so sigma(T) = g0 - T Ric0 turns
    // negative only in the interior, where the barrier repairs it.
    s.profile_param = 2.0;
    s.profile_center = 1.0;
    s.profile_order = 2;
    s.schedule = ScheduleKind::krf_linear;
    s.horizon = 5.0;
    s.barrier_scale = 1.0;
    s.run.t_max = 5.0;
    s.run.stepper = Stepper::implicit_euler;
    s.run.implicit_dt_max = 0.05;
    s.tolerances = {{"equiv_min", 0.1}, {"equiv_max", 10.0}};
  } else if (name == "psh_gauge_check") {
    s.resolution = 64;
    s.schedule = ScheduleKind::interpolation;
    s.horizon = 0.5;
    s.barrier_scale = 0.2;
    s.run.t_max = 0.5;
    s.run.record_interval = 0.05;
    s.tolerances = {{"agreement", 1e-12}};
  } else {
    throw ConfigError("unknown scenario '" + name + "' (valid: " + valid_names() + ")");
  }
  return s;
}

ScenarioSpec apply_overrides(ScenarioSpec s, const ScenarioOverrides& o) {
  if (o.grid) {
    if (*o.grid < 8) throw ConfigError("grid override must be >= 8");
    s.resolution = *o.grid;
  }
  if (o.dt_safety) {
    if (!(*o.dt_safety > 0.0 && *o.dt_safety <= 0.5))
      throw ConfigError("dt-safety override must lie in (0, 0.5]");
    s.run.dt_safety = *o.dt_safety;
  }
  if (o.t_max) {
    if (!(*o.t_max >= 0.0)) throw ConfigError("t-max override must be >= 0");
    s.run.t_max = *o.t_max;
  }
  for (const auto& [key, value] : o.tolerances) {
    auto it = s.tolerances.find(key);
    if (it == s.tolerances.end()) {
      std::string keys;
      for (const auto& kv : s.tolerances) keys += (keys.empty() ? "" : ", ") + kv.first;
      throw ConfigError("scenario " + s.name + " has no tolerance '" + key + "' (valid: " + keys +
                        ")");
    }
    if (!(value > 0.0) || !std::isfinite(value))
      throw ConfigError("tolerance '" + key + "' must be finite and > 0");
    it->second = value;
  }
  return s;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  ScenarioResult out;
  if (spec.name == "cao_torus") out = cao_torus(spec);
  else if (spec.name == "radial_prescribed_ricci") out = radial_prescribed_ricci(spec);
  else if (spec.name == "krf_torus") out = krf_torus(spec);
  else if (spec.name == "krf_radial_stein") out = krf_radial_stein(spec);
  else if (spec.name == "psh_gauge_check") out = psh_gauge_check(spec);
  else throw ConfigError("unknown scenario '" + spec.name + "' (valid: " + valid_names() + ")");
  out.name = spec.name;
  return out;
}

ScenarioResult run_scenario(const std::string& name, const ScenarioOverrides& overrides) {
  return run_scenario(apply_overrides(scenario_spec(name), overrides));
}

}  // namespace kflow
