#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kflow/run.hpp"

namespace kflow {

/// Parameters of a canned experiment. Fields that do not apply to a
/// scenario's model are ignored.
struct ScenarioSpec {
  std::string name;
  ModelKind kind = ModelKind::periodic_torus;
  int n = 1;
  int resolution = 64;  ///< torus nodes per axis, or radial node count
  double s_min = 0.0;
  double s_max = 1.0;
  std::string profile = "flat";
  double profile_param = 0.0;  ///< log_bump strength
  double profile_center = 0.0;
  int profile_order = 1;
  double amplitude = 0.0;      ///< cao_torus: phi amplitude; krf_torus: psi amplitude
  ScheduleKind schedule = ScheduleKind::constant;
  double horizon = 1.0;
  double c1 = 0.0;
  double eps = 1.0;
  double barrier_scale = 0.0;  ///< coefficient of the barrier F
  RunOptions run;
  std::map<std::string, double> tolerances;
};

/// The only knobs a caller may turn on a named scenario.
struct ScenarioOverrides {
  std::optional<int> grid;
  std::optional<double> dt_safety;
  std::optional<double> t_max;
  std::map<std::string, double> tolerances;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Verdict {
  bool pass = true;
  std::vector<Check> checks;
};

struct ScenarioResult {
  std::string name;
  std::shared_ptr<const ModelGeometry> model;
  Problem problem;
  RunResult run;
  Verdict verdict;
};

/// cao_torus, radial_prescribed_ricci, krf_torus, krf_radial_stein, psh_gauge_check.
std::vector<std::string> list_scenarios();

/// Default parameters. Throws ConfigError naming the valid scenarios.
ScenarioSpec scenario_spec(const std::string& name);

/// Throws ConfigError on out-of-range values or tolerance keys the scenario does not use.
ScenarioSpec apply_overrides(ScenarioSpec spec, const ScenarioOverrides& overrides);

ScenarioResult run_scenario(const ScenarioSpec& spec);
ScenarioResult run_scenario(const std::string& name, const ScenarioOverrides& overrides = {});

}  // namespace kflow
