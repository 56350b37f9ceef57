#include <doctest.h>

#include <set>

#include "kflow/error.hpp"
#include "kflow/scenarios.hpp"

using namespace kflow;

namespace {

const Check* find_check(const Verdict& v, const std::string& prefix) {
  for (const auto& c : v.checks)
    if (c.name.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("five names in fixed order") {
  const std::vector<std::string> want = {"cao_torus", "radial_prescribed_ricci", "krf_torus",
                                         "krf_radial_stein", "psh_gauge_check"};
  CHECK(list_scenarios() == want);
  const auto names = list_scenarios();
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
}

TEST_CASE("unknown scenario names list the valid ones") {
  try {
    run_scenario("ricci_soliton");
    FAIL("unknown scenario accepted");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ricci_soliton") != std::string::npos);
    for (const auto& n : list_scenarios()) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("every name resolves and runs") {
  for (const auto& name : list_scenarios()) {
    CAPTURE(name);
    ScenarioOverrides o;
    o.t_max = 0.01;
    o.grid = name.find("radial") != std::string::npos ? 128 : 16;
    ScenarioResult r;
    CHECK_NOTHROW(r = run_scenario(name, o));
    CHECK(r.name == name);
    CHECK(!r.verdict.checks.empty());
    CHECK(!r.run.report.records.empty());
  }
}

TEST_CASE("overrides are range checked") {
  ScenarioOverrides o;
  o.grid = 4;
  CHECK_THROWS_AS(run_scenario("cao_torus", o), ConfigError);
  o = {};
  o.dt_safety = 0.0;
  CHECK_THROWS_AS(run_scenario("cao_torus", o), ConfigError);
  o.dt_safety = 0.6;
  CHECK_THROWS_AS(run_scenario("cao_torus", o), ConfigError);
  o = {};
  o.t_max = -1.0;
  CHECK_THROWS_AS(run_scenario("cao_torus", o), ConfigError);
  o = {};
  o.tolerances["curvature"] = 1e-3;
  CHECK_THROWS_AS(apply_overrides(scenario_spec("cao_torus"), o), ConfigError);
  o.tolerances = {{"ricci_residual", -1.0}};
  CHECK_THROWS_AS(apply_overrides(scenario_spec("cao_torus"), o), ConfigError);
  o.tolerances = {{"ricci_residual", 2e-3}};
  CHECK(apply_overrides(scenario_spec("cao_torus"), o).tolerances.at("ricci_residual") == 2e-3);
}

TEST_CASE("cao_torus with zero amplitude is stationary") {
  ScenarioSpec s = scenario_spec("cao_torus");
  s.amplitude = 0.0;
  const ScenarioResult r = run_scenario(s);
  CHECK(r.run.status == RunStatus::converged);
  CHECK(r.run.trajectory.terminal.steps == 0);
  CHECK(r.verdict.pass);
}

TEST_CASE("cao_torus at grid 64 passes") {
  const ScenarioResult r = run_scenario("cao_torus");
  CHECK(r.verdict.pass);
  const Check* c = find_check(r.verdict, "ricci residual");
  REQUIRE(c != nullptr);
  CHECK(c->value <= 1e-3);
  const Check* p = find_check(r.verdict, "prescribed consistency");
  REQUIRE(p != nullptr);
  CHECK(p->pass);
}

TEST_CASE("radial_prescribed_ricci forcing meets its decay certificate exactly") {
  ScenarioOverrides o;
  o.t_max = 0.0;
  const ScenarioResult r = run_scenario("radial_prescribed_ricci", o);
  const ScenarioSpec s = scenario_spec("radial_prescribed_ricci");
  CHECK(std::abs(decay_certificate(r.problem.forcing, *r.model) - s.c1) <= 1e-15);
  REQUIRE(r.problem.forcing.decay.has_value());
  CHECK(r.problem.forcing.decay->eps == 1.0);
}

TEST_CASE("psh_gauge_check agreement does not degrade with resolution") {
  for (int grid : {32, 64}) {
    CAPTURE(grid);
    ScenarioOverrides o;
    o.grid = grid;
    const ScenarioResult r = run_scenario("psh_gauge_check", o);
    CHECK(r.verdict.pass);
    CHECK(r.verdict.checks.at(0).value <= 1e-12);
  }
}

}  // TEST_SUITE
