#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kflow/config.hpp"
#include "kflow/error.hpp"
#include "kflow/output.hpp"
#include "kflow/scenarios.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kVerdictFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

json realized_json(const kflow::RealizedConstants& r) {
  json j = {{"sup_v", r.sup_v},
            {"sup_w", r.sup_w},
            {"trace_max", r.trace_max},
            {"inv_trace_min", r.inv_trace_min},
            {"equiv_cmax", r.equiv_cmax},
            {"inv_equiv_cmin", r.inv_equiv_cmin},
            {"s_max", r.s_max},
            {"gradw_max", r.gradw_max},
            {"f_sup", r.f_sup},
            {"ricci_residual", r.ricci_residual},
            {"sigma_c", r.sigma_c}};
  j["q_max"] = r.q_max ? json(*r.q_max) : json(nullptr);
  return j;
}

json suite_json(const kflow::SuiteResult& s) {
  json j = {{"pass", s.pass},
            {"amgm_margin", s.amgm_margin},
            {"equation_residual", s.equation_residual},
            {"equivalence_ratio", s.equivalence_ratio},
            {"failures", s.failures}};
  j["monotone_excess"] = s.monotone_excess ? json(*s.monotone_excess) : json(nullptr);
  j["volume_defect"] = s.volume_defect ? json(*s.volume_defect) : json(nullptr);
  return j;
}

bool numerical_failure(kflow::RunStatus s) {
  return s == kflow::RunStatus::degenerate || s == kflow::RunStatus::blowup;
}

void write(const kflow::RunResult& r, const std::string& dir, const json& summary) {
  const kflow::Manifest m =
      kflow::write_outputs(r.report, r.trajectory, kflow::OutputLayout::in(dir), summary.dump(2));
  std::printf("wrote %zu files to %s\n", m.files.size() + 1, dir.c_str());
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out) {
  std::ifstream in(config_path);
  if (!in) throw kflow::ConfigError("cannot read config " + config_path);
  std::stringstream text;
  text << in.rdbuf();
  const kflow::RunConfig config = kflow::parse_config(text.str());
  const kflow::BuiltProblem built = kflow::build_problem(config);
  const kflow::RunResult r =
      kflow::run(built.problem, built.model->zeros(), kflow::run_options(config));
  const kflow::SuiteResult suite = kflow::inequality_suite(r.report, built.problem);

  std::printf("status %s at t = %.6g after %zu steps\n", kflow::to_string(r.status),
              r.trajectory.terminal.t, r.trajectory.terminal.steps);
  if (!r.message.empty()) std::printf("  %s\n", r.message.c_str());
  std::printf("inequality suite %s\n", suite.pass ? "pass" : "FAIL");
  for (const auto& f : suite.failures) std::printf("  %s\n", f.c_str());

  json summary = {{"command", "run"},
                  {"status", kflow::to_string(r.status)},
                  {"message", r.message},
                  {"t", r.trajectory.terminal.t},
                  {"steps", r.trajectory.terminal.steps},
                  {"realized", realized_json(r.report.realized)},
                  {"suite", suite_json(suite)},
                  {"config", json::parse(kflow::config_to_json(config))}};
  write(r, out.value_or(config.output_dir), summary);
  if (numerical_failure(r.status)) return kNumericalError;
  return suite.pass ? kOk : kVerdictFailure;
}

int cmd_scenario(const std::string& name, const kflow::ScenarioOverrides& overrides,
                 const std::optional<std::string>& out) {
  const kflow::ScenarioResult r = kflow::run_scenario(name, overrides);
  std::printf("scenario %s: %s (status %s at t = %.6g)\n", name.c_str(),
              r.verdict.pass ? "pass" : "FAIL", kflow::to_string(r.run.status),
              r.run.trajectory.terminal.t);
  json checks = json::array();
  for (const auto& c : r.verdict.checks) {
    std::printf("  %-32s %-14.6e tol %-10.3e %s\n", c.name.c_str(), c.value, c.tolerance,
                c.pass ? "ok" : "FAIL");
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  if (!r.run.message.empty()) std::printf("  %s\n", r.run.message.c_str());
  if (out) {
    json summary = {{"command", "scenario"},
                    {"scenario", name},
                    {"pass", r.verdict.pass},
                    {"checks", checks},
                    {"status", kflow::to_string(r.run.status)},
                    {"message", r.run.message},
                    {"t", r.run.trajectory.terminal.t},
                    {"steps", r.run.trajectory.terminal.steps},
                    {"realized", realized_json(r.run.report.realized)}};
    write(r.run, *out, summary);
  }
  if (numerical_failure(r.run.status)) return kNumericalError;
  return r.verdict.pass ? kOk : kVerdictFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic complex Monge-Ampere flow laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the flow described by a JSON config");
  std::string config_path;
  std::optional<std::string> run_out;
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", run_out, "Output directory (overrides the config)");

  auto* scenario = app.add_subcommand("scenario", "Run a named scenario");
  std::string name;
  std::optional<int> grid;
  std::optional<double> dt_safety, t_max;
  std::optional<std::string> scenario_out;
  scenario->add_option("name", name, "Scenario name")->required();
  scenario->add_option("--grid", grid, "Resolution (torus nodes per axis or radial nodes)");
  scenario->add_option("--dt-safety", dt_safety, "Explicit step safety factor in (0, 0.5]");
  scenario->add_option("--t-max", t_max, "Final time");
  scenario->add_option("--out", scenario_out, "Output directory");

  app.add_subcommand("list-scenarios", "Print the scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, run_out);
    if (scenario->parsed()) {
      kflow::ScenarioOverrides o;
      o.grid = grid;
      o.dt_safety = dt_safety;
      o.t_max = t_max;
      return cmd_scenario(name, o, scenario_out);
    }
    for (const auto& n : kflow::list_scenarios()) std::printf("%s\n", n.c_str());
    return kOk;
  } catch (const kflow::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const kflow::InvalidArgument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const kflow::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
}
