#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kflow/run.hpp"

namespace kflow {

/// amplitude * cos(k . x), or sin when `sine` is set. `wave` holds one integer
/// wave number per real torus axis (missing entries are 0).
struct TrigTerm {
  double amplitude = 0.0;
  std::vector<int> wave;
  bool sine = false;
  bool operator==(const TrigTerm&) const = default;
};

/// A periodic potential as a finite trigonometric sum.
using PotentialRecipe = std::vector<TrigTerm>;

double evaluate(const PotentialRecipe& recipe, const double* x, int axes);

struct ModelConfig {
  ModelKind kind = ModelKind::periodic_torus;
  int n = 1;
  int resolution = 64;
  double s_min = -4.0;
  double s_max = 4.0;
  std::string profile = "flat";
  double profile_param = 0.0;
  double profile_center = 0.0;
  int profile_order = 1;
  PotentialRecipe psi;  ///< torus background g0 = I + ddbar psi
  bool operator==(const ModelConfig&) const = default;
};

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::constant;
  double horizon = 1.0;
  PotentialRecipe end_potential;  ///< interpolation: sigma(T) = g0 + ddbar of this
  bool operator==(const ScheduleConfig&) const = default;
};

enum class ForcingMode {
  none,          ///< f = 0
  decay,         ///< f0 = C1 / (1 + rho^{2+eps})
  potential,     ///< f0 given by the recipe
  manufactured,  ///< f0 = log det(g0 + ddbar phi) - log det g0 with phi the recipe
};
const char* to_string(ForcingMode mode);

struct ForcingConfig {
  ForcingMode mode = ForcingMode::none;
  double c1 = 0.0;
  double eps = 1.0;
  PotentialRecipe recipe;
  bool operator==(const ForcingConfig&) const = default;
};

/// Omega = Ric(g0) - ddbar f0 is the only supported source.
struct OmegaConfig {
  std::string source = "forcing";
  bool operator==(const OmegaConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  ScheduleConfig schedule;
  ForcingConfig forcing;
  OmegaConfig omega;
  double t_max = 10.0;
  double dt_safety = 0.2;
  double tol_w = 1e-7;
  double record_interval = 0.1;
  double snapshot_interval = 1.0;
  int p = 4;
  int k = 1;
  Stepper stepper = Stepper::automatic;
  std::string output_dir = "out";
  bool operator==(const RunConfig&) const = default;
};

/// Parses a JSON document. Throws ConfigError naming an unknown key, a missing
/// model block or the field that violates an invariant.
RunConfig parse_config(const std::string& text);

/// Normalized JSON text with every field spelled out; parse_config inverts it.
std::string config_to_json(const RunConfig& config);

/// Re-checks the invariants of a programmatically built config.
void validate(const RunConfig& config);

struct BuiltProblem {
  std::shared_ptr<const ModelGeometry> model;
  Problem problem;
};

BuiltProblem build_problem(const RunConfig& config);
RunOptions run_options(const RunConfig& config);

}  // namespace kflow
