#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kflow/flow.hpp"

namespace kflow {

/// One row of the estimate monitor. Q is absent when the background has
/// Christoffel terms; the heat residual is absent until three states exist.
struct MonitorRecord {
  double t = 0.0;
  std::size_t steps = 0;
  double dt_used = 0.0;
  double sup_v = 0.0;
  double sup_w = 0.0;
  double trace_min = 0.0;  ///< min of n + Delta_sigma v
  double trace_max = 0.0;
  double equiv_cmin = 0.0;  ///< eigen range of g against g0
  double equiv_cmax = 0.0;
  std::optional<double> q_max;
  double s_max = 0.0;
  double gradw_max = 0.0;
  double lp_energy = 0.0;
  double dissipation = 0.0;
  double ricci_residual = 0.0;
  std::optional<double> heat_residual;
  double f_sup = 0.0;  ///< sup |g^{i jbar} (sigma_t)_{i jbar} - f_t|
  double amgm_margin = 0.0;
  double equation_residual = 0.0;
  std::optional<double> volume_defect;  ///< torus only
  std::optional<double> holder_2a;      ///< parabolic 2+alpha seminorm, when requested
  std::string status = "running";
};

/// Suprema of the tracked quantities over a run.
struct RealizedConstants {
  double sup_v = 0.0;
  double sup_w = 0.0;
  double trace_max = 0.0;
  double inv_trace_min = 0.0;
  double equiv_cmax = 0.0;
  double inv_equiv_cmin = 0.0;
  std::optional<double> q_max;
  double s_max = 0.0;
  double gradw_max = 0.0;
  double f_sup = 0.0;
  double ricci_residual = 0.0;
  double sigma_c = 1.0;  ///< c with c^{-1} g0 <= sigma(t) <= c g0
};

struct MonitorReport {
  std::vector<MonitorRecord> records;
  RealizedConstants realized;
  std::string status;
};

RealizedConstants realize(const std::vector<MonitorRecord>& records, double sigma_c = 1.0);

struct MonitorSettings {
  int p = 4;
  int k = 1;
  double ricci_layer = 0.1;  ///< radial boundary layer excluded from the Ricci residual
};

/// n + Delta_sigma v = tr(sigma^{-1} g).
GridField trace_sigma(const GridField& v, const HermitianField& sigma, const ModelGeometry& model);
std::pair<double, double> equivalence_constants(const HermitianField& g, const ModelGeometry& model);
/// g^{i jbar} g^{k lbar} g^{m nbar} v_{;i lbar m} v_{;jbar k nbar}. Requires a
/// spatially constant torus background or the flat radial background; throws
/// InvalidArgument otherwise.
GridField third_order_Q(const GridField& v, const HermitianField& g, const HermitianField& sigma,
                        const ModelGeometry& model);
/// g^{i jbar} w_i w_jbar.
GridField grad_w_sq(const GridField& w, const HermitianField& g, const ModelGeometry& model);
/// |ddbar w|_g^2.
GridField S_quantity(const GridField& w, const HermitianField& g, const ModelGeometry& model);
/// Coordinate volume weight of each node: cell volume on the torus,
/// (pi^n/(n-1)!) e^{ns} times trapezoid weights radially. Multiply by det g.
GridField volume_weights(const ModelGeometry& model);
/// (integral of w^p dV_g, integral of |grad w^k|_g^2 dV_g); needs p = 2k + 2.
std::pair<double, double> lp_diagnostics(const GridField& w, const HermitianField& g,
                                         const ModelGeometry& model, int p = 4, int k = 1);
/// sup over interior nodes of |Ric(g) - Omega|_{g0}.
double ricci_residual(const HermitianField& g, const PrescribedForm& omega,
                      const ModelGeometry& model, double layer = 0.1);

/// sup |Delta_g w - d_t w - F| at the middle state of three consecutive states
/// (non-uniform three-point time derivative).
double heat_residual(const std::vector<const FlowState*>& window, const Problem& problem);

enum class HolderMode { elliptic, parabolic };

/// Discrete Holder seminorm over node pairs at coordinate distance <= cap
/// (periodic minimal displacement on the torus). Parabolic mode also pairs
/// different times with denominator |dx|^alpha + |dt|^{alpha/2}.
double holder_seminorm(const std::vector<GridField>& fields, const std::vector<double>& times,
                       double alpha, HolderMode mode, double cap = 1.0);

/// Parabolic 2+alpha level seminorm of v between two states: the seminorm of
/// the components of ddbar v and of v_t.
double holder_2a(const FlowState& a, const FlowState& b, const ModelGeometry& model, double alpha);

MonitorRecord monitor_record(const FlowState& state, const Problem& problem,
                             const MonitorSettings& settings = {});

struct SuiteTolerances {
  double amgm = -1e-12;
  double equation = 1e-10;
  double monotone_slack_per_step = 1e-8;
  double volume_n1 = 1e-12;
  double volume_n2 = 1e-2;
  double equivalence_ratio = 1e6;
};

struct SuiteResult {
  double amgm_margin = 0.0;        ///< worst (smallest)
  double equation_residual = 0.0;  ///< worst (largest)
  std::optional<double> monotone_excess;  ///< worst increase of sup|w| beyond slack
  std::optional<double> volume_defect;
  double equivalence_ratio = 1.0;
  bool pass = true;
  std::vector<std::string> failures;
};

/// Worst margins over a run. Monotonicity is only asserted when sigma and f are static.
SuiteResult inequality_suite(const MonitorReport& report, const Problem& problem,
                             const SuiteTolerances& tol = {});

/// min over nodes of Delta~ T - |grad~ T|^2 / T + tr Ric~ with T = n + Delta u,
/// h~ = I + ddbar u, on the flat torus.
double laplacian_inequality_check(const ModelGeometry& model, const GridField& u);

struct VolumeGrowth {
  double c3 = 0.0;
  bool pass = true;
};

/// max over radii of V0(r) / r^{2n}, with V0 the g0-volume of the geodesic ball
/// about the origin. The torus passes vacuously.
VolumeGrowth volume_growth_check(const ModelGeometry& model, const std::vector<double>& radii);

}  // namespace kflow
