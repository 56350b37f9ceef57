#pragma once

#include <memory>
#include <optional>

#include "kflow/background.hpp"

namespace kflow {

/// Truncation data of the radial model. Node 0 carries the one-sided Neumann
/// condition v'(s_min) = slope0 + t slope_rate; node N-1 is pinned to
/// value0 + t value_rate. The homogeneous defaults are the untransformed problem;
/// gauge transforms shift them. Unused on the torus.
struct RadialBoundary {
  double slope0 = 0.0;
  double slope_rate = 0.0;
  double value0 = 0.0;
  double value_rate = 0.0;
};

/// Everything the right-hand side depends on.
struct Problem {
  std::shared_ptr<const ModelGeometry> model;
  BackgroundPath path;
  Forcing forcing;
  RadialBoundary boundary;
  /// Target Ricci form; defaults to Ric(g0) - ddbar f0 when absent.
  std::optional<PrescribedForm> omega;

  const ModelGeometry& geometry() const { return *model; }
  PrescribedForm target() const;
};

/// Problem with the constant schedule sigma = g0 and the given forcing.
Problem make_problem(std::shared_ptr<const ModelGeometry> model, BackgroundPath path,
                     Forcing forcing);

struct FlowState {
  double t = 0.0;
  GridField v;
  HermitianField g;  ///< sigma(t) + ddbar v
  GridField w;       ///< -v_t, boundary aware
  std::size_t steps = 0;
  double dt_used = 0.0;
};

/// Nodes whose values evolve by the equation (all torus nodes; radial 1..N-2).
std::pair<std::size_t, std::size_t> active_range(const Grid& grid);
/// sup over active nodes of |f|.
double active_sup(const GridField& f);

/// log det(sigma(t) + ddbar v) - log det g0 - f(t).
GridField ma_rhs(const GridField& v, double t, const Problem& problem);
inline GridField ma_rhs(const FlowState& s, const Problem& p) { return ma_rhs(s.v, s.t, p); }

/// Overwrites the radial boundary nodes of v with the truncation data at time t.
void impose_boundary(GridField& v, double t, const Problem& problem);
/// dv/dt: ma_rhs on active nodes, the boundary-implied rate elsewhere.
GridField evolution_rate(const GridField& v, double t, const Problem& problem);
/// Builds a coherent state (boundary imposed, g and w refreshed).
FlowState make_state(const Problem& problem, GridField v, double t, std::size_t steps = 0);

/// Explicit bound safety * h_min^2 / (2 * max coefficient); the coefficient is
/// tr g^{-1} on the torus and e^{-s}((n-1)/lambda_perp + 1/lambda_rad) radially.
double stable_dt(const FlowState& state, double safety = 0.2);

/// Two-stage explicit midpoint step.
FlowState step(const FlowState& state, const Problem& problem, double dt);
/// Backward Euler step solved by damped Newton (radial model only).
FlowState implicit_step(const FlowState& state, const Problem& problem, double dt);

/// Rewrites `problem` so that its solutions are v_old - q(t) with the same metric.
Problem transform_problem(const Problem& problem, const GaugeShift& shift);

struct HatTransform {
  BackgroundPath path;
  Forcing forcing;
  GaugeShift shift;
};

/// sigma^ = ((T-t)/T) sigma(0) + (t/T)(sigma(T) + ddbar F), f^ = f + F/T,
/// v^ = v - (t/T) F. Throws DegenerateMetricError when sigma(T) + ddbar F fails
/// positivity (rescale F).
HatTransform psh_gauge_transform(const BackgroundPath& path, const Forcing& forcing,
                                 const GridField& barrier, double horizon,
                                 const ModelGeometry& model);

}  // namespace kflow
