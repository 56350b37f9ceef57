#include "kflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detail/tridiag.hpp"
#include "detail/vlog.hpp"
#include "kflow/error.hpp"

namespace kflow {

PrescribedForm Problem::target() const {
  if (omega) return *omega;
  return prescribed_from_forcing(*model, forcing.f0);
}

Problem make_problem(std::shared_ptr<const ModelGeometry> model, BackgroundPath path,
                     Forcing forcing) {
  if (!model) throw InvalidArgument("problem needs a model");
  path.sigma0().require_shape(model->g0(), "problem background");
  forcing.f0.require_grid(*model->grid(), "problem forcing");
  Problem p;
  p.model = std::move(model);
  p.path = std::move(path);
  p.forcing = std::move(forcing);
  return p;
}

std::pair<std::size_t, std::size_t> active_range(const Grid& grid) {
  if (grid.kind == ModelKind::radial_plane) return {1, grid.size() - 1};
  return {0, grid.size()};
}

double active_sup(const GridField& f) {
  const auto [b, e] = active_range(*f.grid());
  double m = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    const double a = std::abs(f[i]);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

namespace {

// Fused evaluation for the n = 1 torus: writes g = sigma(t) + ddbar v and the
// right-hand side with one stencil pass and one vectorized log pass.
void torus1_eval(const GridField& v, double t, const Problem& p, double* g_out, double* o) {
  const Grid& g = *p.model->grid();
  const int nx = g.dims[0], ny = g.dims[1];
  const double cx = 0.25 / (g.spacing[0] * g.spacing[0]);
  const double cy = 0.25 / (g.spacing[1] * g.spacing[1]);
  const double* s0 = p.path.sigma0().data().data();
  const double* s1 = p.path.rate().data().data();
  const double* lg0 = p.model->log_det_g0().data().data();
  const double* f0 = p.forcing.f0.data().data();
  const double* f1 = p.forcing.f1.data().data();
  const double* u = v.data().data();
  std::vector<double> scratch;
  if (!g_out) {
    scratch.resize(v.size());
    g_out = scratch.data();
  }
  for (int ix = 0; ix < nx; ++ix) {
    const std::size_t r = static_cast<std::size_t>(ix) * ny;
    const double* row = u + r;
    const double* up = u + static_cast<std::size_t>(ix + 1 == nx ? 0 : ix + 1) * ny;
    const double* dn = u + static_cast<std::size_t>(ix == 0 ? nx - 1 : ix - 1) * ny;
    double* gr = g_out + r;
    const double* a = s0 + r;
    const double* b = s1 + r;
    gr[0] = (a[0] + t * b[0]) + cx * (up[0] - 2.0 * row[0] + dn[0]) +
            cy * (row[1] - 2.0 * row[0] + row[ny - 1]);
    for (int iy = 1; iy + 1 < ny; ++iy)
      gr[iy] = (a[iy] + t * b[iy]) + cx * (up[iy] - 2.0 * row[iy] + dn[iy]) +
               cy * (row[iy + 1] - 2.0 * row[iy] + row[iy - 1]);
    const int l = ny - 1;
    gr[l] = (a[l] + t * b[l]) + cx * (up[l] - 2.0 * row[l] + dn[l]) +
            cy * (row[0] - 2.0 * row[l] + row[l - 1]);
  }
  const std::size_t total = v.size();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < total; ++k) worst = std::min(worst, g_out[k]);
  if (!(worst > kPositivityFloor)) {
    std::size_t node = 0;
    for (std::size_t k = 0; k < total; ++k)
      if (!(g_out[k] > kPositivityFloor)) {
        node = k;
        if (std::isnan(g_out[k])) throw NumericBlowupError("non-finite metric", k, t);
      }
    for (std::size_t k = 0; k < total; ++k)
      if (g_out[k] < g_out[node]) node = k;
    throw DegenerateMetricError("metric sigma(t) + ddbar v", node, g_out[node], t);
  }
  detail::vector_log(g_out, o, total);
  for (std::size_t k = 0; k < total; ++k) o[k] -= lg0[k] + f0[k] + t * f1[k];
}

bool fused(const Problem& p) {
  return p.model->kind() == ModelKind::periodic_torus && p.model->n() == 1;
}

}  // namespace

GridField ma_rhs(const GridField& v, double t, const Problem& p) {
  const ModelGeometry& model = *p.model;
  v.require_grid(*model.grid(), "ma_rhs");
  GridField out(model.grid());
  if (fused(p)) {
    torus1_eval(v, t, p, nullptr, out.data().data());
    return out;
  }
  HermitianField g = p.path.at(t);
  g += complex_hessian(v, model);
  const GridField ld = log_det(g, t);
  const auto& lg0 = model.log_det_g0();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ld[i] - lg0[i] - p.forcing.f0[i] - t * p.forcing.f1[i];
  return out;
}

void impose_boundary(GridField& v, double t, const Problem& p) {
  const Grid& g = *p.model->grid();
  if (g.kind != ModelKind::radial_plane) return;
  const std::size_t N = g.size();
  const double h = g.spacing[0];
  const RadialBoundary& b = p.boundary;
  v[N - 1] = b.value0 + t * b.value_rate;
  v[0] = (4.0 * v[1] - v[2] - 2.0 * h * (b.slope0 + t * b.slope_rate)) / 3.0;
}

namespace {

void fill_boundary_rate(GridField& rate, const Problem& p) {
  const Grid& g = *p.model->grid();
  if (g.kind != ModelKind::radial_plane) return;
  const std::size_t N = g.size();
  rate[N - 1] = p.boundary.value_rate;
  rate[0] = (4.0 * rate[1] - rate[2] - 2.0 * g.spacing[0] * p.boundary.slope_rate) / 3.0;
}

void require_finite(const GridField& v, const char* what, double t) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw NumericBlowupError(what, i, t);
}

}  // namespace

GridField evolution_rate(const GridField& v, double t, const Problem& p) {
  GridField rate = ma_rhs(v, t, p);
  fill_boundary_rate(rate, p);
  return rate;
}

FlowState make_state(const Problem& p, GridField v, double t, std::size_t steps) {
  const ModelGeometry& model = *p.model;
  v.require_grid(*model.grid(), "make_state");
  impose_boundary(v, t, p);
  if (!fused(p)) require_finite(v, "non-finite potential", t);
  FlowState s;
  s.t = t;
  s.steps = steps;
  if (fused(p)) {
    s.g = HermitianField(model.grid());
    s.w = GridField(model.grid());
    torus1_eval(v, t, p, s.g.data().data(), s.w.data().data());
    s.w *= -1.0;
    s.v = std::move(v);
    return s;
  }
  s.g = p.path.at(t);
  s.g += complex_hessian(v, model);
  require_positive(s.g, "metric sigma(t) + ddbar v", t);
  s.w = evolution_rate(v, t, p);
  s.w *= -1.0;
  s.v = std::move(v);
  return s;
}

double stable_dt(const FlowState& state, double safety) {
  const HermitianField& g = state.g;
  const Grid& grid = *g.grid();
  const double h = grid.min_spacing();
  double cmax = 0.0;
  if (grid.kind == ModelKind::radial_plane) {
    const int n = grid.n;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const double* a = g.at(i);
      cmax = std::max(cmax, std::exp(-grid.s(i)) * ((n - 1) / a[0] + 1.0 / a[1]));
    }
  } else {
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const double* a = g.at(i);
      double id[4] = {1.0, 1.0, 0.0, 0.0};
      cmax = std::max(cmax, node::trace_inverse(g.layout(), g.n(), a, id));
    }
  }
  return safety * h * h / (2.0 * cmax);
}

FlowState step(const FlowState& s, const Problem& p, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const double th = s.t + 0.5 * dt;
  GridField mid = s.v;
  mid.axpy(-0.5 * dt, s.w);  // the cached w is -v_t at s.t
  impose_boundary(mid, th, p);
  if (!fused(p)) require_finite(mid, "non-finite potential at midpoint stage", th);
  GridField next = s.v;
  next.axpy(dt, evolution_rate(mid, th, p));
  FlowState out = make_state(p, std::move(next), s.t + dt, s.steps + 1);
  out.dt_used = dt;
  return out;
}

FlowState implicit_step(const FlowState& s, const Problem& p, double dt) {
  const ModelGeometry& model = *p.model;
  const Grid& grid = *model.grid();
  if (grid.kind != ModelKind::radial_plane)
    throw InvalidArgument("implicit stepping is implemented for the radial model only");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const int n = grid.n;
  const std::size_t N = grid.size();
  const std::size_t m = N - 2;
  const double h = grid.spacing[0];
  const double t1 = s.t + dt;
  const HermitianField sigma = p.path.at(t1);
  const GridField& lg0 = model.log_det_g0();
  std::vector<double> es(N), f(N);
  for (std::size_t i = 0; i < N; ++i) {
    es[i] = std::exp(-grid.s(i));
    f[i] = p.forcing.f0[i] + t1 * p.forcing.f1[i];
  }

  std::vector<double> lo(m), di(m), up(m), r(m);
  std::size_t bad_node = 0;

  // Residual R_i = v_i - v_i^old - dt rhs_i(v); returns false on lost positivity.
  auto residual = [&](const GridField& x, std::vector<double>* jl, std::vector<double>* jd,
                      std::vector<double>* ju, std::vector<double>& res) {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      const double d1 = (x[i + 1] - x[i - 1]) / (2.0 * h);
      const double d2 = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (h * h);
      const double lp = sigma.at(i)[0] + es[i] * d1;
      const double lr = sigma.at(i)[1] + es[i] * d2;
      if (!(lp > kPositivityFloor) || !(lr > kPositivityFloor)) {
        bad_node = i;
        return false;
      }
      const double rhs = (n - 1) * std::log(lp) + std::log(lr) - lg0[i] - f[i];
      res[k] = x[i] - s.v[i] - dt * rhs;
      if (jl) {
        const double a = (n - 1) * es[i] / (2.0 * h * lp);
        const double b = es[i] / (h * h * lr);
        (*jl)[k] = -dt * (b - a);
        (*jd)[k] = 1.0 + dt * 2.0 * b;
        (*ju)[k] = -dt * (b + a);
      }
    }
    return true;
  };
  auto sup = [](const std::vector<double>& a) {
    double x = 0.0;
    for (double y : a) x = std::max(x, std::abs(y));
    return x;
  };

  // Explicit predictor first (it follows moving boundary data), then the old state.
  GridField v = s.v;
  v.axpy(-dt, s.w);
  impose_boundary(v, t1, p);
  if (!residual(v, &lo, &di, &up, r)) {
    v = s.v;
    impose_boundary(v, t1, p);
    if (!residual(v, &lo, &di, &up, r))
      throw DegenerateMetricError("implicit step initial guess lost positivity", bad_node,
                                  std::min(sigma.at(bad_node)[0], sigma.at(bad_node)[1]), t1);
  }
  const double vscale = 1.0 + v.max_abs();
  bool converged = false;
  for (int it = 0; it < 60 && !converged; ++it) {
    // Node 1 sees v_0 = (4 v_1 - v_2 - 2 h slope) / 3.
    di[0] += lo[0] * 4.0 / 3.0;
    up[0] -= lo[0] / 3.0;
    std::vector<double> delta(r);
    detail::solve_tridiagonal(lo, di, up, delta);
    if (sup(delta) <= 1e-13 * vscale) {
      for (std::size_t k = 0; k < m; ++k) v[k + 1] -= delta[k];
      impose_boundary(v, t1, p);
      converged = true;
      break;
    }
    const double rn = sup(r);
    double lambda = 1.0;
    GridField trial = v;
    std::vector<double> rt(m);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t k = 0; k < m; ++k) trial[k + 1] = v[k + 1] - lambda * delta[k];
      impose_boundary(trial, t1, p);
      if (residual(trial, &lo, &di, &up, rt) && (sup(rt) < rn || sup(rt) <= 1e-14 * vscale)) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    v = trial;
    r = rt;
  }
  if (!converged)
    throw NumericBlowupError("implicit Newton solve did not converge", 0, t1);
  require_finite(v, "non-finite potential", t1);
  FlowState out = make_state(p, std::move(v), t1, s.steps + 1);
  out.dt_used = dt;
  return out;
}

Problem transform_problem(const Problem& problem, const GaugeShift& shift) {
  const ModelGeometry& model = *problem.model;
  shift.offset.require_grid(*model.grid(), "gauge offset");
  shift.rate.require_grid(*model.grid(), "gauge rate");
  Problem out = problem;
  HermitianField s0 = problem.path.sigma0() + complex_hessian(shift.offset, model);
  HermitianField slope = problem.path.rate() + complex_hessian(shift.rate, model);
  out.path = BackgroundPath(problem.path.kind(), std::move(s0), std::move(slope),
                            problem.path.horizon());
  out.forcing.f0 = problem.forcing.f0 + shift.rate;
  out.forcing.decay.reset();
  if (model.kind() == ModelKind::radial_plane) {
    const std::size_t N = model.grid()->size();
    out.boundary.slope0 -= radial_d1(shift.offset)[0];
    out.boundary.slope_rate -= radial_d1(shift.rate)[0];
    out.boundary.value0 -= shift.offset[N - 1];
    out.boundary.value_rate -= shift.rate[N - 1];
  }
  if (!out.omega) out.omega = problem.target();
  return out;
}

HatTransform psh_gauge_transform(const BackgroundPath& path, const Forcing& forcing,
                                 const GridField& barrier, double horizon,
                                 const ModelGeometry& model) {
  barrier.require_grid(*model.grid(), "psh_gauge_transform barrier");
  if (!(horizon > 0.0)) throw InvalidArgument("hat transform needs a horizon T > 0");
  const HermitianField hf = complex_hessian(barrier, model);
  HermitianField end = path.at(horizon) + hf;
  require_positive(end, "sigma(T) + ddbar F (barrier not plurisubharmonic enough; rescale F)",
                   horizon);
  HermitianField slope = path.rate();
  slope.axpy(1.0 / horizon, hf);
  BackgroundPath hat(ScheduleKind::interpolation, path.sigma0(), std::move(slope), horizon);
  hat.validate(model.g0());
  GridField rate = barrier;
  rate *= 1.0 / horizon;
  Forcing f = forcing;
  f.f0 += rate;
  f.decay.reset();
  return {std::move(hat), std::move(f), GaugeShift{model.zeros(), std::move(rate)}};
}

}  // namespace kflow
