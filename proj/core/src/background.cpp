#include "kflow/background.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <fftw3.h>

#include "detail/tridiag.hpp"
#include "kflow/error.hpp"

namespace kflow {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::krf_linear: return "krf_linear";
    case ScheduleKind::interpolation: return "interpolation";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "krf_linear") return ScheduleKind::krf_linear;
  if (name == "interpolation") return ScheduleKind::interpolation;
  throw InvalidArgument("unknown schedule kind '" + name +
                        "' (expected constant, krf_linear or interpolation)");
}

BackgroundPath::BackgroundPath(ScheduleKind kind, HermitianField sigma0, HermitianField slope,
                               double horizon)
    : kind_(kind), sigma0_(std::move(sigma0)), slope_(std::move(slope)), horizon_(horizon) {
  sigma0_.require_shape(slope_, "background path");
  if (!(horizon_ >= 0.0)) throw InvalidArgument("schedule horizon must be >= 0");
}

HermitianField BackgroundPath::at(double t) const {
  HermitianField out = sigma0_;
  if (t != 0.0) out.axpy(t, slope_);
  return out;
}

void BackgroundPath::at(double t, HermitianField& out) const {
  if (!out.same_shape(sigma0_)) out = HermitianField(sigma0_.grid());
  auto& o = out.data();
  const auto& a = sigma0_.data();
  const auto& b = slope_.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + t * b[i];
}

void BackgroundPath::validate(const HermitianField& g0, bool include_end) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const double ends[2] = {0.0, horizon_};
  for (double t : std::span(ends, include_end ? 2 : 1)) {
    const HermitianField s = at(t);
    require_positive(s, "background form sigma(t)", t);
    const auto [l, h] = eigen_range(s, g0);
    lo = std::min(lo, l);
    hi = std::max(hi, h);
  }
  c_ = std::max({1.0, hi, 1.0 / lo});
}

BackgroundPath make_schedule(ScheduleKind kind, const ModelGeometry& model,
                             const ScheduleParams& params) {
  const HermitianField sigma0 = params.sigma0 ? *params.sigma0 : model.g0();
  sigma0.require_shape(model.g0(), "make_schedule sigma0");
  HermitianField slope(model.grid());
  double horizon = params.horizon;
  switch (kind) {
    case ScheduleKind::constant:
      break;
    case ScheduleKind::krf_linear:
      slope = ricci_form(model.g0(), model);
      slope *= -1.0;
      break;
    case ScheduleKind::interpolation: {
      if (!params.sigma_end) throw InvalidArgument("interpolation schedule needs sigma(T)");
      if (!(horizon > 0.0)) throw InvalidArgument("interpolation schedule needs T > 0");
      slope = *params.sigma_end - sigma0;
      slope *= 1.0 / horizon;
      break;
    }
  }
  BackgroundPath path(kind, sigma0, std::move(slope), horizon);
  path.validate(model.g0(), params.check_end);
  return path;
}

// ---------------------------------------------------------------------------

Forcing Forcing::zero(const ModelGeometry& model) {
  return {model.zeros(), model.zeros(), std::nullopt};
}

Forcing Forcing::fixed(GridField f0) {
  GridField f1(f0.grid());
  return {std::move(f0), std::move(f1), std::nullopt};
}

GridField Forcing::at(double t) const {
  GridField out = f0;
  if (t != 0.0) out.axpy(t, f1);
  return out;
}

Forcing forcing_profile(double c1, double eps, const ModelGeometry& model) {
  if (!(eps > 0.0)) throw InvalidArgument("decay exponent eps must be > 0");
  if (!(c1 >= 0.0)) throw InvalidArgument("decay constant C1 must be >= 0");
  const GridField rho = distance_like(model);
  GridField f0(model.grid());
  for (std::size_t i = 0; i < f0.size(); ++i) f0[i] = c1 / (1.0 + std::pow(rho[i], 2.0 + eps));
  Forcing f = Forcing::fixed(std::move(f0));
  f.decay = DecayParams{c1, eps};
  return f;
}

double decay_certificate(const Forcing& forcing, const ModelGeometry& model) {
  const double eps = forcing.decay ? forcing.decay->eps : 1.0;
  const GridField rho = distance_like(model);
  double m = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    m = std::max(m, std::abs(forcing.f0[i]) * (1.0 + std::pow(rho[i], 2.0 + eps)));
  return m;
}

PrescribedForm prescribed_from_forcing(const ModelGeometry& model, const GridField& f0) {
  HermitianField omega = ricci_form(model.g0(), model);
  omega -= complex_hessian(f0, model);
  return {std::move(omega), "Ric(g0) - ddbar f0"};
}

double prescribed_consistency(const ModelGeometry& model, const PrescribedForm& omega,
                              const GridField& f0) {
  HermitianField r = ricci_form(model.g0(), model);
  r -= omega.omega;
  r -= complex_hessian(f0, model);
  return r.max_abs_component();
}

// ---------------------------------------------------------------------------

namespace {

GridField torus_potential(const HermitianField& form, const ModelGeometry& model) {
  const Grid& g = *model.grid();
  const std::size_t total = g.size();
  std::vector<double> trace(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double* a = form.at(i);
    trace[i] = g.n == 1 ? a[0] : a[0] + a[1];
  }
  double mean = 0.0;
  for (double t : trace) mean += t;
  mean /= static_cast<double>(total);
  const double scale = std::max(1.0, form.max_abs_component());
  if (std::abs(mean) > 1e-12 * scale) throw CompatibilityError("mean trace", mean);

  const int rank = g.axes();
  const int last = g.dims.back();
  const std::size_t half = total / static_cast<std::size_t>(last) *
                           static_cast<std::size_t>(last / 2 + 1);
  std::vector<double> real(trace);
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half));
  fftw_plan fwd = fftw_plan_dft_r2c(rank, g.dims.data(), real.data(), spec, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r(rank, g.dims.data(), spec, real.data(), FFTW_ESTIMATE);
  fftw_execute(fwd);

  // Symbol of the discrete trace operator 1/4 sum_a D_aa: -(1/h_a^2) sin^2(pi k_a / N_a).
  std::vector<std::vector<double>> axis_symbol(static_cast<std::size_t>(rank));
  for (int a = 0; a < rank; ++a) {
    const int N = g.dims[static_cast<std::size_t>(a)];
    const double h = g.spacing[static_cast<std::size_t>(a)];
    auto& sym = axis_symbol[static_cast<std::size_t>(a)];
    sym.resize(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
      const double sn = std::sin(M_PI * k / N);
      sym[static_cast<std::size_t>(k)] = -sn * sn / (h * h);
    }
  }
  std::vector<int> idx(static_cast<std::size_t>(rank), 0);
  for (std::size_t m = 0; m < half; ++m) {
    double lam = 0.0;
    for (int a = 0; a < rank; ++a) lam += axis_symbol[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    if (m == 0) {
      spec[m][0] = spec[m][1] = 0.0;
    } else {
      spec[m][0] /= lam;
      spec[m][1] /= lam;
    }
    for (int a = rank - 1; a >= 0; --a) {
      const int lim = a == rank - 1 ? last / 2 + 1 : g.dims[static_cast<std::size_t>(a)];
      if (++idx[static_cast<std::size_t>(a)] < lim) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  fftw_execute(bwd);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(spec);
  for (double& v : real) v /= static_cast<double>(total);
  return GridField(model.grid(), std::move(real));
}

GridField radial_potential(const HermitianField& form, const ModelGeometry& model) {
  const Grid& g = *model.grid();
  const std::size_t N = g.size();
  const double h = g.spacing[0];
  const double h2 = h * h;
  // Unknowns f_1..f_{N-2}; f_{N-1} = 0 and f_0 = (4 f_1 - f_2 - 2 h d) / 3 so the
  // one-sided derivative at s_min equals d = e^{s_min} a_perp(s_min).
  const double d = std::exp(g.s(0)) * form.at(0)[0];
  const std::size_t m = N - 2;
  std::vector<double> lo(m, 1.0 / h2), di(m, -2.0 / h2), up(m, 1.0 / h2), rhs(m);
  for (std::size_t k = 0; k < m; ++k) rhs[k] = std::exp(g.s(k + 1)) * form.at(k + 1)[1];
  di[0] += 4.0 / (3.0 * h2);
  up[0] -= 1.0 / (3.0 * h2);
  rhs[0] += 2.0 * h * d / (3.0 * h2);
  detail::solve_tridiagonal(lo, di, up, rhs);
  GridField f(model.grid());
  for (std::size_t k = 0; k < m; ++k) f[k + 1] = rhs[k];
  f[0] = (4.0 * f[1] - f[2] - 2.0 * h * d) / 3.0;
  f[N - 1] = 0.0;
  return f;
}

}  // namespace

GridField potential_from_form(const HermitianField& form, const ModelGeometry& model, double tol) {
  form.require_shape(model.g0(), "potential_from_form");
  GridField f = model.kind() == ModelKind::periodic_torus ? torus_potential(form, model)
                                                          : radial_potential(form, model);
  HermitianField r = complex_hessian(f, model);
  r -= form;
  const double res = r.max_abs_component();
  if (!(res <= tol * std::max(1.0, form.max_abs_component())))
    throw CompatibilityError("ddbar reconstruction residual", res);
  return f;
}

GridField GaugeShift::at(double t) const {
  GridField out = offset;
  if (t != 0.0) out.axpy(t, rate);
  return out;
}

GaugedData normalize_initial_data(const BackgroundPath& path, const Forcing& forcing,
                                  const GridField& u, const ModelGeometry& model) {
  u.require_grid(*model.grid(), "normalize_initial_data");
  if (!forcing.is_static())
    throw InvalidArgument("initial-data normalization supports static forcing only");
  HermitianField sigma0 = path.sigma0() + complex_hessian(u, model);
  HermitianField slope = path.rate() - complex_hessian(forcing.f0, model);
  require_positive(sigma0, "normalized background sigma~(0)", 0.0);
  BackgroundPath tilde(path.kind(), std::move(sigma0), std::move(slope), path.horizon());
  tilde.validate(model.g0(), false);
  GridField rate = forcing.f0;
  rate *= -1.0;
  return {std::move(tilde), Forcing::zero(model), GaugeShift{u, std::move(rate)}};
}

}  // namespace kflow
