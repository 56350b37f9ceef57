#include "kflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detail/stencil.hpp"
#include "kflow/error.hpp"

namespace kflow {

RadialProfile RadialProfile::flat() {
  auto e = [](double s) { return std::exp(s); };
  return {"flat", e, e, e};
}

RadialProfile RadialProfile::log_bump(double a, double center, int order) {
  if (!(a >= 0.0)) throw InvalidArgument("log_bump profile needs a >= 0");
  if (!std::isfinite(center)) throw InvalidArgument("log_bump center must be finite");
  if (order < 1) throw InvalidArgument("log_bump order must be >= 1");
  const double k = order;
  return {"log_bump",
          [a, center, k](double s) {
            return std::exp(s) + a / k * std::log1p(std::exp(k * (s - center)));
          },
          [a, center, k](double s) {
            const double e = std::exp(k * (s - center));
            return std::exp(s) + a * e / (1.0 + e);
          },
          [a, center, k](double s) {
            const double e = std::exp(k * (s - center));
            return std::exp(s) + a * k * e / ((1.0 + e) * (1.0 + e));
          }};
}

RadialProfile RadialProfile::fubini_study() {
  return {"fubini_study",
          [](double s) { return std::log1p(std::exp(s)); },
          [](double s) {
            const double e = std::exp(s);
            return e / (1.0 + e);
          },
          [](double s) {
            const double e = std::exp(s);
            return e / ((1.0 + e) * (1.0 + e));
          }};
}

RadialProfile RadialProfile::named(const std::string& name, double param, double center,
                                   int order) {
  if (name == "flat") return flat();
  if (name == "log_bump") return log_bump(param, center, order);
  if (name == "fubini_study") return fubini_study();
  throw InvalidArgument("unknown radial profile '" + name +
                        "' (expected flat, log_bump or fubini_study)");
}

// ---------------------------------------------------------------------------

ModelGeometry::ModelGeometry(GridPtr grid) : grid_(std::move(grid)) {}

ModelGeometry ModelGeometry::torus(int n, int resolution, const CoordFn& psi) {
  return torus(n, std::vector<int>(static_cast<std::size_t>(2 * std::max(n, 0)), resolution), psi);
}

ModelGeometry ModelGeometry::torus(int n, std::vector<int> dims, const CoordFn& psi) {
  ModelGeometry m(std::make_shared<const Grid>(Grid::torus(n, std::move(dims))));
  m.psi_ = psi ? m.sample(psi) : m.zeros();
  if (!m.psi_.all_finite()) throw InvalidArgument("background potential psi is not finite");
  m.profile_ = psi ? "psi" : "flat";
  m.g0_ = HermitianField::identity(m.grid_);
  m.g0_ += complex_hessian(m.psi_, m);
  require_positive(m.g0_, "background metric g0");
  m.log_det_g0_ = log_det(m.g0_);
  const HermitianField id = HermitianField::identity(m.grid_);
  m.kappa_ = eigen_range(m.g0_, id);
  return m;
}

ModelGeometry ModelGeometry::radial(int n, int count, double s_min, double s_max,
                                    RadialProfile profile) {
  ModelGeometry m(std::make_shared<const Grid>(Grid::radial(n, count, s_min, s_max)));
  m.profile_ = profile.name;
  m.p0_ = m.zeros();
  m.dp0_ = m.zeros();
  m.d2p0_ = m.zeros();
  m.psi_ = m.zeros();
  m.g0_ = HermitianField(m.grid_);
  for (std::size_t i = 0; i < m.grid_->size(); ++i) {
    const double s = m.grid_->s(i);
    m.p0_[i] = profile.p(s);
    m.dp0_[i] = profile.dp(s);
    m.d2p0_[i] = profile.d2p(s);
    if (!(m.dp0_[i] > 0.0) || !(m.d2p0_[i] > 0.0))
      throw DegenerateMetricError("radial profile needs P0' > 0 and P0'' > 0", i,
                                  std::min(m.dp0_[i], m.d2p0_[i]),
                                  std::numeric_limits<double>::quiet_NaN());
    double* g = m.g0_.at(i);
    g[0] = std::exp(-s) * m.dp0_[i];
    g[1] = std::exp(-s) * m.d2p0_[i];
  }
  require_positive(m.g0_, "background metric g0");
  m.log_det_g0_ = log_det(m.g0_);
  m.kappa_ = eigen_range(m.g0_, HermitianField::identity(m.grid_));
  return m;
}

GridField ModelGeometry::sample(const CoordFn& fn) const {
  GridField out(grid_);
  std::vector<double> x(static_cast<std::size_t>(grid_->axes()));
  for (std::size_t i = 0; i < grid_->size(); ++i) {
    for (int a = 0; a < grid_->axes(); ++a) x[static_cast<std::size_t>(a)] = grid_->coordinate(i, a);
    out[i] = fn(x.data());
  }
  return out;
}

// ---------------------------------------------------------------------------

std::pair<double, std::size_t> min_eigenvalue(const HermitianField& g) {
  double lo = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const double e = node::min_eigenvalue(g.layout(), g.n(), g.at(i));
    if (!(e >= lo)) {  // also catches NaN
      lo = e;
      worst = i;
      if (std::isnan(e)) break;
    }
  }
  return {lo, worst};
}

void require_positive(const HermitianField& g, const char* what, double time, double floor) {
  const auto [lo, node] = min_eigenvalue(g);
  if (!(lo > floor)) throw DegenerateMetricError(what, node, lo, time);
}

GridField log_det(const HermitianField& g, double time) {
  require_positive(g, "metric", time);
  GridField out(g.grid());
  if (g.layout() == FormLayout::radial_pair) {
    const int n = g.n();
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const double* a = g.at(i);
      out[i] = (n - 1) * std::log(a[0]) + std::log(a[1]);
    }
  } else {
    for (std::size_t i = 0; i < g.nodes(); ++i)
      out[i] = std::log(node::det(g.layout(), g.n(), g.at(i)));
  }
  return out;
}

// ---------------------------------------------------------------------------

GridField radial_d1(const GridField& u) {
  const Grid& grid = *u.grid();
  if (grid.kind != ModelKind::radial_plane) throw ShapeError("radial_d1 needs a radial field");
  const std::size_t N = u.size();
  const double h = grid.spacing[0];
  GridField out(u.grid());
  out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < N; ++i) out[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
  out[N - 1] = (3.0 * u[N - 1] - 4.0 * u[N - 2] + u[N - 3]) / (2.0 * h);
  return out;
}

GridField radial_d2(const GridField& u) {
  const Grid& grid = *u.grid();
  if (grid.kind != ModelKind::radial_plane) throw ShapeError("radial_d2 needs a radial field");
  const std::size_t N = u.size();
  const double h2 = grid.spacing[0] * grid.spacing[0];
  GridField out(u.grid());
  out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
  for (std::size_t i = 1; i + 1 < N; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
  out[N - 1] = (2.0 * u[N - 1] - 5.0 * u[N - 2] + 4.0 * u[N - 3] - u[N - 4]) / h2;
  return out;
}

namespace {

using detail::shift;

double second(const Grid& g, const GridField& u, std::size_t i, int a) {
  const double h = g.spacing[static_cast<std::size_t>(a)];
  return (u[shift(g, i, a, 1)] - 2.0 * u[i] + u[shift(g, i, a, -1)]) / (h * h);
}

double mixed(const Grid& g, const GridField& u, std::size_t i, int a, int b) {
  const std::size_t ap = shift(g, i, a, 1), am = shift(g, i, a, -1);
  const double pp = u[shift(g, ap, b, 1)], pm = u[shift(g, ap, b, -1)];
  const double mp = u[shift(g, am, b, 1)], mm = u[shift(g, am, b, -1)];
  return (pp - pm - mp + mm) /
         (4.0 * g.spacing[static_cast<std::size_t>(a)] * g.spacing[static_cast<std::size_t>(b)]);
}

void torus1_hessian(const Grid& g, const GridField& u, HermitianField& out) {
  const int nx = g.dims[0], ny = g.dims[1];
  const double cx = 0.25 / (g.spacing[0] * g.spacing[0]);
  const double cy = 0.25 / (g.spacing[1] * g.spacing[1]);
  const double* v = u.data().data();
  double* o = out.data().data();
  for (int ix = 0; ix < nx; ++ix) {
    const double* row = v + static_cast<std::size_t>(ix) * ny;
    const double* up = v + static_cast<std::size_t>(ix + 1 == nx ? 0 : ix + 1) * ny;
    const double* dn = v + static_cast<std::size_t>(ix == 0 ? nx - 1 : ix - 1) * ny;
    double* orow = o + static_cast<std::size_t>(ix) * ny;
    orow[0] = cx * (up[0] - 2.0 * row[0] + dn[0]) + cy * (row[1] - 2.0 * row[0] + row[ny - 1]);
    for (int iy = 1; iy + 1 < ny; ++iy)
      orow[iy] = cx * (up[iy] - 2.0 * row[iy] + dn[iy]) +
                 cy * (row[iy + 1] - 2.0 * row[iy] + row[iy - 1]);
    const int l = ny - 1;
    orow[l] = cx * (up[l] - 2.0 * row[l] + dn[l]) + cy * (row[0] - 2.0 * row[l] + row[l - 1]);
  }
}

}  // namespace

HermitianField complex_hessian(const GridField& u, const ModelGeometry& model) {
  const Grid& g = *model.grid();
  u.require_grid(g, "complex_hessian");
  HermitianField out(model.grid());
  if (g.kind == ModelKind::radial_plane) {
    const GridField d1 = radial_d1(u);
    const GridField d2 = radial_d2(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double es = std::exp(-g.s(i));
      out.at(i)[0] = es * d1[i];
      out.at(i)[1] = es * d2[i];
    }
    return out;
  }
  if (g.n == 1) {
    torus1_hessian(g, u, out);
    return out;
  }
  // n = 2, axes (x1, y1, x2, y2).
  for (std::size_t i = 0; i < u.size(); ++i) {
    double* a = out.at(i);
    a[0] = 0.25 * (second(g, u, i, 0) + second(g, u, i, 1));
    a[1] = 0.25 * (second(g, u, i, 2) + second(g, u, i, 3));
    a[2] = 0.25 * (mixed(g, u, i, 0, 2) + mixed(g, u, i, 1, 3));
    a[3] = 0.25 * (mixed(g, u, i, 0, 3) - mixed(g, u, i, 1, 2));
  }
  return out;
}

GridField laplacian(const GridField& u, const HermitianField& g, const ModelGeometry& model) {
  require_positive(g, "laplacian metric");
  const HermitianField h = complex_hessian(u, model);
  g.require_shape(h, "laplacian");
  GridField out(model.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = node::trace_inverse(g.layout(), g.n(), g.at(i), h.at(i));
  return out;
}

HermitianField ricci_form(const HermitianField& g, const ModelGeometry& model) {
  GridField psi = log_det(g);
  psi *= -1.0;
  return complex_hessian(psi, model);
}

namespace {

GridField radial_curvature_norm(const HermitianField& g, const ModelGeometry& model) {
  const Grid& grid = *model.grid();
  const int n = grid.n;
  const std::size_t N = grid.size();
  GridField p1(model.grid()), p2(model.grid());
  for (std::size_t i = 0; i < N; ++i) {
    const double es = std::exp(grid.s(i));
    p1[i] = es * g.at(i)[0];
    p2[i] = es * g.at(i)[1];
  }
  const GridField p3 = radial_d1(p2);
  const GridField p4 = radial_d2(p2);

  GridField out(model.grid());
  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> z(nn, 0.0), gd(nn), X(nn * nn * nn), R(nn * nn * nn * nn);
  auto d = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
  for (std::size_t node = 0; node < N; ++node) {
    const double s = grid.s(node);
    const double em = std::exp(-s);
    const double E = p2[node] - p1[node];
    const double E1 = p3[node] - p2[node];
    const double E2 = p4[node] - p3[node];
    const double B = em * em * E;
    const double Bs = em * em * (E1 - 2.0 * E);
    const double Bss = em * em * (E2 - 4.0 * E1 + 4.0 * E);
    const double beta = em * Bs;
    const double gamma = em * em * (Bss - Bs);
    z[0] = std::exp(0.5 * s);
    gd[0] = g.at(node)[1];
    for (std::size_t p = 1; p < nn; ++p) gd[p] = g.at(node)[0];

    // X_{kiq} = d_k g_{i qbar}; z is real at this point so conjugation is trivial.
    for (std::size_t k = 0; k < nn; ++k)
      for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t q = 0; q < nn; ++q)
          X[(k * nn + i) * nn + q] =
              B * z[k] * d(i, q) + beta * z[k] * z[i] * z[q] + B * z[i] * d(k, q);

    double sum = 0.0;
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t k = 0; k < nn; ++k)
          for (std::size_t l = 0; l < nn; ++l) {
            const double ddg = (beta * z[l] * z[k] + B * d(k, l)) * d(i, j) +
                               gamma * z[l] * z[k] * z[i] * z[j] +
                               beta * (d(k, l) * z[i] * z[j] + z[k] * d(i, l) * z[j]) +
                               (beta * z[l] * z[i] + B * d(i, l)) * d(k, j);
            double quad = 0.0;
            for (std::size_t p = 0; p < nn; ++p)
              quad += X[(k * nn + i) * nn + p] * X[(l * nn + j) * nn + p] / gd[p];
            const double r = -ddg + quad;
            sum += r * r / (gd[i] * gd[j] * gd[k] * gd[l]);
          }
    out[node] = std::sqrt(sum);
  }
  return out;
}

}  // namespace

GridField curvature_norm(const HermitianField& g, const ModelGeometry& model) {
  const Grid& grid = *model.grid();
  require_positive(g, "curvature metric");
  if (grid.kind == ModelKind::radial_plane) return radial_curvature_norm(g, model);
  if (grid.n != 1)
    throw InvalidArgument("curvature_norm supports the n = 1 torus and the radial model only");
  // n = 1: R_{1 1bar 1 1bar} = -g d dbar log g, so |Rm| = |d dbar log g| / g.
  const GridField lg = log_det(g);
  const HermitianField h = complex_hessian(lg, model);
  GridField out(model.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(h.at(i)[0]) / g.at(i)[0];
  return out;
}

GridField distance_like(const ModelGeometry& model) {
  if (model.kind() == ModelKind::periodic_torus) return GridField(model.grid(), 1.0);
  return model.sample([](const double* s) { return std::sqrt(1.0 + std::exp(s[0])); });
}

std::pair<double, double> eigen_range(const HermitianField& a, const HermitianField& b) {
  a.require_shape(b, "eigen_range");
  require_positive(b, "eigen_range reference form");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.nodes(); ++i) {
    double l = 0.0, h = 0.0;
    node::generalized_range(a.layout(), a.n(), a.at(i), b.at(i), l, h);
    lo = std::min(lo, l);
    hi = std::max(hi, h);
  }
  return {lo, hi};
}

GridField form_norm(const HermitianField& a, const HermitianField& g) {
  a.require_shape(g, "form_norm");
  GridField out(g.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(std::max(0.0, node::norm_sq(g.layout(), g.n(), g.at(i), a.at(i))));
  return out;
}

}  // namespace kflow
