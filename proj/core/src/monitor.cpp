#include "kflow/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "detail/stencil.hpp"
#include "kflow/error.hpp"

namespace kflow {

namespace {

using cd = std::complex<double>;

double sup_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.values())
    if (!(std::abs(v) <= m)) m = std::abs(v);
  return m;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Complex gradient a_i = d u / d z_i on the torus.
std::vector<GridField> torus_real_gradient(const GridField& u) {
  const Grid& g = *u.grid();
  std::vector<GridField> d;
  for (int a = 0; a < g.axes(); ++a) d.push_back(detail::torus_d1(u, a));
  return d;
}

bool spatially_constant(const HermitianField& f) {
  const int c = f.components();
  const double* first = f.at(0);
  const double scale = std::max(1.0, f.max_abs_component());
  for (std::size_t i = 1; i < f.nodes(); ++i)
    for (int k = 0; k < c; ++k)
      if (std::abs(f.at(i)[k] - first[k]) > 1e-14 * scale) return false;
  return true;
}

bool flat_radial(const HermitianField& sigma) {
  for (std::size_t i = 0; i < sigma.nodes(); ++i)
    if (std::abs(sigma.at(i)[0] - 1.0) > 1e-14 || std::abs(sigma.at(i)[1] - 1.0) > 1e-14)
      return false;
  return true;
}

Eigen::Matrix2cd full2(const double* a) {
  Eigen::Matrix2cd m;
  m << cd(a[0], 0.0), cd(a[2], a[3]), cd(a[2], -a[3]), cd(a[1], 0.0);
  return m;
}

}  // namespace

RealizedConstants realize(const std::vector<MonitorRecord>& records, double sigma_c) {
  RealizedConstants c;
  c.sigma_c = sigma_c;
  for (const auto& r : records) {
    c.sup_v = std::max(c.sup_v, r.sup_v);
    c.sup_w = std::max(c.sup_w, r.sup_w);
    c.trace_max = std::max(c.trace_max, r.trace_max);
    c.inv_trace_min = std::max(c.inv_trace_min, 1.0 / r.trace_min);
    c.equiv_cmax = std::max(c.equiv_cmax, r.equiv_cmax);
    c.inv_equiv_cmin = std::max(c.inv_equiv_cmin, 1.0 / r.equiv_cmin);
    if (r.q_max) c.q_max = std::max(c.q_max.value_or(0.0), *r.q_max);
    c.s_max = std::max(c.s_max, r.s_max);
    c.gradw_max = std::max(c.gradw_max, r.gradw_max);
    c.f_sup = std::max(c.f_sup, r.f_sup);
    c.ricci_residual = std::max(c.ricci_residual, r.ricci_residual);
  }
  return c;
}

GridField trace_sigma(const GridField& v, const HermitianField& sigma,
                      const ModelGeometry& model) {
  require_positive(sigma, "trace_sigma background");
  const HermitianField h = complex_hessian(v, model);
  GridField out(model.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = model.n() + node::trace_inverse(sigma.layout(), model.n(), sigma.at(i), h.at(i));
  return out;
}

std::pair<double, double> equivalence_constants(const HermitianField& g,
                                                const ModelGeometry& model) {
  return eigen_range(g, model.g0());
}

GridField third_order_Q(const GridField& v, const HermitianField& g, const HermitianField& sigma,
                        const ModelGeometry& model) {
  const Grid& grid = *model.grid();
  const int n = grid.n;
  const HermitianField h = complex_hessian(v, model);
  GridField out(model.grid());
  if (grid.kind == ModelKind::radial_plane) {
    if (!flat_radial(sigma))
      throw InvalidArgument("third_order_Q needs the flat radial background");
    GridField p1(model.grid()), p2(model.grid());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double es = std::exp(grid.s(i));
      p1[i] = es * h.at(i)[0];
      p2[i] = es * h.at(i)[1];
    }
    const GridField p3 = radial_d1(p2);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double lp = g.at(i)[0], lr = g.at(i)[1];
      const double e3 = std::exp(-3.0 * grid.s(i));
      const double a = p3[i] - p2[i], b = p2[i] - p1[i];
      out[i] = e3 * (a * a / (lr * lr * lr) + 2.0 * (n - 1) * b * b / (lp * lp * lr));
    }
    return out;
  }
  if (!spatially_constant(sigma))
    throw InvalidArgument(
        "third_order_Q needs a spatially constant torus background (Christoffel terms present)");

  if (n == 1) {
    const GridField a = GridField(model.grid(), std::vector<double>(h.data()));
    const GridField dx = detail::torus_d1(a, 0), dy = detail::torus_d1(a, 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double gi = 1.0 / g.at(i)[0];
      // T = d_z v_{1 1bar} = (dx - i dy) / 2.
      out[i] = 0.25 * (dx[i] * dx[i] + dy[i] * dy[i]) * gi * gi * gi;
    }
    return out;
  }
  // n = 2: T_{i l m} = d_{z_m} v_{i lbar}.
  std::vector<GridField> comp;
  for (int c = 0; c < 4; ++c) {
    GridField f(model.grid());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = h.at(i)[c];
    comp.push_back(std::move(f));
  }
  std::vector<std::vector<GridField>> d(4);  // d[c][axis]
  for (int c = 0; c < 4; ++c) d[static_cast<std::size_t>(c)] = torus_real_gradient(comp[static_cast<std::size_t>(c)]);
  for (std::size_t node = 0; node < out.size(); ++node) {
    const Eigen::Matrix2cd G = full2(g.at(node)).inverse();
    // Gi(i, j) stands for g^{j ibar}: g^{i jbar} = (G^{-1})_{j i}.
    cd T[2][2][2];
    for (int m = 0; m < 2; ++m) {
      auto dz = [&](int c) {
        return 0.5 * cd(d[static_cast<std::size_t>(c)][static_cast<std::size_t>(2 * m)][node],
                        -d[static_cast<std::size_t>(c)][static_cast<std::size_t>(2 * m + 1)][node]);
      };
      const cd v11 = dz(0), v22 = dz(1);
      const cd re = dz(2), im = dz(3);
      T[0][0][m] = v11;
      T[1][1][m] = v22;
      T[0][1][m] = re + cd(0.0, 1.0) * im;  // v_{1 2bar}
      T[1][0][m] = re - cd(0.0, 1.0) * im;  // v_{2 1bar}
    }
    cd q = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m)
              for (int nn = 0; nn < 2; ++nn)
                q += G(j, i) * G(l, k) * G(nn, m) * T[i][l][m] * std::conj(T[j][k][nn]);
    out[node] = q.real();
  }
  return out;
}

GridField grad_w_sq(const GridField& w, const HermitianField& g, const ModelGeometry& model) {
  const Grid& grid = *model.grid();
  w.require_grid(grid, "grad_w_sq");
  GridField out(model.grid());
  if (grid.kind == ModelKind::radial_plane) {
    const GridField d = radial_d1(w);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::exp(-grid.s(i)) * d[i] * d[i] / g.at(i)[1];
    return out;
  }
  const auto d = torus_real_gradient(w);
  if (grid.n == 1) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = 0.25 * (d[0][i] * d[0][i] + d[1][i] * d[1][i]) / g.at(i)[0];
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cd a1 = 0.5 * cd(d[0][i], -d[1][i]);
    const cd a2 = 0.5 * cd(d[2][i], -d[3][i]);
    const double* m = g.at(i);
    const double det = node::det(g.layout(), 2, m);
    const cd g12(m[2], m[3]);
    out[i] = (m[1] * std::norm(a1) + m[0] * std::norm(a2) - 2.0 * std::real(std::conj(a1) * g12 * a2)) /
             det;
  }
  return out;
}

GridField S_quantity(const GridField& w, const HermitianField& g, const ModelGeometry& model) {
  const HermitianField h = complex_hessian(w, model);
  GridField out(model.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = node::norm_sq(g.layout(), model.n(), g.at(i), h.at(i));
  return out;
}

GridField volume_weights(const ModelGeometry& model) {
  const Grid& grid = *model.grid();
  if (grid.kind == ModelKind::periodic_torus) return GridField(model.grid(), grid.cell_volume());
  const int n = grid.n;
  const double c = std::pow(std::numbers::pi, n) / factorial(n - 1);
  const double h = grid.spacing[0];
  GridField out(model.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double trap = (i == 0 || i + 1 == out.size()) ? 0.5 * h : h;
    out[i] = c * std::exp(n * grid.s(i)) * trap;
  }
  return out;
}

std::pair<double, double> lp_diagnostics(const GridField& w, const HermitianField& g,
                                         const ModelGeometry& model, int p, int k) {
  if (k < 1 || p != 2 * k + 2) throw InvalidArgument("lp_diagnostics needs p = 2k + 2 with k >= 1");
  GridField wk(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) wk[i] = std::pow(w[i], k);
  const GridField grad = grad_w_sq(wk, g, model);
  const GridField dv = volume_weights(model);
  double energy = 0.0, diss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double vol = node::det(g.layout(), model.n(), g.at(i)) * dv[i];
    energy += std::pow(w[i], p) * vol;
    diss += grad[i] * vol;
  }
  return {energy, diss};
}

double ricci_residual(const HermitianField& g, const PrescribedForm& omega,
                      const ModelGeometry& model, double layer) {
  HermitianField r = ricci_form(g, model);
  r -= omega.omega;
  const GridField norm = form_norm(r, model.g0());
  std::size_t b = 0, e = norm.size();
  if (model.kind() == ModelKind::radial_plane) {
    const auto skip = static_cast<std::size_t>(std::ceil(layer * static_cast<double>(norm.size())));
    b = skip;
    e = norm.size() - skip;
  }
  double m = 0.0;
  for (std::size_t i = b; i < e; ++i)
    if (!(norm[i] <= m)) m = norm[i];
  return m;
}

double heat_residual(const std::vector<const FlowState*>& window, const Problem& problem) {
  if (window.size() < 3) throw InvalidArgument("heat_residual needs three consecutive states");
  const FlowState& a = *window[window.size() - 3];
  const FlowState& b = *window[window.size() - 2];
  const FlowState& c = *window[window.size() - 1];
  const double h1 = b.t - a.t, h2 = c.t - b.t;
  if (!(h1 > 0.0) || !(h2 > 0.0)) throw InvalidArgument("heat_residual needs increasing times");
  const ModelGeometry& model = problem.geometry();
  const GridField lap = laplacian(b.w, b.g, model);
  const HermitianField& rate = problem.path.rate();
  const double ca = -h2 / (h1 * (h1 + h2));
  const double cb = (h2 - h1) / (h1 * h2);
  const double cc = h1 / (h2 * (h1 + h2));
  const auto [lo, hi] = active_range(*model.grid());
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double wt = ca * a.w[i] + cb * b.w[i] + cc * c.w[i];
    const double F = node::trace_inverse(b.g.layout(), model.n(), b.g.at(i), rate.at(i)) -
                     problem.forcing.f1[i];
    const double r = std::abs(lap[i] - wt - F);
    if (!(r <= m)) m = r;
  }
  return m;
}

double holder_seminorm(const std::vector<GridField>& fields, const std::vector<double>& times,
                       double alpha, HolderMode mode, double cap) {
  if (fields.empty()) throw InvalidArgument("holder_seminorm needs a non-empty window");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("holder exponent must lie in (0, 1)");
  if (times.size() != fields.size()) throw ShapeError("holder_seminorm: one time per field");
  const Grid& grid = *fields[0].grid();
  for (const auto& f : fields)
    if (!f.same_shape(fields[0])) throw ShapeError("holder_seminorm: fields on different grids");
  const int axes = grid.axes();
  const bool periodic = grid.kind == ModelKind::periodic_torus;

  // Integer offsets within the cap (both signs; sup is symmetric anyway).
  std::vector<std::vector<int>> offsets;
  std::vector<double> dist;
  std::vector<int> reach(static_cast<std::size_t>(axes));
  for (int a = 0; a < axes; ++a) {
    int r = static_cast<int>(std::floor(cap / grid.spacing[static_cast<std::size_t>(a)] + 1e-9));
    if (periodic) r = std::min(r, grid.dims[static_cast<std::size_t>(a)] / 2);
    else r = std::min(r, grid.dims[static_cast<std::size_t>(a)] - 1);
    reach[static_cast<std::size_t>(a)] = r;
  }
  std::vector<int> d(static_cast<std::size_t>(axes));
  for (int a = 0; a < axes; ++a) d[static_cast<std::size_t>(a)] = -reach[static_cast<std::size_t>(a)];
  while (true) {
    double r2 = 0.0;
    bool zero = true;
    for (int a = 0; a < axes; ++a) {
      const double x = d[static_cast<std::size_t>(a)] * grid.spacing[static_cast<std::size_t>(a)];
      r2 += x * x;
      zero = zero && d[static_cast<std::size_t>(a)] == 0;
    }
    if (r2 <= cap * cap * (1.0 + 1e-12)) {
      offsets.push_back(d);
      dist.push_back(zero ? 0.0 : std::sqrt(r2));
    }
    int a = axes - 1;
    for (; a >= 0; --a) {
      if (++d[static_cast<std::size_t>(a)] <= reach[static_cast<std::size_t>(a)]) break;
      d[static_cast<std::size_t>(a)] = -reach[static_cast<std::size_t>(a)];
    }
    if (a < 0) break;
  }

  for (const auto& f : fields)
    for (double x : f.data())
      if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();

  // Rows run along the last axis, which has unit stride.
  const int last = axes - 1;
  const auto ulast = static_cast<std::size_t>(last);
  const std::size_t row_len = static_cast<std::size_t>(grid.dims[ulast]);
  const std::size_t rows = grid.size() / row_len;
  std::vector<std::vector<std::ptrdiff_t>> shifted(static_cast<std::size_t>(axes));
  for (int a = 0; a < axes; ++a)
    shifted[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(grid.dims[static_cast<std::size_t>(a)]));

  double best = 0.0;
  const std::size_t T = fields.size();
  for (std::size_t ta = 0; ta < T; ++ta) {
    for (std::size_t tb = ta; tb < T; ++tb) {
      if (mode == HolderMode::elliptic && tb != ta) continue;
      const double tt = std::abs(times[tb] - times[ta]);
      const double tterm = mode == HolderMode::parabolic ? std::pow(tt, alpha / 2.0) : 0.0;
      const GridField& A = fields[ta];
      const GridField& B = fields[tb];
      for (std::size_t o = 0; o < offsets.size(); ++o) {
        const double denom = (dist[o] > 0.0 ? std::pow(dist[o], alpha) : 0.0) + tterm;
        if (denom == 0.0) continue;
        // Within one time, d and -d visit the same pairs.
        if (ta == tb) {
          const auto nz = std::find_if(offsets[o].begin(), offsets[o].end(), [](int x) { return x != 0; });
          if (nz != offsets[o].end() && *nz < 0) continue;
        }
        // Per-axis shifted offsets into the node numbering; -1 marks a neighbour off the grid.
        for (int a = 0; a < axes; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          const int Na = grid.dims[ua];
          auto& table = shifted[ua];
          for (int c = 0; c < Na; ++c) {
            int m = c + offsets[o][ua];
            if (periodic) m = ((m % Na) + Na) % Na;
            table[static_cast<std::size_t>(c)] =
                m < 0 || m >= Na ? -1 : static_cast<std::ptrdiff_t>(m) * static_cast<std::ptrdiff_t>(grid.stride(a));
          }
        }
        // Along the last axis the shifted row is at most two contiguous segments.
        const int dl = offsets[o][ulast];
        const auto len = static_cast<std::ptrdiff_t>(row_len);
        struct Segment {
          std::ptrdiff_t begin, end, shift;
        };
        std::vector<Segment> segments;
        if (periodic) {
          const std::ptrdiff_t k = ((dl % len) + len) % len;
          segments.push_back({0, len - k, k});
          if (k > 0) segments.push_back({len - k, len, k - len});
        } else {
          segments.push_back({std::max<std::ptrdiff_t>(0, -dl), std::min(len, len - dl), dl});
        }
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t i0 = r * row_len;
          std::ptrdiff_t base = 0;
          bool inside = true;
          for (int a = 0; a < last && inside; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const std::size_t c = (i0 / grid.stride(a)) % static_cast<std::size_t>(grid.dims[ua]);
            const std::ptrdiff_t part = shifted[ua][c];
            inside = part >= 0;
            base += part;
          }
          if (!inside) continue;
          const double* a_row = A.data().data() + i0;
          const double* b_row = B.data().data() + base;
          for (const Segment& sg : segments) {
            std::ptrdiff_t c = sg.begin;
            for (; c + 4 <= sg.end; c += 4)
              for (int l = 0; l < 4; ++l)
                acc[l] = std::max(acc[l], std::abs(b_row[c + l + sg.shift] - a_row[c + l]));
            for (; c < sg.end; ++c) acc[0] = std::max(acc[0], std::abs(b_row[c + sg.shift] - a_row[c]));
          }
        }
        const double worst = std::max(std::max(acc[0], acc[1]), std::max(acc[2], acc[3]));
        best = std::max(best, worst / denom);
      }
    }
  }
  return best;
}

double holder_2a(const FlowState& a, const FlowState& b, const ModelGeometry& model, double alpha) {
  const HermitianField ha = complex_hessian(a.v, model);
  const HermitianField hb = complex_hessian(b.v, model);
  double best = 0.0;
  for (int c = 0; c < ha.components(); ++c) {
    GridField fa(model.grid()), fb(model.grid());
    for (std::size_t i = 0; i < fa.size(); ++i) {
      fa[i] = ha.at(i)[c];
      fb[i] = hb.at(i)[c];
    }
    best = std::max(best, holder_seminorm({fa, fb}, {a.t, b.t}, alpha, HolderMode::parabolic));
  }
  best = std::max(best, holder_seminorm({a.w, b.w}, {a.t, b.t}, alpha, HolderMode::parabolic));
  return best;
}

MonitorRecord monitor_record(const FlowState& s, const Problem& p, const MonitorSettings& st) {
  const ModelGeometry& model = p.geometry();
  const Grid& grid = *model.grid();
  const int n = model.n();
  MonitorRecord r;
  r.t = s.t;
  r.steps = s.steps;
  r.dt_used = s.dt_used;
  r.sup_v = sup_abs(s.v);
  r.sup_w = active_sup(s.w);

  const HermitianField sigma = p.path.at(s.t);
  const GridField tr = trace_sigma(s.v, sigma, model);
  r.trace_min = tr.min();
  r.trace_max = tr.max();
  std::tie(r.equiv_cmin, r.equiv_cmax) = equivalence_constants(s.g, model);
  try {
    r.q_max = third_order_Q(s.v, s.g, sigma, model).max();
  } catch (const InvalidArgument&) {
    r.q_max.reset();
  }
  r.s_max = S_quantity(s.w, s.g, model).max();
  r.gradw_max = grad_w_sq(s.w, s.g, model).max();
  std::tie(r.lp_energy, r.dissipation) = lp_diagnostics(s.w, s.g, model, st.p, st.k);
  r.ricci_residual = ricci_residual(s.g, p.target(), model, st.ricci_layer);

  const auto [lo, hi] = active_range(grid);
  const HermitianField& rate = p.path.rate();
  double amgm = std::numeric_limits<double>::infinity();
  double eq = 0.0, fsup = 0.0;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    const double dg = node::det(s.g.layout(), n, s.g.at(i));
    const double ds = node::det(sigma.layout(), n, sigma.at(i));
    const double margin = tr[i] - n * std::pow(dg / ds, 1.0 / n);
    if (!(margin >= amgm)) amgm = margin;
    const double F = node::trace_inverse(s.g.layout(), n, s.g.at(i), rate.at(i)) - p.forcing.f1[i];
    if (!(std::abs(F) <= fsup)) fsup = std::abs(F);
    if (i >= lo && i < hi) {
      const double d0 = std::exp(model.log_det_g0()[i]);
      const double f = p.forcing.f0[i] + s.t * p.forcing.f1[i];
      const double res = std::abs(dg / d0 - std::exp(f - s.w[i]));
      if (!(res <= eq)) eq = res;
    }
  }
  r.amgm_margin = amgm;
  r.equation_residual = eq;
  r.f_sup = fsup;

  if (grid.kind == ModelKind::periodic_torus) {
    double vg = 0.0, vs = 0.0;
    for (std::size_t i = 0; i < s.v.size(); ++i) {
      vg += node::det(s.g.layout(), n, s.g.at(i));
      vs += node::det(sigma.layout(), n, sigma.at(i));
    }
    r.volume_defect = std::abs(vg - vs) / vs;
  }
  return r;
}

SuiteResult inequality_suite(const MonitorReport& report, const Problem& problem,
                             const SuiteTolerances& tol) {
  SuiteResult out;
  out.amgm_margin = std::numeric_limits<double>::infinity();
  const bool monotone = problem.path.is_static() && problem.forcing.is_static();
  const bool torus = problem.geometry().kind() == ModelKind::periodic_torus;
  const double vol_tol = problem.geometry().n() == 1 ? tol.volume_n1 : tol.volume_n2;
  auto fail = [&](const std::string& what, double t) {
    out.pass = false;
    out.failures.push_back(what + " at t = " + std::to_string(t));
  };
  if (monotone) out.monotone_excess = 0.0;
  if (torus) out.volume_defect = 0.0;
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    const MonitorRecord& r = report.records[k];
    const double values[] = {r.sup_v, r.sup_w, r.trace_min, r.trace_max, r.equiv_cmin,
                             r.equiv_cmax, r.amgm_margin, r.equation_residual};
    const char* names[] = {"sup_v", "sup_w", "trace_min", "trace_max", "equiv_cmin",
                           "equiv_cmax", "amgm_margin", "equation_residual"};
    bool finite = true;
    for (std::size_t q = 0; q < std::size(values); ++q) {
      if (!std::isfinite(values[q])) {
        fail(std::string("non-finite ") + names[q], r.t);
        finite = false;
      }
    }
    if (!finite) continue;
    out.amgm_margin = std::min(out.amgm_margin, r.amgm_margin);
    if (r.amgm_margin < tol.amgm) fail("AM-GM trace margin", r.t);
    out.equation_residual = std::max(out.equation_residual, r.equation_residual);
    if (r.equation_residual > tol.equation) fail("equation residual", r.t);
    const double ratio = r.equiv_cmax / r.equiv_cmin;
    out.equivalence_ratio = std::max(out.equivalence_ratio, ratio);
    if (!(ratio <= tol.equivalence_ratio)) fail("equivalence constants unbounded", r.t);
    if (torus && r.volume_defect) {
      out.volume_defect = std::max(*out.volume_defect, *r.volume_defect);
      if (*r.volume_defect > vol_tol) fail("volume conservation", r.t);
    }
    if (monotone && k > 0) {
      const MonitorRecord& q = report.records[k - 1];
      const double slack =
          tol.monotone_slack_per_step * static_cast<double>(std::max<std::size_t>(1, r.steps - q.steps));
      const double excess = r.sup_w - q.sup_w - slack;
      out.monotone_excess = std::max(*out.monotone_excess, r.sup_w - q.sup_w);
      if (excess > 0.0) fail("sup|w| increased", r.t);
    }
  }
  if (report.records.empty()) out.amgm_margin = 0.0;
  return out;
}

double laplacian_inequality_check(const ModelGeometry& model, const GridField& u) {
  if (model.kind() != ModelKind::periodic_torus || model.psi().max_abs() != 0.0)
    throw InvalidArgument("laplacian_inequality_check needs the flat torus background");
  const int n = model.n();
  const HermitianField id = HermitianField::identity(model.grid());
  HermitianField ht = id + complex_hessian(u, model);
  require_positive(ht, "h + ddbar u");
  const GridField T = trace_sigma(u, id, model);
  const GridField lap = laplacian(T, ht, model);
  const GridField grad = grad_w_sq(T, ht, model);
  const HermitianField ric = ricci_form(ht, model);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double trace_ric = node::trace_inverse(id.layout(), n, id.at(i), ric.at(i));
    m = std::min(m, lap[i] - grad[i] / T[i] + trace_ric);
  }
  return m;
}

VolumeGrowth volume_growth_check(const ModelGeometry& model, const std::vector<double>& radii) {
  if (model.kind() == ModelKind::periodic_torus) return {0.0, true};
  const Grid& grid = *model.grid();
  const int n = grid.n;
  const std::size_t N = grid.size();
  const double h = grid.spacing[0];
  const HermitianField& g0 = model.g0();
  // Distance from the origin d(s) and ball volume V(s); the piece below s_min
  // is treated as a Euclidean ball scaled by g0 at s_min.
  std::vector<double> dist(N), vol(N), dens(N);
  const double cvol = std::pow(std::numbers::pi, n) / factorial(n - 1);
  for (std::size_t i = 0; i < N; ++i) {
    const double s = grid.s(i);
    dens[i] = cvol * std::exp(n * s) * node::det(g0.layout(), n, g0.at(i));
  }
  auto speed = [&](std::size_t i) { return 0.5 * std::exp(0.5 * grid.s(i)) * std::sqrt(g0.at(i)[1]); };
  dist[0] = std::exp(0.5 * grid.s(0)) * std::sqrt(g0.at(0)[1]);
  vol[0] = dens[0] / n;
  for (std::size_t i = 1; i < N; ++i) {
    dist[i] = dist[i - 1] + 0.5 * h * (speed(i - 1) + speed(i));
    vol[i] = vol[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
  }
  VolumeGrowth out;
  for (double r : radii) {
    if (!(r >= dist[0]) || !(r <= dist[N - 1]))
      throw InvalidArgument("volume_growth_check radius " + std::to_string(r) +
                            " lies outside the truncated model");
    const auto it = std::lower_bound(dist.begin(), dist.end(), r);
    const auto j = static_cast<std::size_t>(it - dist.begin());
    double v;
    if (j == 0) {
      v = vol[0];
    } else {
      // Integrate the density up to the fractional position inside the cell.
      const double frac = (r - dist[j - 1]) / (dist[j] - dist[j - 1]);
      const double sd = frac * h;
      const double dmid = dens[j - 1] + (dens[j] - dens[j - 1]) * frac;
      v = vol[j - 1] + 0.5 * sd * (dens[j - 1] + dmid);
    }
    out.c3 = std::max(out.c3, v / std::pow(r, 2 * n));
  }
  out.pass = std::isfinite(out.c3) && out.c3 > 0.0;
  return out;
}

}  // namespace kflow
