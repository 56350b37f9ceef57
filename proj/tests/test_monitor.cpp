#include <doctest.h>

#include "kflow/error.hpp"
#include "support.hpp"

using namespace kflow;
using namespace kflow::testing;

namespace {

Problem flat_problem(const std::shared_ptr<const ModelGeometry>& m) {
  return make_problem(m, make_schedule(ScheduleKind::constant, *m), Forcing::zero(*m));
}

GridField cos_field(const ModelGeometry& m, double a) {
  return m.sample([a](const double* x) { return a * std::cos(x[0]); });
}

GridField sin_field(const ModelGeometry& m) {
  return m.sample([](const double* x) { return std::sin(x[0]); });
}

// Heat residual at the middle of three states around t* with fixed dt.
double heat_at(const Problem& p, double dt, double t_star) {
  FlowState s = make_state(p, p.model->zeros(), 0.0);
  const int k = static_cast<int>(std::lround(t_star / dt));
  std::vector<FlowState> window;
  for (int i = 0; i <= k + 1; ++i) {
    if (i >= k - 1) window.push_back(s);
    if (i <= k) s = step(s, p, dt);
  }
  return heat_residual({&window[0], &window[1], &window[2]}, p);
}

}  // namespace

TEST_SUITE("monitor") {

TEST_CASE("trace_sigma examples") {
  auto m = torus(2, 8);
  CHECK(trace_sigma(m->zeros(), m->g0(), *m).max() == 2.0);
  CHECK(trace_sigma(m->zeros(), m->g0(), *m).min() == 2.0);

  auto t = torus(1, 128);
  const double h = t->grid()->spacing[0];
  const GridField tr = trace_sigma(cos_field(*t, 0.4), t->g0(), *t);
  CHECK(std::abs(tr[0] - 0.9) < 0.1 * h * h / 12 * 1.01);
}

TEST_CASE("AM-GM margin is nonnegative on random positive data") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto m = torus(2, 8);
  for (int trial = 0; trial < 20; ++trial) {
    HermitianField sigma(m->grid());
    for (std::size_t i = 0; i < sigma.nodes(); ++i) {
      double* p = sigma.at(i);
      p[2] = 0.4 * u(rng);
      p[3] = 0.4 * u(rng);
      p[0] = 1.0 + std::abs(u(rng));
      p[1] = 1.0 + std::abs(u(rng));
    }
    const GridField v = random_trig(*m, rng, 0.02);
    const HermitianField g = sigma + complex_hessian(v, *m);
    const GridField tr = trace_sigma(v, sigma, *m);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      const double ratio = node::det(g.layout(), 2, g.at(i)) / node::det(sigma.layout(), 2, sigma.at(i));
      CHECK(tr[i] - 2.0 * std::sqrt(ratio) >= -1e-12);
    }
  }
}

TEST_CASE("equivalence constants") {
  auto m = torus(1, 128);
  const auto [a, b] = equivalence_constants(m->g0(), *m);
  CHECK(a == 1.0);
  CHECK(b == 1.0);
  const auto [c, d] = equivalence_constants(2.0 * m->g0(), *m);
  CHECK(c == 2.0);
  CHECK(d == 2.0);
  const HermitianField g = m->g0() + complex_hessian(cos_field(*m, 0.4), *m);
  const auto [lo, hi] = equivalence_constants(g, *m);
  const double h = m->grid()->spacing[0];
  CHECK(std::abs(lo - 0.9) < 0.1 * h * h / 12 * 1.01);
  CHECK(std::abs(hi - 1.1) < 0.1 * h * h / 12 * 1.01);
}

TEST_CASE("third-order quantity") {
  auto m = torus(1, 128);
  const HermitianField id = m->g0();
  CHECK(third_order_Q(m->zeros(), id, id, *m).max() == 0.0);

  const GridField v = cos_field(*m, 0.4);
  const HermitianField g = id + complex_hessian(v, *m);
  const GridField Q = third_order_Q(v, g, id, *m);
  const std::size_t quarter = node1(*m->grid(), 32);  // x = pi/2, where g = 1
  CHECK(Q[quarter] == doctest::Approx(0.0025).epsilon(2e-3));
  // Adding a constant to v changes nothing.
  CHECK((third_order_Q(v + GridField(m->grid(), 5.0), g, id, *m) - Q).max_abs() < 1e-9 * Q.max());

  // Constant complex Hessian: v = c |z|^2 = c e^s on the flat radial model.
  auto r = radial(2, 513, -2.0, 2.0);
  const GridField q = r->sample([](const double* s) { return 0.3 * std::exp(s[0]); });
  const HermitianField gr = r->g0() + complex_hessian(q, *r);
  const GridField Qr = third_order_Q(q, gr, r->g0(), *r);
  double interior = 0.0;
  for (std::size_t i = 2; i + 2 < Qr.size(); ++i) interior = std::max(interior, Qr[i]);
  CHECK(interior < 1e-8);

  // Christoffel terms of a varying torus background are rejected.
  auto bumped = torus(1, 32, [](const double* x) { return 0.4 * std::cos(x[0]); });
  CHECK_THROWS_AS(third_order_Q(bumped->zeros(), bumped->g0(), bumped->g0(), *bumped), InvalidArgument);
}

TEST_CASE("gradient of w") {
  auto m = torus(1, 128);
  const HermitianField id = m->g0();
  CHECK(grad_w_sq(GridField(m->grid(), 3.0), id, *m).max() == 0.0);
  const GridField w = sin_field(*m);
  const GridField G = grad_w_sq(w, id, *m);
  const double h = m->grid()->spacing[0];
  const double symbol = std::sin(h) / h;  // centered first difference of sin
  CHECK(G[0] == doctest::Approx(0.25 * symbol * symbol).epsilon(1e-13));
  CHECK(std::abs(G[0] - 0.25) < 0.25 * h * h / 3);
  CHECK((grad_w_sq(2.0 * w, id, *m) - 4.0 * G).max_abs() < 1e-15);
}

TEST_CASE("S quantity") {
  auto m = torus(1, 128);
  const HermitianField id = m->g0();
  CHECK(S_quantity(GridField(m->grid(), -1.0), id, *m).max() == 0.0);
  const GridField w = sin_field(*m);
  const GridField S = S_quantity(w, id, *m);
  const std::size_t quarter = node1(*m->grid(), 32);
  const double h = m->grid()->spacing[0];
  const double sym = second_difference_symbol(h);
  CHECK(S[quarter] == doctest::Approx(0.0625 * sym * sym).epsilon(1e-12));
  CHECK(std::abs(S[quarter] - 0.0625) < 0.0625 * h * h / 5);
  const GridField S3 = S_quantity(w, 3.0 * id, *m);
  for (std::size_t i = 0; i < S.size(); ++i) CHECK(S3[i] == doctest::Approx(S[i] / 9.0).epsilon(1e-14));
}

TEST_CASE("L^p diagnostics") {
  auto m = torus(1, 64);
  const HermitianField id = m->g0();
  const auto [e0, d0] = lp_diagnostics(m->zeros(), id, *m);
  CHECK(e0 == 0.0);
  CHECK(d0 == 0.0);
  const double c = 0.3;
  const auto [e, d] = lp_diagnostics(GridField(m->grid(), c), id, *m, 4, 1);
  CHECK(e == doctest::Approx(std::pow(c, 4) * 4 * kPi * kPi).epsilon(1e-13));
  CHECK(d == 0.0);
  CHECK_THROWS_AS(lp_diagnostics(m->zeros(), id, *m, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(lp_diagnostics(m->zeros(), id, *m, 4, 2), InvalidArgument);
}

TEST_CASE("ricci residual") {
  auto m = torus(1, 64);
  const PrescribedForm zero{HermitianField(m->grid()), "zero"};
  CHECK(ricci_residual(m->g0(), zero, *m) == 0.0);
  const HermitianField g1 = m->g0() + complex_hessian(cos_field(*m, 0.3), *m);
  const PrescribedForm target{ricci_form(g1, *m), "round trip"};
  CHECK(ricci_residual(g1, target, *m) < 1e-12);
  CHECK(ricci_residual(g1, zero, *m) > 1e-3);
}

TEST_CASE("heat residual") {
  auto m = torus(1, 32);
  const Problem flat = flat_problem(m);
  const FlowState s = make_state(flat, m->zeros(), 0.0);
  const FlowState a = step(s, flat, 0.01), b = step(a, flat, 0.01);
  CHECK(heat_residual({&s, &a, &b}, flat) == 0.0);
  CHECK_THROWS_AS(heat_residual({&s, &a}, flat), InvalidArgument);
}

TEST_CASE("heat residual refines with h -> h/2, dt -> dt/4") {
  SUBCASE("static background") {
    double prev = 0.0;
    for (int N : {32, 64}) {
      const Manufactured mf = manufactured(N, 0.1);
      const double dt = 0.004 * (32.0 / N) * (32.0 / N);
      const double r = heat_at(mf.problem, dt, 0.1);
      if (prev > 0.0) CHECK(prev / r >= 3.5);
      prev = r;
    }
  }
  SUBCASE("krf schedule") {
    double prev = 0.0;
    for (int N : {32, 64}) {
      auto m = torus(1, N, [](const double* x) { return 0.4 * std::cos(x[0]); });
      ScheduleParams sp;
      sp.horizon = 1.0;
      const Problem p = make_problem(m, make_schedule(ScheduleKind::krf_linear, *m, sp), Forcing::zero(*m));
      const double dt = 0.004 * (32.0 / N) * (32.0 / N);
      const double r = heat_at(p, dt, 0.1);
      if (prev > 0.0) CHECK(prev / r >= 3.5);
      prev = r;
    }
  }
}

TEST_CASE("holder seminorm") {
  auto seg = radial(2, 101, 0.0, 1.0);  // unit segment in s
  const GridField lin = seg->sample([](const double* s) { return s[0]; });
  CHECK(holder_seminorm({lin}, {0.0}, 0.5, HolderMode::elliptic) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(holder_seminorm({GridField(seg->grid(), 2.0)}, {0.0}, 0.5, HolderMode::elliptic) == 0.0);

  std::mt19937 rng(17);
  auto m = torus(1, 32);
  const GridField u = random_trig(*m, rng, 1.0);
  const GridField w = random_trig(*m, rng, 1.0);
  const double hu = holder_seminorm({u}, {0.0}, 0.5, HolderMode::elliptic);
  CHECK(holder_seminorm({u + GridField(m->grid(), 7.0)}, {0.0}, 0.5, HolderMode::elliptic) ==
        doctest::Approx(hu).epsilon(1e-13));
  const double hw = holder_seminorm({w}, {0.0}, 0.5, HolderMode::elliptic);
  CHECK(holder_seminorm({u + w}, {0.0}, 0.5, HolderMode::elliptic) <= hu + hw + 1e-14);

  // Parabolic pairs across time.
  const double hp = holder_seminorm({u, w}, {0.0, 0.25}, 0.5, HolderMode::parabolic);
  const double hpu = holder_seminorm({u, u + w}, {0.0, 0.25}, 0.5, HolderMode::parabolic);
  CHECK(hp >= hu);
  CHECK(hpu > 0.0);

  CHECK_THROWS_AS(holder_seminorm({}, {}, 0.5, HolderMode::elliptic), InvalidArgument);
  CHECK_THROWS_AS(holder_seminorm({u}, {0.0}, 1.5, HolderMode::elliptic), InvalidArgument);
}

TEST_CASE("inequality suite") {
  auto m = torus(1, 32);
  const Problem flat = flat_problem(m);
  RunOptions o;
  o.t_max = 1.0;
  const RunResult r = run(flat, m->zeros(), o);
  const SuiteResult s = inequality_suite(r.report, flat);
  CHECK(s.pass);
  CHECK(s.amgm_margin == 0.0);
  CHECK(s.equation_residual == 0.0);
  CHECK(*s.volume_defect == 0.0);
  CHECK(*s.monotone_excess == 0.0);

  const Manufactured mf = manufactured(32);
  o.t_max = 2.0;
  const RunResult rm = run(mf.problem, mf.model->zeros(), o);
  CHECK(inequality_suite(rm.report, mf.problem).pass);

  MonitorReport bad = rm.report;
  bad.records[3].trace_min = std::numeric_limits<double>::quiet_NaN();
  const SuiteResult sb = inequality_suite(bad, mf.problem);
  CHECK_FALSE(sb.pass);
  REQUIRE(sb.failures.size() == 1);
  CHECK(sb.failures[0].find("trace_min") != std::string::npos);
}

TEST_CASE("equation residual in log form equals sup|w|") {
  const Manufactured mf = manufactured(32);
  RunOptions o;
  o.t_max = 200.0;
  o.dt_safety = 0.5;
  const RunResult r = run(mf.problem, mf.model->zeros(), o);
  REQUIRE(r.status == RunStatus::converged);
  const FlowState& s = r.trajectory.terminal;
  GridField lhs = log_det(s.g);
  lhs -= mf.model->log_det_g0();
  lhs -= mf.f0;
  CHECK(std::abs(lhs.max_abs() - active_sup(s.w)) < 1e-12);
  CHECK(r.report.records.back().equation_residual < 1e-12);
}

TEST_CASE("laplacian inequality") {
  auto m = torus(1, 128);
  CHECK(laplacian_inequality_check(*m, m->zeros()) == 0.0);
  // A constant is the real part of a constant holomorphic function.
  CHECK(laplacian_inequality_check(*m, GridField(m->grid(), 2.0)) == 0.0);
  CHECK(laplacian_inequality_check(*m, cos_field(*m, 0.4)) >= -5e-3);
  auto bumped = torus(1, 32, [](const double* x) { return 0.4 * std::cos(x[0]); });
  CHECK_THROWS_AS(laplacian_inequality_check(*bumped, bumped->zeros()), InvalidArgument);
}

TEST_CASE("volume growth") {
  auto m = radial(2, 2048, -8.0, 4.0);
  const double target = kPi * kPi / 2;
  const VolumeGrowth v = volume_growth_check(*m, {0.1, 0.5, 1.0, 2.0, 5.0});
  CHECK(v.pass);
  CHECK(std::abs(v.c3 / target - 1.0) < 1e-2);
  const VolumeGrowth small = volume_growth_check(*m, {0.03});
  CHECK(std::abs(small.c3 / target - 1.0) < 2e-2);
  CHECK(volume_growth_check(*torus(1, 16), {1.0}).pass);
  CHECK_THROWS_AS(volume_growth_check(*m, {100.0}), InvalidArgument);
}

TEST_CASE("every quantity vanishes on the flat stationary state") {
  for (int n : {1, 2}) {
    auto m = torus(n, n == 1 ? 32 : 8);
    const Problem p = flat_problem(m);
    const MonitorRecord r = monitor_record(make_state(p, m->zeros(), 0.0), p);
    CHECK(r.sup_v == 0.0);
    CHECK(r.sup_w == 0.0);
    CHECK(*r.q_max == 0.0);
    CHECK(r.s_max == 0.0);
    CHECK(r.gradw_max == 0.0);
    CHECK(r.lp_energy == 0.0);
    CHECK(r.dissipation == 0.0);
    CHECK(r.ricci_residual == 0.0);
    CHECK(r.equation_residual == 0.0);
    CHECK(r.amgm_margin == 0.0);
    CHECK(*r.volume_defect == 0.0);
  }
}

TEST_CASE("records and realized constants") {
  const Manufactured mf = manufactured(32, 0.2);
  RunOptions o;
  o.t_max = 1.0;
  o.record_interval = 0.05;
  const RunResult r = run(mf.problem, mf.model->zeros(), o);
  double sup_w = 0.0, trace_max = 0.0, cmax = 0.0;
  for (const auto& rec : r.report.records) {
    CHECK(std::isfinite(rec.sup_v));
    CHECK(rec.equiv_cmin <= rec.equiv_cmax);
    CHECK(rec.s_max >= 0.0);
    CHECK(rec.gradw_max >= 0.0);
    CHECK(rec.lp_energy >= 0.0);
    CHECK(*rec.q_max >= 0.0);
    sup_w = std::max(sup_w, rec.sup_w);
    trace_max = std::max(trace_max, rec.trace_max);
    cmax = std::max(cmax, rec.equiv_cmax);
  }
  CHECK(r.report.realized.sup_w == sup_w);
  CHECK(r.report.realized.trace_max == trace_max);
  CHECK(r.report.realized.equiv_cmax == cmax);
  CHECK(r.report.records.size() == 21);
  CHECK(r.report.records[2].heat_residual.has_value());
  CHECK_FALSE(r.report.records[0].heat_residual.has_value());
}

TEST_CASE("holder seminorm tracked by run") {
  const Manufactured mf = manufactured(16);
  RunOptions o;
  o.t_max = 0.5;
  o.holder_every = 2;
  const RunResult r = run(mf.problem, mf.model->zeros(), o);
  CHECK_FALSE(r.report.records[0].holder_2a.has_value());
  CHECK(r.report.records[1].holder_2a.has_value());
  CHECK_FALSE(r.report.records[2].holder_2a.has_value());
  CHECK(r.report.records[3].holder_2a.has_value());
}

}  // TEST_SUITE
