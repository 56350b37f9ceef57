#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "kflow/run.hpp"

using namespace kflow;

namespace {

std::shared_ptr<const ModelGeometry> torus(int n) {
  return std::make_shared<const ModelGeometry>(ModelGeometry::torus(1, n));
}

Problem manufactured(const std::shared_ptr<const ModelGeometry>& m) {
  const GridField phi = m->sample([](const double* x) { return 0.1 * std::cos(x[0]); });
  GridField f0 = log_det(m->g0() + complex_hessian(phi, *m));
  f0 -= m->log_det_g0();
  return make_problem(m, make_schedule(ScheduleKind::constant, *m), Forcing::fixed(f0));
}

void BM_ComplexHessian(benchmark::State& state) {
  auto m = torus(static_cast<int>(state.range(0)));
  const GridField u = m->sample([](const double* x) { return 0.4 * std::cos(x[0]) * std::sin(x[1]); });
  for (auto _ : state) benchmark::DoNotOptimize(complex_hessian(u, *m));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(u.size()));
}
BENCHMARK(BM_ComplexHessian)->Arg(64)->Arg(128)->Arg(256);

void BM_MaRhs(benchmark::State& state) {
  auto m = torus(static_cast<int>(state.range(0)));
  const Problem p = manufactured(m);
  const GridField v = m->zeros();
  for (auto _ : state) benchmark::DoNotOptimize(ma_rhs(v, 0.0, p));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(v.size()));
}
BENCHMARK(BM_MaRhs)->Arg(64)->Arg(128)->Arg(256);

void BM_ExplicitStep(benchmark::State& state) {
  auto m = torus(static_cast<int>(state.range(0)));
  const Problem p = manufactured(m);
  const FlowState s = make_state(p, m->zeros(), 0.0);
  const double dt = stable_dt(s);
  for (auto _ : state) benchmark::DoNotOptimize(step(s, p, dt));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.v.size()));
}
BENCHMARK(BM_ExplicitStep)->Arg(64)->Arg(128)->Arg(256);

void BM_ImplicitStep(benchmark::State& state) {
  auto m = std::make_shared<const ModelGeometry>(
      ModelGeometry::radial(2, static_cast<int>(state.range(0)), -8.0, 10.0));
  const Problem p = make_problem(m, make_schedule(ScheduleKind::constant, *m), forcing_profile(0.2, 1.0, *m));
  const FlowState s = make_state(p, m->zeros(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(implicit_step(s, p, 1e-2));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.v.size()));
}
BENCHMARK(BM_ImplicitStep)->Arg(512)->Arg(2048)->Arg(8192);

void BM_Holder2a(benchmark::State& state) {
  auto m = torus(static_cast<int>(state.range(0)));
  const Problem p = manufactured(m);
  const FlowState a = make_state(p, m->zeros(), 0.0);
  const FlowState b = step(a, p, stable_dt(a));
  for (auto _ : state) benchmark::DoNotOptimize(holder_2a(a, b, *m, 0.5));
}
BENCHMARK(BM_Holder2a)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
