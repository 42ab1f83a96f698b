// Serial reference vs OpenMP paths for the two data-parallel kernels: residual
// table construction (one saddle solve per cell) and the per-trial loop of an
// experiment. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "armcs/experiments.hpp"
#include "armcs/residual_table.hpp"

using namespace armcs;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_TableBuild(benchmark::State& state) {
  TableConfig c = TableConfig::standard(PriorKind::BernoulliGaussian, 0.8);
  c.p0_grid = p0_grid_down_to(0.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_table(c, exec_of(state)));
  }
  state.counters["cells"] =
      static_cast<double>(c.lambda_set.size() * c.p0_grid.size() * c.sigma2_grid.size());
  state.counters["threads"] = state.range(0) ? omp_get_max_threads() : 1;
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_NmseTrials(benchmark::State& state) {
  static const ResidualTable table = build_table(TableConfig::standard(PriorKind::BernoulliGaussian, 0.8));
  ExperimentSpec s;
  s.kind = ExperimentKind::Nmse;
  s.n = 200;
  s.m = 160;
  s.p0 = 0.9;
  s.sigma2 = {1e-3};
  s.trials = 16;
  s.exec = exec_of(state);
  s.methods = {Method::parse("arm"), Method::parse("scaled_residual:0.1")};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_nmse(s, &table));
  }
  state.counters["threads"] = state.range(0) ? omp_get_max_threads() : 1;
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_TableBuild)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NmseTrials)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
