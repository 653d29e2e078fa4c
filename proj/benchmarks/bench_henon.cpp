#include <benchmark/benchmark.h>

#include "henon/cantor.hpp"
#include "henon/census.hpp"
#include "henon/manifold.hpp"
#include "henon/renorm.hpp"
#include "henon/tangency.hpp"

using namespace henon;

static void BM_Iterate(benchmark::State& st) {
  const Params p{-1.4, -0.3};
  PlanePoint z{0.1, 0.1};
  for (auto _ : st) {
    for (int i = 0; i < 1000; ++i) z = apply(p, z);
    benchmark::DoNotOptimize(z);
  }
  st.SetItemsProcessed(st.iterations() * 1000);
}
BENCHMARK(BM_Iterate);

static void BM_FixedPoints(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(fixed_points({-2.0, 0.05}));
}
BENCHMARK(BM_FixedPoints);

static void BM_LocalChart(benchmark::State& st) {
  for (auto _ : st) {
    benchmark::DoNotOptimize(local_manifold_chart({-2.0, 0.05}, ManifoldKind::unstable, static_cast<int>(st.range(0))));
  }
}
BENCHMARK(BM_LocalChart)->Arg(6)->Arg(12);

static void BM_SplitFunction(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(split_function_H({-2.1, 0.05}));
}
BENCHMARK(BM_SplitFunction)->Unit(benchmark::kMillisecond);

static void BM_SolveTangency(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(solve_tangency(0.05, -2.0));
}
BENCHMARK(BM_SolveTangency)->Unit(benchmark::kMillisecond);

static void BM_Thickness(benchmark::State& st) {
  const auto k = middle_third(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(thickness(k));
  st.SetComplexityN(static_cast<long>(k.size()));
}
BENCHMARK(BM_Thickness)->DenseRange(8, 16, 4)->Complexity(benchmark::oN);

static void BM_Lyapunov(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(lyapunov_exponent({-1.4, -0.3}, {0.1, 0.1}, 1000, 100000));
}
BENCHMARK(BM_Lyapunov)->Unit(benchmark::kMillisecond);

static void BM_PeriodicOrbits(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(find_periodic_orbits({-1.4, -0.3}, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_PeriodicOrbits)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_SweepPoint(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(sink_census_sweep(-0.3, {-1.25, -1.25}, 1, 16));
}
BENCHMARK(BM_SweepPoint)->Unit(benchmark::kMillisecond);

static void BM_BuildFrame(benchmark::State& st) {
  const auto rec = solve_tangency(0.05, -2.0);
  for (auto _ : st) benchmark::DoNotOptimize(build_frame(rec, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_BuildFrame)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
