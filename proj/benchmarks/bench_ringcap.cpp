#include <benchmark/benchmark.h>

#include "ringcap/dimension.hpp"
#include "ringcap/numeric.hpp"
#include "ringcap/profiles.hpp"
#include "ringcap/solver.hpp"

using namespace ringcap;

static void BM_GridBuild(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_euclidean_grid(2, 1.0, h, 1.0).size());
}
BENCHMARK(BM_GridBuild)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_RingSolve(benchmark::State& state) {
  const double p0 = static_cast<double>(state.range(0));
  const double h = 1.0 / static_cast<double>(state.range(1));
  const auto s = build_euclidean_grid(2, 1.0, h, 0.0);
  const NodeId o = s.nearest_node(std::vector<double>{0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(relative_capacity(s, o, 0.1, 0.8, p0).value);
  state.counters["nodes"] = static_cast<double>(s.size());
}
BENCHMARK(BM_RingSolve)->Args({2, 50})->Args({2, 100})->Args({4, 50})->Args({4, 100})->Unit(benchmark::kMillisecond);

static void BM_Radialize(benchmark::State& state) {
  const auto s = build_euclidean_grid(2, 1.0, 0.005, 0.0);
  const NodeId o = s.nearest_node(std::vector<double>{0.0, 0.0});
  const auto prof = log_profile(0.05, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(radialize(s, o, prof, 2.0).energy_edge);
}
BENCHMARK(BM_Radialize)->Unit(benchmark::kMillisecond);

static void BM_PointwiseDimension(benchmark::State& state) {
  const auto s = build_euclidean_grid(2, 1.0, 0.005, 1.0);
  const NodeId o = s.nearest_node(std::vector<double>{0.0, 0.0});
  const auto radii = log_spaced(0.025, 0.5, 8);
  for (auto _ : state) benchmark::DoNotOptimize(pointwise_dimension(s, o, radii).Qx);
}
BENCHMARK(BM_PointwiseDimension)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
