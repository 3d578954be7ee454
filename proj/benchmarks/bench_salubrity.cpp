#include <benchmark/benchmark.h>

#include "airq/salubrity.hpp"

namespace sal = airq::salubrity;

static void BM_Salubrity(benchmark::State& state) {
  const sal::SalubrityConfig cfg;
  double t = 15.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sal::salubrity(t, 55.0, cfg));
    t += 1e-6;
  }
}
BENCHMARK(BM_Salubrity);

static void BM_SurfaceGrid(benchmark::State& state) {
  const sal::SalubrityConfig cfg;
  const auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sal::surface_grid(cfg, 10, 35, 20, 90, steps));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(steps * steps));
}
BENCHMARK(BM_SurfaceGrid)->Arg(25)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
