#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "airq/analytics/decision_tree.hpp"
#include "airq/analytics/regression.hpp"
#include "airq/analytics/svm.hpp"

namespace an = airq::analytics;
using airq::salubrity::Label;

namespace {

std::vector<an::Sample2D> workshop_samples(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> t(22, 4), h(45, 12);
  std::vector<an::Sample2D> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({t(rng), h(rng), std::nullopt});
  return an::label_by_salubrity(s, {}, 50);
}

}  // namespace

static void BM_LinearRegression(benchmark::State& state) {
  const auto s = workshop_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(an::fit_linear_regression(s));
}
BENCHMARK(BM_LinearRegression)->Arg(100)->Arg(10000);

static void BM_DecisionTree(benchmark::State& state) {
  const auto s = workshop_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(an::fit_decision_tree(s));
}
BENCHMARK(BM_DecisionTree)->Arg(100)->Arg(1000);

static void BM_SvmFit(benchmark::State& state) {
  const auto s = workshop_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(an::fit_svm(s));
}
BENCHMARK(BM_SvmFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
