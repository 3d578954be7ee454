#include <benchmark/benchmark.h>

#include "airq/ingest/feed_store.hpp"
#include "airq/ingest/ingestor.hpp"
#include "airq/sim/payload.hpp"

using namespace airq::ingest;

namespace {

FeedEntry entry(std::int64_t i) {
  FeedEntry e;
  e.ts = airq::from_epoch_ms(i * 10'000);
  e.device_id = "bench-01";
  e.values = {21.0, 40.0, 500.0};
  return e;
}

}  // namespace

static void BM_StoreAppend(benchmark::State& state) {
  FeedStore store;
  store.add_channel(device_channel("bench-01"));
  std::int64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(store.append("bench-01", entry(i++)));
}
BENCHMARK(BM_StoreAppend);

static void BM_StoreQuery(benchmark::State& state) {
  FeedStore store;
  store.add_channel(device_channel("bench-01"));
  for (std::int64_t i = 0; i < state.range(0); ++i) store.append("bench-01", entry(i));
  FeedQuery q;
  q.channel_id = "bench-01";
  q.aggregation = state.range(1) ? Aggregation::kHourlyMean : Aggregation::kNone;
  for (auto _ : state) benchmark::DoNotOptimize(store.query(q));
}
BENCHMARK(BM_StoreQuery)->Args({10000, 0})->Args({10000, 1});

static void BM_HandleMessage(benchmark::State& state) {
  FeedStore store;
  store.add_channel(device_channel("bench-01"));
  Ingestor ingestor(store, {});
  airq::sim::WirePayload p;
  p.device_id = "bench-01";
  p.temperature_c = 22;
  p.humidity_pct = 41;
  p.mq135_adc = 512;
  std::int64_t i = 0;
  for (auto _ : state) {
    state.PauseTiming();
    p.ts = airq::from_epoch_ms(i++ * 1000);
    const auto bytes = airq::sim::serialize(p);
    state.ResumeTiming();
    benchmark::DoNotOptimize(ingestor.handle_message("workshop/bench-01/reading", bytes));
  }
}
BENCHMARK(BM_HandleMessage);

BENCHMARK_MAIN();
