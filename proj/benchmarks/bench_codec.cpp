#include <benchmark/benchmark.h>

#include <string>

#include "airq/mqtt/codec.hpp"

namespace mq = airq::mqtt;

static void BM_EncodePublish(benchmark::State& state) {
  mq::Publish p;
  p.topic = "workshop/bench-01/reading";
  p.qos = 1;
  p.packet_id = 7;
  p.payload = std::string(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(mq::encode(p));
}
BENCHMARK(BM_EncodePublish)->Arg(128)->Arg(4096);

static void BM_DecodeStream(benchmark::State& state) {
  mq::Publish p;
  p.topic = "workshop/bench-01/reading";
  p.payload = std::string(128, 'x');
  std::string wire;
  for (int i = 0; i < 100; ++i) wire += mq::encode(p);
  for (auto _ : state) {
    mq::Decoder d;
    d.feed(wire);
    int n = 0;
    while (d.next()) ++n;
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_DecodeStream);

static void BM_TopicMatch(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mq::topic_matches("workshop/+/reading", "workshop/bench-01/reading"));
}
BENCHMARK(BM_TopicMatch);

BENCHMARK_MAIN();
