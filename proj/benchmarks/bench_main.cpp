#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cli.hpp"
#include "indep/hashing.hpp"
#include "indep/pipeline.hpp"
#include "indep/sketch_engine.hpp"
#include "indep/stream_core.hpp"

namespace {

using namespace indep;

TupleStream mixture(std::size_t k, std::size_t n, std::uint64_t m) {
  return cli::generate_synthetic(cli::parse_synthetic("mixture(0.5)"), k, n, m, 1);
}

void BM_PairwiseZeroOne(benchmark::State& state) {
  const std::size_t n = 1 << 16;
  const auto family = PairwiseHashFamily::zero_one(7, n, 0.5);
  std::size_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(family.eval_zero_one(i));
    i = i % n + 1;
  }
}
BENCHMARK(BM_PairwiseZeroOne);

void BM_EngineUpdate(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 8;
  const auto stream = mixture(k, n, 1024);
  SketchEngine engine = make_pipeline_engine(StreamShape{k, n}, 600, 48, 3, 0.0, std::uint64_t{1} << 26);
  std::vector<std::uint32_t> tuple(k);
  std::size_t row = 0;
  for (auto _ : state) {
    for (std::size_t j = 0; j < k; ++j) tuple[j] = stream[row][j];
    engine.update(tuple);
    row = (row + 1) % stream.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EngineUpdate)->Arg(2)->Arg(3);

void BM_ExactDistance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto table = build_frequency_table(mixture(2, n, 4096));
  for (auto _ : state) benchmark::DoNotOptimize(exact_statistical_distance(table));
}
BENCHMARK(BM_ExactDistance)->Arg(4)->Arg(16)->Arg(64);

void BM_Pipeline(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto stream = mixture(k, n, 2000);
  const PipelineConfig cfg;
  for (auto _ : state) {
    auto src = stream.source();
    benchmark::DoNotOptimize(independence_distance(src, cfg, 5).distance_estimate);
  }
}
BENCHMARK(BM_Pipeline)->Args({2, 8})->Args({2, 32})->Args({3, 8})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
