// OpenMP trial loop against the serial reference.

#include <benchmark/benchmark.h>

#include "initprop/activations.hpp"
#include "initprop/simulator.hpp"

namespace {

initprop::SimConfig config(int width) {
  initprop::SimConfig c;
  c.width = width;
  c.depth = 10;
  c.weights = initprop::WeightDistribution::gaussian_with_variance(2.0 / width);
  c.activation = initprop::builtin("relu");
  c.trials = 16;
  c.seed = 1;
  return c;
}

void BM_RunParallel(benchmark::State& state) {
  const auto c = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(initprop::run(c));
}

void BM_RunSerial(benchmark::State& state) {
  const auto c = config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(initprop::run_serial(c));
}

}  // namespace

BENCHMARK(BM_RunParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
