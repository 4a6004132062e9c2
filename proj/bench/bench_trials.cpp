// Serial reference vs OpenMP trial execution, plus the per-step kernels.

#include <benchmark/benchmark.h>

#include "coja/harness.hpp"

namespace {

coja::ExperimentConfig bench_config(long iters, int trials) {
  coja::ExperimentConfig cfg;
  cfg.iters = iters;
  cfg.trials = trials;
  cfg.base_seed = 1;
  return cfg;
}

void BM_TrialsSerial(benchmark::State& state) {
  const auto cfg = bench_config(state.range(0), 20);
  for (auto _ : state) benchmark::DoNotOptimize(coja::run_trials_serial(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.iters * cfg.trials);
}

void BM_TrialsParallel(benchmark::State& state) {
  const auto cfg = bench_config(state.range(0), 20);
  for (auto _ : state) benchmark::DoNotOptimize(coja::run_trials(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.iters * cfg.trials);
}

void BM_AdaptiveStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto cov = coja::make_covariance(d, 2.0, 1.0);
  coja::Rng rng = coja::make_rng(5);
  coja::TrackerState s{coja::sample_sphere(d, rng), 0};
  for (auto _ : state) {
    const auto v = coja::sample_data(cov, rng);
    const auto b = coja::sample_orthogonal(s.estimate, rng);
    s = coja::adaptive_step(s, coja::compress(s.estimate, b, v), 1e-3);
  }
  benchmark::DoNotOptimize(s.estimate.coords().data());
}

void BM_FullStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto cov = coja::make_covariance(d, 2.0, 1.0);
  coja::Rng rng = coja::make_rng(5);
  coja::TrackerState s{coja::sample_sphere(d, rng), 0};
  for (auto _ : state) s = coja::full_step(s, coja::sample_data(cov, rng), 1e-3);
  benchmark::DoNotOptimize(s.estimate.coords().data());
}

}  // namespace

BENCHMARK(BM_TrialsSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AdaptiveStep)->Arg(10)->Arg(100);
BENCHMARK(BM_FullStep)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
