// Serial reference vs OpenMP ensemble kernel on the same replica workload.

#include <benchmark/benchmark.h>

#include "ssep/ensemble.hpp"

namespace {

ssep::EnsembleSpec workload(std::int64_t replicas) {
    ssep::EnsembleSpec spec;
    spec.rho = 0.5;
    spec.times = {100.0, 400.0};
    spec.L = ssep::ring_half_width_for(400.0);
    spec.base_seed = 7;
    spec.replicas = replicas;
    return spec;
}

void BM_EnsembleSerial(benchmark::State& state) {
    const auto spec = workload(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ssep::simulate_ensemble_serial(spec));
    state.counters["events/s"] = benchmark::Counter(
        static_cast<double>(spec.replicas) * spec.L * spec.times.back(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_EnsembleParallel(benchmark::State& state) {
    const auto spec = workload(state.range(0));
    const int threads = ssep::resolve_threads(0);
    for (auto _ : state) benchmark::DoNotOptimize(ssep::simulate_ensemble_parallel(spec, threads));
    state.counters["threads"] = threads;
    state.counters["events/s"] = benchmark::Counter(
        static_cast<double>(spec.replicas) * spec.L * spec.times.back(), benchmark::Counter::kIsIterationInvariantRate);
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
