// Serial reference loop against the OpenMP trial loop on the same batches.

#include "csd/sim.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

csd::ExperimentSpec structured_spec(int trials) {
    csd::ExperimentSpec spec;
    spec.model.type = csd::ModelType::structured;
    spec.model.n = 100;
    spec.model.rho2_spec.assign(50, 1.0);
    spec.design.m1 = 2;
    spec.design.m2 = 2;
    const std::vector<double> snr = {0.0};
    spec.grid = csd::snr_grid(snr, 1.0);
    spec.nb = 5;
    spec.pfa_targets = {0.05};
    spec.trials = trials;
    spec.h_regeneration = csd::HRegeneration::fixed;
    spec.master_seed = 1;
    return spec;
}

csd::ExperimentSpec random_spec(int trials) {
    csd::ExperimentSpec spec = structured_spec(trials);
    spec.model.type = csd::ModelType::random;
    spec.model.k = 10;
    spec.model.rho2_spec.clear();
    spec.h_regeneration = csd::HRegeneration::per_trial;
    return spec;
}

void run(benchmark::State& state, const csd::ExperimentSpec& spec, csd::Execution exec) {
    for (auto _ : state) {
        auto stats = csd::simulate_statistics(spec, 0, csd::Hypothesis::h1, exec);
        benchmark::DoNotOptimize(stats.data());
    }
    state.SetItemsProcessed(state.iterations() * spec.trials);
}

void BM_FixedSerial(benchmark::State& state) {
    run(state, structured_spec(static_cast<int>(state.range(0))), csd::Execution::serial);
}
void BM_FixedParallel(benchmark::State& state) {
    run(state, structured_spec(static_cast<int>(state.range(0))), csd::Execution::parallel);
}
void BM_RegeneratedSerial(benchmark::State& state) {
    run(state, random_spec(static_cast<int>(state.range(0))), csd::Execution::serial);
}
void BM_RegeneratedParallel(benchmark::State& state) {
    run(state, random_spec(static_cast<int>(state.range(0))), csd::Execution::parallel);
}

BENCHMARK(BM_FixedSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixedParallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegeneratedSerial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegeneratedParallel)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
