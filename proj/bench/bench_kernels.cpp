// Serial reference path against the OpenMP agent loop on the same scenarios.
#include "forwardstep/config.hpp"
#include "forwardstep/sim.hpp"

#include <benchmark/benchmark.h>

#include <string>

namespace {

fstep::ScenarioConfig load(const std::string& name) {
    return fstep::load_config_file(std::string(FSTEP_SCENARIO_DIR) + "/" + name + ".yaml",
                                   {"integrator.horizon=2", "integrator.stride=1000"})
        .config;
}

void run_scenario(benchmark::State& state, const std::string& name, fstep::ExecPolicy policy) {
    const auto c = load(name);
    for (auto _ : state) {
        auto r = fstep::run(c, policy);
        benchmark::DoNotOptimize(r.metrics);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(c.integrator.horizon / c.integrator.step));
}

}  // namespace

#define FSTEP_BENCH(name)                                                                         \
    BENCHMARK_CAPTURE(run_scenario, name##_serial, #name, fstep::ExecPolicy::Serial)              \
        ->Unit(benchmark::kMillisecond);                                                          \
    BENCHMARK_CAPTURE(run_scenario, name##_parallel, #name, fstep::ExecPolicy::Parallel)          \
        ->Unit(benchmark::kMillisecond);

FSTEP_BENCH(theorem1_consensus)
FSTEP_BENCH(theorem2_switching)
FSTEP_BENCH(theorem4_tpv)
FSTEP_BENCH(theorem8_tracking)

BENCHMARK_MAIN();
