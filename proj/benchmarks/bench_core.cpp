#include "freqctl/scenario.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace freqctl;

namespace {

const std::string dir = FREQCTL_SCENARIO_DIR;

Scenario shortened(const std::string& name, const std::string& t_end) {
    return load_scenario(dir + "/" + name + ".cfg", {"sim.t_end=" + t_end, "sim.record_every=1000"});
}

void BM_Rhs(benchmark::State& state, const char* name) {
    auto sim = make_simulator(shortened(name, "0.01"));
    sim.run();  // fills the histories rhs reads from
    const Vector x = sim.equilibrium().state;
    for (auto _ : state) benchmark::DoNotOptimize(sim.rhs(0.005, x));
}

void BM_Run(benchmark::State& state, const char* name) {
    const auto s = shortened(name, "10");
    for (auto _ : state) {
        auto sim = make_simulator(s);
        benchmark::DoNotOptimize(sim.run().terminal_state);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(10.0 / s.sim.h));
}

void BM_Oracle(benchmark::State& state, const char* name) {
    auto sim = make_simulator(load_scenario(dir + "/" + name + ".cfg"));
    for (auto _ : state) benchmark::DoNotOptimize(sim.oracle());
}

void BM_Equilibrium(benchmark::State& state) {
    auto sim = make_simulator(load_scenario(dir + "/fivebus_tieline.cfg"));
    for (auto _ : state) benchmark::DoNotOptimize(sim.equilibrium().state);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Rhs, reform, "fivebus_reform_delay");
BENCHMARK_CAPTURE(BM_Rhs, scatter, "fivebus_scatter_delay");
BENCHMARK_CAPTURE(BM_Rhs, tieline, "fivebus_tieline");
BENCHMARK_CAPTURE(BM_Run, scatter, "fivebus_scatter_delay")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, observer, "fivebus_observer")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Oracle, ogr, "fivebus_table2");
BENCHMARK_CAPTURE(BM_Oracle, ogr3, "fivebus_bounds");
BENCHMARK_CAPTURE(BM_Oracle, ogr2, "fivebus_tieline");
BENCHMARK(BM_Equilibrium);

BENCHMARK_MAIN();
