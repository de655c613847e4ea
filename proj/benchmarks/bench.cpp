#include <benchmark/benchmark.h>

#include "bcsec/coding_sim.hpp"
#include "bcsec/geometry.hpp"
#include "bcsec/rate_algebra.hpp"
#include "bcsec/sampling.hpp"

using namespace bcsec;

static void BM_FmEliminate(benchmark::State& state, const char* name) {
    const auto sys = preset_system(name);
    for (auto _ : state) {
        auto out = fm_eliminate(sys);
        benchmark::DoNotOptimize(out.constraints.data());
    }
}
BENCHMARK_CAPTURE(BM_FmEliminate, old, "SYS-OLD")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FmEliminate, new1, "SYS-NEW1")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FmEliminate, new2, "SYS-NEW2")->Unit(benchmark::kMillisecond);

static void BM_CondMutualInfo(benchmark::State& state) {
    Rng rng(1);
    const auto j = random_joint(rng, std::size_t(state.range(0)), std::size_t(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(j.cond_mutual_info({Var::V, Var::V1}, {Var::Y1}, {Var::U}));
    state.counters["entries"] = double(j.pmf().size());
}
BENCHMARK(BM_CondMutualInfo)->Arg(2)->Arg(3);

static void BM_InstantiateRegion(benchmark::State& state) {
    Rng rng(2);
    const auto j = gated_joint(rng);
    const auto sys = fm_eliminate(preset_system("SYS-NEW2"));
    for (auto _ : state) {
        auto r = instantiate_region(sys, j);
        benchmark::DoNotOptimize(r.vertices.data());
    }
}
BENCHMARK(BM_InstantiateRegion);

static void BM_EquivCheck(benchmark::State& state) {
    const auto a = fm_eliminate(preset_system("SYS-OLD"));
    const auto b = preset_system("REG-OLD");
    EquivOptions o;
    o.binary_samples = std::size_t(state.range(0));
    o.ternary_samples = 0;
    for (auto _ : state) benchmark::DoNotOptimize(equiv_check(a, b, o).verdict);
}
BENCHMARK(BM_EquivCheck)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_ExactLeakage(benchmark::State& state) {
    Rng rng(3);
    const auto j = random_joint(rng, 2, 2);
    SchemeConfig c;
    c.n = std::size_t(state.range(0));
    c.sizes.Na = 2;
    c.sizes.N1c = 2;
    c.sizes.N1d = 2;
    c.sizes.NL1 = 2;
    const auto cb = generate_codebooks(c, j, 4);
    for (auto _ : state) benchmark::DoNotOptimize(exact_leakage(cb, c, j.channel(), 1));
}
BENCHMARK(BM_ExactLeakage)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Experiment(benchmark::State& state) {
    Rng rng(5);
    const auto j = random_joint(rng, 2, 2);
    SchemeConfig c;
    c.n = 8;
    c.sizes.Na = 2;
    c.sizes.N1c = 2;
    c.sizes.N2d = 2;
    const ExperimentOptions o{2, 100, true, false};
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, j, o).errors);
}
BENCHMARK(BM_Experiment)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
