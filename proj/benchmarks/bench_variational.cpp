#include <benchmark/benchmark.h>

#include "lislab/distributions.hpp"
#include "lislab/variational.hpp"

using namespace lislab;

static DiscretePmf family(int which) {
    switch (which) {
        case 0: return DiscretePmf::geometric(0.5);
        case 1: return DiscretePmf::poisson(1);
        case 2: return DiscretePmf::power_log(2.2, 0);
        default: return DiscretePmf::borderline_power_log(-3);
    }
}

static void BM_SolveF(benchmark::State& state) {
    DiscretePmf d = family(static_cast<int>(state.range(0)));
    double t = static_cast<double>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(solve_f(d, t).value);
}
BENCHMARK(BM_SolveF)->ArgsProduct({{0, 1, 2, 3}, {100, 1000000}});

static void BM_SolveW(benchmark::State& state) {
    DiscretePmf d = family(static_cast<int>(state.range(0)));
    double t = static_cast<double>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(solve_w(d, t).value);
}
BENCHMARK(BM_SolveW)->ArgsProduct({{0, 1, 2, 3}, {100, 1000000}});

static void BM_SolveR(benchmark::State& state) {
    DiscretePmf d = family(static_cast<int>(state.range(0)));
    double n = static_cast<double>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(solve_r(d, n));
}
BENCHMARK(BM_SolveR)->ArgsProduct({{0, 1, 2, 3}, {100, 1000000}});

static void BM_SolveMuNu(benchmark::State& state) {
    DiscretePmf d = family(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_mu(d, 1e6).value);
        benchmark::DoNotOptimize(solve_nu(d, 1e6).value);
    }
}
BENCHMARK(BM_SolveMuNu)->Arg(0)->Arg(1)->Arg(2)->Arg(3);

BENCHMARK_MAIN();
