#include <benchmark/benchmark.h>

#include "lislab/common.hpp"
#include "lislab/distributions.hpp"
#include "lislab/hammersley.hpp"
#include "lislab/lis.hpp"

using namespace lislab;

static void BM_SampleField(benchmark::State& state) {
    DiscretePmf d = DiscretePmf::geometric(0.5);
    double t = static_cast<double>(state.range(0));
    Rng rng(11);
    for (auto _ : state) benchmark::DoNotOptimize(sample_field(d, t, rng).total_points());
}
BENCHMARK(BM_SampleField)->Arg(100)->Arg(10000)->Arg(1000000);

static void BM_RunPlain(benchmark::State& state) {
    DiscretePmf d = DiscretePmf::geometric(0.5);
    double t = static_cast<double>(state.range(0));
    Rng rng(11);
    PoissonField f = sample_field(d, t, rng);
    for (auto _ : state) benchmark::DoNotOptimize(run_plain(f));
}
BENCHMARK(BM_RunPlain)->Arg(100)->Arg(10000)->Arg(1000000);

static void BM_LisPlanar(benchmark::State& state) {
    DiscretePmf d = DiscretePmf::geometric(0.5);
    double t = static_cast<double>(state.range(0));
    Rng rng(11);
    auto pts = sample_field(d, t, rng).planar_points();
    for (auto _ : state) benchmark::DoNotOptimize(lis_planar(pts));
}
BENCHMARK(BM_LisPlanar)->Arg(100)->Arg(10000)->Arg(1000000);

static void BM_RunCoupled(benchmark::State& state) {
    DiscretePmf d = DiscretePmf::geometric(0.5);
    double t = static_cast<double>(state.range(0));
    std::uint64_t seed = 11;
    for (auto _ : state) benchmark::DoNotOptimize(run_coupled(d, t, 0.5, seed++).lis);
}
BENCHMARK(BM_RunCoupled)->Arg(100)->Arg(10000)->Arg(1000000);

BENCHMARK_MAIN();
