#include <benchmark/benchmark.h>

#include <vector>

#include "lislab/common.hpp"
#include "lislab/distributions.hpp"
#include "lislab/lis.hpp"

using namespace lislab;

static std::vector<double> draw(std::size_t n, std::uint64_t seed) {
    return DiscretePmf::geometric(0.5).sample(n, seed);
}

static void BM_LisStrict(benchmark::State& state) {
    std::vector<double> s = draw(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(lis_strict(s));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LisStrict)->Range(1 << 10, 1 << 20)->Complexity(benchmark::oNLogN);

static void BM_LisOracle(benchmark::State& state) {
    std::vector<double> s = draw(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(lis_oracle(s));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LisOracle)->Range(1 << 6, 1 << 12)->Complexity(benchmark::oNSquared);

static void BM_GreedySubsequence(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    DiscretePmf d = DiscretePmf::geometric(0.5);
    std::vector<double> s = d.sample(n, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(greedy_subsequence(d, s, static_cast<long long>(n)).count);
}
BENCHMARK(BM_GreedySubsequence)->Range(1 << 10, 1 << 20);

static void BM_DistinctCount(benchmark::State& state) {
    std::vector<double> s = draw(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(distinct_count(s));
}
BENCHMARK(BM_DistinctCount)->Range(1 << 10, 1 << 20);

BENCHMARK_MAIN();
