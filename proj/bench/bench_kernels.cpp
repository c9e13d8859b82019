// Parallel kernels against their serial reference paths.

#include <benchmark/benchmark.h>

#include "rnnq/oracle.hpp"
#include "rnnq/parallel.hpp"
#include "rnnq/rnn_index.hpp"

using namespace rnnq;

namespace {

PointSet make_points(std::size_t n, int d) {
    return normalize(d, corpus::generate(corpus::Distribution::Uniform, n, d, 1)).first;
}

void BM_AllNN_Serial(benchmark::State& state) {
    const PointSet pts = make_points(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(all_nearest_neighbors_serial(pts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AllNN_Parallel(benchmark::State& state) {
    const PointSet pts = make_points(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(all_nearest_neighbors(pts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct QueryFixture {
    RnnIndex index;
    std::vector<double> queries;

    explicit QueryFixture(std::size_t n) {
        index = RnnIndex::build(2, corpus::generate(corpus::Distribution::Uniform, n, 2, 1));
        corpus::Rng rng(2);
        queries.resize(2 * 20000);
        for (double& v : queries) v = rng.uniform(0.0, 1000.0);
    }
};

void BM_QueryBatch_Serial(benchmark::State& state) {
    const QueryFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(query_batch_serial(f.index, f.queries));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.size() / 2));
}

void BM_QueryBatch_Parallel(benchmark::State& state) {
    const QueryFixture f(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(query_batch(f.index, f.queries));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.queries.size() / 2));
}

void BM_Build(benchmark::State& state) {
    const auto raw = corpus::generate(corpus::Distribution::Uniform, static_cast<std::size_t>(state.range(0)), 2, 1);
    for (auto _ : state) benchmark::DoNotOptimize(RnnIndex::build(2, raw));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_AllNN_Serial)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllNN_Parallel)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QueryBatch_Serial)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QueryBatch_Parallel)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Build)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    configure_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
