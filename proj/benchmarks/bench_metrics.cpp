#include "synthscreen/bootstrap.hpp"
#include "synthscreen/embed_metrics.hpp"
#include "synthscreen/fixture.hpp"
#include "synthscreen/object_metrics.hpp"

#include <benchmark/benchmark.h>

using namespace synthscreen;

namespace {

// N x 64 clouds; the synthetic one is shifted by half a unit.
std::pair<Matrix, Matrix> clouds(std::int64_t n) {
    auto [r, s] = make_fixture(3, static_cast<std::size_t>(n), static_cast<std::size_t>(n), 64, 0.5);
    return {r.data(), s.data()};
}

void BM_Frechet(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(r, s));
}
BENCHMARK(BM_Frechet)->Arg(150)->Arg(500);

void BM_FrechetInf(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(frechet_distance_inf(r, s, 1));
}
BENCHMARK(BM_FrechetInf)->Arg(150);

void BM_KernelDistance(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernel_distance(r, s));
}
BENCHMARK(BM_KernelDistance)->Arg(150)->Arg(500);

void BM_PrecisionRecall(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(precision_recall(r, s));
}
BENCHMARK(BM_PrecisionRecall)->Arg(150)->Arg(500);

void BM_Fls(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fls_scores(r, s, 1));
}
BENCHMARK(BM_Fls)->Arg(150);

void BM_GlobalMetrics(benchmark::State& state) {
    const auto [r, s] = clouds(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(global_metrics(r, s, Encoder::dino, 1));
}
BENCHMARK(BM_GlobalMetrics)->Arg(179)->Unit(benchmark::kMillisecond);

void BM_ObjectMetrics(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = make_fixture_labels(1, n, 0, "a_");
    const auto b = make_fixture_labels(2, n, 2, "b_");
    for (auto _ : state) benchmark::DoNotOptimize(object_centric_metrics(a, b));
}
BENCHMARK(BM_ObjectMetrics)->Arg(179)->Arg(1000);

void BM_RunConfig(benchmark::State& state) {
    const std::size_t pool = 1798, n = 179;
    const auto plan = make_plan("TrafficSigns", pool, n, 5, 7);
    auto [rs, ss] = make_fixture(5, pool, n, 64, 0.5);
    Pool real, syn;
    real.embeddings.emplace(Encoder::inception, rs);
    real.labels = make_fixture_labels(5, pool, 0, "r_");
    syn.embeddings.emplace(Encoder::inception, ss);
    syn.labels = make_fixture_labels(6, n, 1, "s_");
    const ConfigKey key{"TrafficSigns", Regime::scratch, "G", 10};
    for (auto _ : state) benchmark::DoNotOptimize(run_config(plan, real, syn, key));
}
BENCHMARK(BM_RunConfig)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
