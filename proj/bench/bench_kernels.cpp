#include <benchmark/benchmark.h>

#include <vector>

#include "dfvote/kernels.hpp"
#include "dfvote/measure.hpp"

using namespace dfvote;

namespace {

const BaseMeasure& uniform2() {
    static const auto m = BaseMeasure::uniform_box({-0.2, -0.2}, {0.2, 0.2});
    return m;
}

kernels::SamplingPlan plan(std::int64_t count) {
    kernels::SamplingPlan p;
    p.sizes = GroupSizes{{5000, 5000}};
    p.count = count;
    p.seed = 11;
    p.draw_biases = [](CounterRng& rng, std::span<double> b) {
        for (std::size_t i = 0; i < b.size(); i += 2) uniform2().sample_into(rng, b.subspan(i, 2));
    };
    return p;
}

std::vector<double> gaussian_sample(std::int64_t count) {
    auto draws = sample(BaseMeasure::gaussian({0.0}, Eigen::MatrixXd::Identity(1, 1)), 3, count);
    std::vector<double> flat;
    for (auto& d : draws) flat.push_back(d[0]);
    return flat;
}

void BM_MixturePmfSerial(benchmark::State& state) {
    const auto rule = uniform2().quadrature_rule(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MarginPmf pmf(GroupSizes{{40, 40}});
        kernels::serial::accumulate_mixture_pmf(rule, BiasMap(), pmf);
        benchmark::DoNotOptimize(pmf.values().data());
    }
}

void BM_MixturePmfOmp(benchmark::State& state) {
    const auto rule = uniform2().quadrature_rule(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        MarginPmf pmf(GroupSizes{{40, 40}});
        kernels::omp::accumulate_mixture_pmf(rule, BiasMap(), pmf, 0);
        benchmark::DoNotOptimize(pmf.values().data());
    }
}

void BM_SampleMarginsSerial(benchmark::State& state) {
    const auto p = plan(state.range(0));
    std::vector<std::int64_t> raw(static_cast<std::size_t>(p.count) * 2);
    for (auto _ : state) {
        kernels::serial::sample_margins(p, raw);
        benchmark::DoNotOptimize(raw.data());
    }
}

void BM_SampleMarginsOmp(benchmark::State& state) {
    const auto p = plan(state.range(0));
    std::vector<std::int64_t> raw(static_cast<std::size_t>(p.count) * 2);
    for (auto _ : state) {
        kernels::omp::sample_margins(p, raw, 0);
        benchmark::DoNotOptimize(raw.data());
    }
}

void BM_EmpiricalCfSerial(benchmark::State& state) {
    const auto s = gaussian_sample(state.range(0));
    std::vector<double> t;
    for (int i = 0; i < 21; ++i) t.push_back(-3.0 + 0.3 * i);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::empirical_cf(s, 1, t));
}

void BM_EmpiricalCfOmp(benchmark::State& state) {
    const auto s = gaussian_sample(state.range(0));
    std::vector<double> t;
    for (int i = 0; i < 21; ++i) t.push_back(-3.0 + 0.3 * i);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::empirical_cf(s, 1, t, 0));
}

}  // namespace

BENCHMARK(BM_MixturePmfSerial)->Arg(64)->Arg(128);
BENCHMARK(BM_MixturePmfOmp)->Arg(64)->Arg(128);
BENCHMARK(BM_SampleMarginsSerial)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK(BM_SampleMarginsOmp)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK(BM_EmpiricalCfSerial)->Arg(1 << 16);
BENCHMARK(BM_EmpiricalCfOmp)->Arg(1 << 16);

BENCHMARK_MAIN();
