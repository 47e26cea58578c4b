#include "riskmdp/simulate.hpp"
#include "riskmdp/stationary.hpp"
#include "riskmdp/timegrid.hpp"

#include "test_models.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace riskmdp {
namespace {

CtmdpModel dense_model(std::size_t states, std::size_t actions, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    testing::RandomModelSpec spec;
    spec.max_states = states;
    spec.max_actions = actions;
    // random_model draws sizes uniformly up to the maxima; redraw until both hit them.
    for (;;) {
        auto m = testing::random_model(gen, spec);
        if (m.num_states() == states && m.num_actions() == actions) return m;
    }
}

void BM_BellmanApply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = dense_model(n, 4, 1);
    const auto v = value_iteration(m).values;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bellman_apply(m, v));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * 4));
}

void BM_ValueIteration(benchmark::State& state) {
    const auto m = dense_model(static_cast<std::size_t>(state.range(0)), 4, 2);
    std::size_t iterations = 0;
    for (auto _ : state) {
        auto sol = value_iteration(m);
        iterations = sol.trace.iterations;
        benchmark::DoNotOptimize(sol);
    }
    state.counters["iterations"] = static_cast<double>(iterations);
}

void BM_EstimateUtility(benchmark::State& state) {
    std::mt19937_64 gen(3);
    testing::RandomModelSpec spec;
    spec.max_states = 6;
    spec.max_actions = 2;
    spec.cost_margin = 2.0;
    const auto m = testing::random_model(gen, spec);
    const auto f = extract_policy(m, value_iteration(m).values);
    SimulationOptions opts;
    opts.workers = static_cast<unsigned>(state.range(1));
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_utility(m, f, m.num_states() - 1, n, 11, opts));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_SolveBackward(benchmark::State& state) {
    const auto m = TimeVaryingModel::from_homogeneous(dense_model(8, 3, 4));
    const double substep = 1.0 / static_cast<double>(state.range(0));
    const auto grid = TimeGrid::uniform(1.0, 0.1);
    const std::vector<double> terminal(m.num_states(), 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_backward(m, grid, terminal, BackwardOptions{substep, false}));
    }
}

void BM_DiscountedValue(benchmark::State& state) {
    const auto m = dense_model(8, 3, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(discounted_value(m, 1.0, 1e-8, 1e-2));
    }
}

}  // namespace

BENCHMARK(BM_BellmanApply)->RangeMultiplier(2)->Range(8, 128);
BENCHMARK(BM_ValueIteration)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateUtility)->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveBackward)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiscountedValue)->Unit(benchmark::kMillisecond);

}  // namespace riskmdp

BENCHMARK_MAIN();
