// Serial reference vs OpenMP kernels on the three batch workloads.

#include <benchmark/benchmark.h>

#include <random>
#include <tuple>
#include <vector>

#include "voltsize/control.hpp"
#include "voltsize/kernels.hpp"

namespace {

using namespace voltsize;

std::vector<double> powers(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(2150.0, 3650.0);
    std::vector<double> p(n);
    for (auto& v : p) v = u(rng);
    return p;
}

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::Parallel : Execution::Serial; }

void BM_DistflowBatch(benchmark::State& state) {
    const CircuitParams params;
    const auto p = powers(static_cast<std::size_t>(state.range(0)));
    std::vector<PowerFlowCase> cases;
    for (double v : p) cases.push_back({v, 2000.0, 50.0});
    std::vector<OperatingPoint> out(cases.size());
    for (auto _ : state) {
        solve_distflow_batch(cases, params, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SlowControlBatch(benchmark::State& state) {
    const CircuitParams params;
    const auto p = powers(static_cast<std::size_t>(state.range(0)));
    const DeviceSizes sizes{1500.0, 1500.0, 4, 300.0};
    std::vector<ConstraintBounds> bounds;
    for (double v : p) {
        ConstraintBounds b;
        const double l = (v * v * (1.0 + params.phi * params.phi));
        std::tie(b.g1, b.g2) = deterministic_bounds(v, l, params);
        b.chance_active = false;
        bounds.push_back(b);
    }
    std::vector<SlowControlResult> out(p.size());
    for (auto _ : state) {
        slow_control_batch(p, sizes, bounds, params, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FastControlBatch(benchmark::State& state) {
    const CircuitParams params;
    const auto p = powers(static_cast<std::size_t>(state.range(0)));
    const std::vector<double> c(p.size(), 2500.0);
    std::vector<FastControlResult> out(p.size());
    for (auto _ : state) {
        fast_control_batch(p, c, 400.0, params, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_DistflowBatch)->ArgsProduct({{1 << 10, 1 << 14}, {0, 1}});
BENCHMARK(BM_SlowControlBatch)->ArgsProduct({{50, 1 << 12}, {0, 1}});
BENCHMARK(BM_FastControlBatch)->ArgsProduct({{1 << 10, 1 << 14}, {0, 1}});

BENCHMARK_MAIN();
