#include <benchmark/benchmark.h>

#include <vector>

#include "etadrc/config.hpp"
#include "etadrc/gains.hpp"
#include "etadrc/noise.hpp"
#include "etadrc/simulator.hpp"

using namespace etadrc;

static void BM_PhiloxBlock(benchmark::State& state) {
    std::array<std::uint32_t, 4> ctr{0, 0, 0, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(philox4x32_10(ctr, {1, 2}));
        ++ctr[0];
    }
}
BENCHMARK(BM_PhiloxBlock);

static void BM_BrownianIncrement(benchmark::State& state) {
    RngStream s(1, 0, Substream::B1);
    for (auto _ : state) benchmark::DoNotOptimize(brownian_increment(s, 1e-4));
}
BENCHMARK(BM_BrownianIncrement);

static void BM_Lyapunov(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    // (s + 1)^n coefficients give a Hurwitz companion of any order.
    std::vector<double> gains(n, 0.0);
    std::vector<double> binom{1.0};
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> next(binom.size() + 1, 0.0);
        for (std::size_t i = 0; i < binom.size(); ++i) {
            next[i] += binom[i];
            next[i + 1] += binom[i];
        }
        binom = next;
    }
    for (std::size_t i = 0; i < n; ++i) gains[i] = binom[i + 1];
    const Matrix h = build_H(gains).matrix();
    for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(h));
}
BENCHMARK(BM_Lyapunov)->Arg(2)->Arg(3)->Arg(5)->Arg(8);

static void BM_ExampleTrajectory(benchmark::State& state) {
    auto cfg = preset_config("paper-sec5").sim;
    cfg.record_stride = 100;
    for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(cfg));
}
BENCHMARK(BM_ExampleTrajectory)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
