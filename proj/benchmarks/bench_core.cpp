#include <cmath>
#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "fracbdsde/bdsde.hpp"
#include "fracbdsde/config.hpp"
#include "fracbdsde/girsanov.hpp"
#include "fracbdsde/kernel.hpp"
#include "fracbdsde/rng.hpp"
#include "fracbdsde/sampling.hpp"

using namespace fracbdsde;

static void BM_KernelWeights(benchmark::State& state) {
    const TimeGrid grid(1.0, int(state.range(0)));
    const Hurst h(0.3);
    for (auto _ : state) {
        auto w = build_kernel_weights(grid, h);
        benchmark::DoNotOptimize(w);
    }
}
BENCHMARK(BM_KernelWeights)->Arg(32)->Arg(64)->Arg(128);

static void BM_SampleFbm(benchmark::State& state) {
    const TimeGrid grid(1.0, 64);
    const Hurst h(0.3);
    const int paths = int(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        PathEnsemble ens = sample_fbm(grid, h, seed++, paths);
        benchmark::DoNotOptimize(ens.paths.back().B.back());
    }
    state.SetItemsProcessed(state.iterations() * paths);
}
BENCHMARK(BM_SampleFbm)->Arg(256)->Arg(1024);

static void BM_BuildFrame(benchmark::State& state) {
    const TimeGrid grid(1.0, int(state.range(0)));
    const Hurst h(0.3);
    auto weights = build_kernel_weights(grid, h);
    const GammaSpec gamma = GammaSpec::constant(grid, 0.5);
    for (auto _ : state) {
        GirsanovFrame f = build_frame(gamma, h, grid, weights);
        benchmark::DoNotOptimize(f.q(grid.n_steps()));
    }
}
BENCHMARK(BM_BuildFrame)->Arg(64)->Arg(128);

static void BM_BsdeSweep(benchmark::State& state) {
    const TimeGrid grid(1.0, 32);
    const Hurst h(0.3);
    const GirsanovFrame frame = build_frame(GammaSpec::constant(grid, 0.5), h, grid);
    BTables btab = BTables::identity(32);
    for (int j = 0; j <= 32; ++j) btab.I[std::size_t(j)] = 0.1 * grid.node(j);
    BdsdeDriver driver;
    driver.f = [](double, double, double y, double z) { return 0.4 * y + 0.3 * z; };
    driver.has_x = false;
    driver.lipschitz = 0.4;
    const TerminalSpec terminal = make_terminal("w", 32);
    const int paths = int(state.range(0));
    const double sdt = std::sqrt(grid.dt());
    std::vector<std::vector<double>> dW(std::size_t(paths), std::vector<double>(32));
    for (int k = 0; k < paths; ++k) {
        NormalStream rng(7, std::uint64_t(k));
        for (int j = 0; j < 32; ++j) dW[std::size_t(k)][std::size_t(j)] = sdt * rng.normal();
    }
    for (auto _ : state) {
        BlockSolution sol =
            solve_pathwise_bsde_block(dW, btab, frame, driver, terminal, BasisConfig{2});
        benchmark::DoNotOptimize(sol.Yhat.back().back());
    }
    state.SetItemsProcessed(state.iterations() * paths);
}
BENCHMARK(BM_BsdeSweep)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
