// Serial reference kernels against their OpenMP counterparts.
//
//   bench_kernels --benchmark_filter=QuasiGrid

#include <random>

#include <benchmark/benchmark.h>

#include "polmult/kernels.hpp"

using namespace polmult;

namespace {

BlockMultipoles random_multipoles(int two_s) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(two_s));
    std::normal_distribution<double> g;
    const Spin s(two_s);
    Vector v(s.dim());
    for (int i = 0; i < s.dim(); ++i) v(i) = Complex(g(rng), g(rng));
    return decompose_block(DensityBlock::pure(s, v));
}

template <auto Kernel>
void quasi_grid(benchmark::State& state) {
    const int two_s = static_cast<int>(state.range(0));
    const auto b = random_multipoles(two_s);
    const auto grid = SphereGrid::for_band_limit(2 * two_s + 1);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(b, -1.0, grid));
    state.counters["nodes"] = static_cast<double>(grid.size());
}

template <auto Kernel>
void simulate(benchmark::State& state) {
    const int two_s = static_cast<int>(state.range(0));
    PolarizationSector sector;
    sector.add_block(1.0, recompose_block(random_multipoles(two_s)));
    ReconstructionOptions opt;
    opt.l_max = std::min(two_s, 6);
    const auto dirs = opt.all_directions();
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(sector, dirs, 1000000, seed++));
    state.counters["directions"] = static_cast<double>(dirs.size());
}

}  // namespace

BENCHMARK(quasi_grid<kernels::serial::quasi_grid>)->Name("QuasiGrid/serial")->Arg(4)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(quasi_grid<kernels::omp::quasi_grid>)->Name("QuasiGrid/omp")->Arg(4)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(simulate<kernels::serial::simulate_directions>)->Name("Simulate/serial")->Arg(4)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(simulate<kernels::omp::simulate_directions>)->Name("Simulate/omp")->Arg(4)->Arg(16)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
