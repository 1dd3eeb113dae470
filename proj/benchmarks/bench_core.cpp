#include <benchmark/benchmark.h>

#include <numbers>

#include "hqc/eigen.hpp"
#include "hqc/lattice.hpp"
#include "hqc/observables.hpp"
#include "hqc/sweep.hpp"

using namespace hqc;

namespace {

OperatorMatrix haldane_with_boundary(int Lx, int Ly, double h) {
    const OperatorMatrix H = build_haldane_cylinder(Lx, Ly, 1.0, 0.2, std::numbers::pi / 2);
    return add_boundary_potential(H, map_for(H), PotentialProfile(1.0, h, quasi_alpha(Lx), Lx));
}

void BM_BuildHaldane(benchmark::State& st) {
    const int L = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(haldane_with_boundary(L, L, 1.0));
}
BENCHMARK(BM_BuildHaldane)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DecomposeVectors(benchmark::State& st) {
    const int L = static_cast<int>(st.range(0));
    const OperatorMatrix H = haldane_with_boundary(L, L, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(decompose(H));
    st.counters["dim"] = H.dim();
}
BENCHMARK(BM_DecomposeVectors)->Arg(6)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_EigenvaluesOnly(benchmark::State& st) {
    const int L = static_cast<int>(st.range(0));
    const OperatorMatrix H = haldane_with_boundary(L, L, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(eigenvalues_only(H.entries));
    st.counters["dim"] = H.dim();
}
BENCHMARK(BM_EigenvaluesOnly)->Arg(6)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// The size-scan path: values only plus one inverse-iteration vector.
void BM_GroundByInverseIteration(benchmark::State& st) {
    const int Lx = static_cast<int>(st.range(0));
    const OperatorMatrix H = haldane_with_boundary(Lx, 6, 1.0);
    const Spectrum s = eigenvalues_only(H.entries);
    for (auto _ : st) benchmark::DoNotOptimize(eigenvector_for(H.entries, s.eigenvalues[0]));
}
BENCHMARK(BM_GroundByInverseIteration)->Arg(21)->Arg(55)->Unit(benchmark::kMillisecond);

void BM_ObservePoint(benchmark::State& st) {
    SweepConfig c;
    c.model.t2 = 0.2;
    c.sizes = {{10, 10}};
    c.cache_points = false;
    for (auto _ : st) benchmark::DoNotOptimize(observe(c, c.sizes[0], 1.0, 0.8, 0.0));
}
BENCHMARK(BM_ObservePoint)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
