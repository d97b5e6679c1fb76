#include <benchmark/benchmark.h>

#include <vector>

#include "wmlab/evolve.hpp"
#include "wmlab/profiles.hpp"
#include "wmlab/spectrum.hpp"

using namespace wmlab;

namespace {

const SelfSimilarProfile& excited6() {
    static const SelfSimilarProfile p = find_profile(Dimension(6), 1);
    return p;
}

}  // namespace

static void BM_Rhs(benchmark::State& state) {
    GridSpec g = default_grid(6.71508);
    g.n_points = static_cast<int>(state.range(0));
    const EvolutionState s = init_family(Dimension(6), 1.7, g);
    std::vector<double> dV(s.V.size()), dP(s.P.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs(s, g, dV, dP));
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rhs)->Arg(513)->Arg(2049)->Arg(8193);

static void BM_MatchResidual(benchmark::State& state) {
    const auto& p = excited6();
    for (auto _ : state) benchmark::DoNotOptimize(match_residual(Dimension(6), p.c, p.branch, p.settings));
}
BENCHMARK(BM_MatchResidual);

static void BM_FindProfile(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(find_profile(Dimension(d), 1).c);
}
BENCHMARK(BM_FindProfile)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

static void BM_EigenResidual(benchmark::State& state) {
    const auto& p = excited6();
    double lambda = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen_residual(p, lambda));
        lambda += 1e-6;
    }
}
BENCHMARK(BM_EigenResidual)->Unit(benchmark::kMicrosecond);

static void BM_EvolveUnitTau(benchmark::State& state) {
    GridSpec g = default_grid(6.71508);
    g.n_points = static_cast<int>(state.range(0));
    RunOptions o;
    o.tau_end = 1.0;
    o.stop_on_classification = false;
    o.classifier.endstates = {{0, 1.0, true}};
    const EvolutionState s = init_family(Dimension(6), 1.7, g);
    for (auto _ : state) benchmark::DoNotOptimize(run(s, g, o).steps);
}
BENCHMARK(BM_EvolveUnitTau)->Arg(513)->Arg(2049)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
