#include <benchmark/benchmark.h>

#include <random>

#include "hotspot/graphfuse.hpp"
#include "hotspot/simbench.hpp"
#include "hotspot/solver.hpp"

using namespace hotspot;

namespace {

QuadFuseProblem chain_problem(std::size_t K) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> U(0.5, 5.0);
    QuadFuseProblem p;
    p.a.resize(static_cast<Eigen::Index>(K));
    p.b.resize(static_cast<Eigen::Index>(K));
    std::vector<FusionEdge> edges;
    for (std::size_t i = 0; i < K; ++i) {
        p.a[static_cast<Eigen::Index>(i)] = U(rng);
        p.b[static_cast<Eigen::Index>(i)] = (i < K / 2 ? -0.5 : 0.5) + 0.3 * N01(rng);
        for (std::size_t j = i + 1; j < std::min(K, i + 4); ++j) edges.push_back({i, j, 1.0 / double(j - i)});
    }
    p.graph = FusionGraph(K, edges);
    p.lambda1 = 0.05;
    p.scale = 1.0;
    return p;
}

void BM_SolveQuadFuse(benchmark::State& state) {
    const auto p = chain_problem(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_quad_fuse(p).beta);
}
BENCHMARK(BM_SolveQuadFuse)->Arg(20)->Arg(40)->Arg(160);

void BM_GammaStep(benchmark::State& state) {
    const auto inst = generate(Scenario::parse("K40n100o15"), 0);
    const ModelParams p = default_init(inst.data);
    for (auto _ : state) benchmark::DoNotOptimize(gamma_step(inst.data, p, SolverConfig{}, {0.1, 0.5}));
}
BENCHMARK(BM_GammaStep);

void BM_Fit(benchmark::State& state) {
    const auto inst = generate(Scenario::parse(state.range(0) == 0 ? "K20n50" : "K40n100o15"), 0);
    for (auto _ : state) benchmark::DoNotOptimize(fit(inst.data, inst.graph, {0.01, 0.5}).bic);
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
