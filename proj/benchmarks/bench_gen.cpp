#include <array>

#include <benchmark/benchmark.h>

#include "genopt/harness.hpp"

namespace {

void BM_FitQuadratic3(benchmark::State& state) {
    const std::array<genopt::Probe, 3> probes{{{-0.1, 1.3}, {0.0, 1.0}, {0.1, 0.8}}};
    for (auto _ : state) benchmark::DoNotOptimize(genopt::fit_quadratic(probes));
}
BENCHMARK(BM_FitQuadratic3);

void BM_FitQuadratic5(benchmark::State& state) {
    const std::array<genopt::Probe, 5> probes{{{-0.2, 1.7}, {-0.1, 1.3}, {0.0, 1.0}, {0.1, 0.8}, {0.2, 0.7}}};
    for (auto _ : state) benchmark::DoNotOptimize(genopt::fit_quadratic(probes));
}
BENCHMARK(BM_FitQuadratic5);

void BM_GenUpdateLogistic(benchmark::State& state) {
    const auto p = genopt::generate_dataset(1, static_cast<std::size_t>(state.range(0)), 20, 1e-3);
    const genopt::ParamVector w = genopt::ParamVector::zeros(20);
    const genopt::ParamVector g = p.grad(w, genopt::FullData{});
    const double l0 = p.loss(w, genopt::FullData{});
    genopt::GenSettings s;
    s.phi = 1;
    genopt::GenController ctrl(s);
    for (auto _ : state) benchmark::DoNotOptimize(ctrl.update(p, w, g, genopt::FullData{}, l0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenUpdateLogistic)->Arg(256)->Arg(4096);

void BM_RunRosenbrock(benchmark::State& state) {
    genopt::ExperimentSpec spec;
    spec.problem.kind = genopt::ProblemKind::rosenbrock;
    spec.start_point = genopt::default_start(genopt::ProblemKind::rosenbrock);
    spec.iterations = 1000;
    if (state.range(0) != 0) {
        spec.gen = genopt::GenSettings{};
        spec.gen->gamma = 0.0;
        spec.gen->phi = 1;
    }
    for (auto _ : state) benchmark::DoNotOptimize(genopt::run_experiment(spec));
}
BENCHMARK(BM_RunRosenbrock)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_GridSearchBeale(benchmark::State& state) {
    genopt::ExperimentSpec spec;
    spec.problem.kind = genopt::ProblemKind::beale;
    spec.start_point = genopt::default_start(genopt::ProblemKind::beale);
    spec.iterations = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(genopt::grid_search_baseline(spec, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_GridSearchBeale)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
