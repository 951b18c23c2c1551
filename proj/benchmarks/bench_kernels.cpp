#include "gdspin/baselines.hpp"
#include "gdspin/gd.hpp"
#include "gdspin/instances.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace gdspin;

namespace {

CouplingMatrix instance(std::size_t n, bool sparse)
{
    EnsembleSpec es;
    es.n = n;
    es.seed = 1;
    es.kind = sparse ? EnsembleKind::sparse3 : EnsembleKind::dense;
    return generate(es);
}

OscillatorState random_state(const CouplingMatrix& J, CouplingMode mode)
{
    auto s = OscillatorState::vacuum(J, mode);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 0.3);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s.psi[i] = {g(rng), g(rng)};
        s.gamma_inj[i] = 1.0;
    }
    return s;
}

void BM_rk4_step(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto J = instance(n, state.range(1) != 0).scaled(1e-3);
    const auto mode = state.range(2) ? CouplingMode::gain : CouplingMode::dissipative;
    GdParams p;
    auto s = random_state(J, mode);
    for (auto _ : state) {
        auto next = step_rk4(s, J, FieldSpec{}, mode, p);
        benchmark::DoNotOptimize(next.psi.data());
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_rk4_step)
    ->ArgsProduct({{100, 200, 400, 800}, {0}, {0, 1}})
    ->ArgsProduct({{100, 200, 400, 800}, {1}, {0}})
    ->ArgNames({"n", "sparse", "gain"});

void BM_xy_energy(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto J = instance(n, false);
    const auto conf = random_configuration(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xy_energy(J, conf));
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_xy_energy)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_xy_gradient(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto J = instance(n, false);
    const auto conf = random_configuration(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(xy_gradient(J, {}, conf).data());
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_xy_gradient)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_lbfgs_descent(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto J = instance(n, false);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto m = lbfgs_minimize(J, {}, random_configuration(n, seed++), LbfgsParams{});
        benchmark::DoNotOptimize(m.energy);
    }
}
BENCHMARK(BM_lbfgs_descent)->Arg(20)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_gd_run(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto J = instance(n, false);
    GdParams p;
    p.t_max = 200.0;
    p.polish = false;
    for (auto _ : state) {
        p.seed += 1;
        benchmark::DoNotOptimize(run_gd(J, {}, CouplingMode::dissipative, p).best_energy);
    }
}
BENCHMARK(BM_gd_run)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
