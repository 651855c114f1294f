#include <benchmark/benchmark.h>

#include <cmath>

#include "cmn/analysis.hpp"
#include "cmn/solver.hpp"
#include "cmn/transform.hpp"

using namespace cmn;

namespace {

State bump_state(int cells, int kappa) {
    const GridPtr g = RadialGrid::uniform(2, 1.0, cells);
    State s;
    s.t = 0.0;
    s.u = Field(g, 0.0);
    for (int i = 0; i < cells; ++i) {
        const double r = g->center(i);
        s.u[i] = r < 0.25 ? std::pow(1.0 - 16.0 * r * r, 3.0) : 0.0;
    }
    s.w = Field(g, 1.0);
    s.v = kappa == 0 ? solve_elliptic_v(s.u, s.w, 2) : Field(g, 0.5);
    return s;
}

ModelParams bench_params(int kappa) {
    ModelParams p;
    p.n = 2;
    p.kappa = kappa;
    p.chi = 5.0;
    p.diffusion = DiffusionLaw::prototype(0.5);
    p.R = 1.0;
    return p;
}

}  // namespace

static void BM_EllipticSolve(benchmark::State& state) {
    const State s = bump_state(static_cast<int>(state.range(0)), 0);
    for (auto _ : state) {
        Field v = solve_elliptic_v(s.u, s.w, 2);
        benchmark::DoNotOptimize(v.values.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EllipticSolve)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void BM_Step(benchmark::State& state) {
    const int kappa = static_cast<int>(state.range(1));
    const State s = bump_state(static_cast<int>(state.range(0)), kappa);
    const ModelParams params = bench_params(kappa);
    const SchemeOptions scheme;
    const SourceFn phi = zero_source();
    for (auto _ : state) {
        StepResult r = step(s, params, phi, 1e-5, scheme);
        benchmark::DoNotOptimize(r.state.u.values.data());
    }
}
BENCHMARK(BM_Step)->Args({256, 0})->Args({512, 0})->Args({1024, 0})->Args({256, 1})->Args({512, 1});

static void BM_CumulativeMass(benchmark::State& state) {
    const State s = bump_state(static_cast<int>(state.range(0)), 0);
    for (auto _ : state) {
        CumulativeMass z = cumulative_mass(s.u);
        benchmark::DoNotOptimize(z.z_nodes.data());
    }
}
BENCHMARK(BM_CumulativeMass)->Range(256, 2048);

static void BM_RadialMoment(benchmark::State& state) {
    const State s = bump_state(static_cast<int>(state.range(0)), 0);
    const CumulativeMass z = cumulative_mass(s.u);
    for (auto _ : state) {
        const double y = radial_moment(z, 0.5, 0.2, 2);
        benchmark::DoNotOptimize(y);
    }
}
BENCHMARK(BM_RadialMoment)->Range(256, 2048);

BENCHMARK_MAIN();
