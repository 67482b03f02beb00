#include <benchmark/benchmark.h>

#include <cmath>

#include "ekrelax/entropy_metrics.hpp"
#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/relax_solver.hpp"

using namespace ekrelax;

namespace {

FluidParams fluid(double eps) {
    FluidParams p;
    p.gamma = 2.0;
    p.s = 0.0;
    p.epsilon = eps;
    return p;
}

Field density(int n) {
    return Field::from_function(TorusGrid(n), [](double x) { return 2.0 + 0.5 * std::cos(x); });
}

void BM_Deriv(benchmark::State& state) {
    const Field f = density(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(deriv(f, 1));
    }
}
BENCHMARK(BM_Deriv)->Arg(64)->Arg(256)->Arg(1024);

void BM_RhsNonstiff(benchmark::State& state) {
    const FluidParams p = fluid(0.1);
    const RelaxState s = prepare_initial(density(static_cast<int>(state.range(0))), p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs_nonstiff(s, p));
    }
}
BENCHMARK(BM_RhsNonstiff)->Arg(256);

void BM_RelaxStep(benchmark::State& state) {
    const FluidParams p = fluid(0.1);
    const RelaxState s = prepare_initial(density(256), p);
    const auto scheme = state.range(0) == 0 ? StepScheme::strang : StepScheme::integrating_factor;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step(s, 1e-5, p, 0.0, scheme));
    }
}
BENCHMARK(BM_RelaxStep)->Arg(0)->Arg(1);

void BM_GradientFlowStep(benchmark::State& state) {
    const FluidParams p = fluid(1.0);
    const Field rho = density(256);
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_semi_implicit(rho, 1e-4, p));
    }
}
BENCHMARK(BM_GradientFlowStep);

void BM_EntropyBudget(benchmark::State& state) {
    const FluidParams p = fluid(0.1);
    const Field rho = density(256);
    const RelaxState s = prepare_initial(rho, p);
    const EquilibriumFields eq = make_equilibrium_fields({0.0, rho}, p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(budget(s, eq, p));
    }
}
BENCHMARK(BM_EntropyBudget);

}  // namespace

BENCHMARK_MAIN();
