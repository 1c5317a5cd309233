#include <benchmark/benchmark.h>

#include <string>

#include "nanofiber/angular.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/squeeze.hpp"

using namespace nanofiber;

namespace {

const AtomicSystem& d1() {
    static const auto sys = AtomicSystem::load(
        std::string(NANOFIBER_DATA_DIR) + "/cesium_d1.json");
    return sys;
}

const GuidedModeSolution& solution() {
    static const auto sol =
        solve_he11(FiberSpec{225.0, 1.4469, 1.0}, d1().wavelength_nm);
    return sol;
}

const TrapSite kSite{1.8 * 225.0, 0.0};

}  // namespace

static void BM_SolveHE11(benchmark::State& state) {
    const FiberSpec fiber{225.0, 1.4469, 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_he11(fiber, d1().wavelength_nm));
}
BENCHMARK(BM_SolveHE11);

static void BM_NormIntegral(benchmark::State& state) {
    const auto& sol = solution();
    for (auto _ : state)
        benchmark::DoNotOptimize(mode_norm_integral(sol, sol.u0));
}
BENCHMARK(BM_NormIntegral);

static void BM_Wigner6j(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(wigner_6j(0.5, 1.5, 1, 5, 4, 3.5));
}
BENCHMARK(BM_Wigner6j);

static void BM_MagicDetunings(benchmark::State& state) {
    QuantizationAxis axis;
    axis.varphi = pi / 2;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            magic_detunings(d1(), solution(), axis, kSite));
}
BENCHMARK(BM_MagicDetunings);

static void BM_CouplingSet(benchmark::State& state) {
    QuantizationAxis axis;
    axis.varphi = pi / 2;
    for (auto _ : state)
        benchmark::DoNotOptimize(coupling_set(d1(), solution(), axis, kSite,
                                              MagicBranch::w4, 1e6));
}
BENCHMARK(BM_CouplingSet);

static void BM_IntegrateMoments(benchmark::State& state) {
    QuantizationAxis axis;
    axis.varphi = pi / 2;
    const CouplingSet cs =
        coupling_set(d1(), solution(), axis, kSite, MagicBranch::w4, 1e6);
    const RateSet rates = scattering_rates(d1(), solution(), axis, kSite,
                                           InputPolarization::plus45, cs);
    IntegrationOptions opts;
    opts.dt = 5e-4;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            integrate_moments(scs_initial(2500), cs, rates, opts));
}
BENCHMARK(BM_IntegrateMoments);

static void BM_OptimizeAxis(benchmark::State& state) {
    IntegrationOptions opts;
    opts.dt = 5e-4;
    for (auto _ : state)
        benchmark::DoNotOptimize(optimize_axis(d1(), solution(), kSite, 2500,
                                               MagicBranch::w4, 1e6, opts));
}
BENCHMARK(BM_OptimizeAxis);

BENCHMARK_MAIN();
