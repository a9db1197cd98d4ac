#include <benchmark/benchmark.h>

#include "splitband/core_model.hpp"
#include "splitband/fast_cavity.hpp"
#include "splitband/floquet.hpp"
#include "splitband/langevin.hpp"
#include "splitband/spectral_analysis.hpp"
#include "splitband/units.hpp"

using namespace splitband;

namespace {

SystemParams quantum() {
    SystemParams p;
    p.omega_m = khz_to_rad_s(46);
    p.kappa = 2.0 * khz_to_rad_s(26);
    p.detuning = -p.omega_m;
    p.omega_d = khz_to_rad_s(1.5);
    p.omega_2 = 0.24 * 2.0 * p.omega_d;
    p.g_mod = 18500.0;
    p.gamma_m = 1e-6;
    return p;
}

SimConfig trap_sim() {
    SimConfig c;
    c.trap.well_depth = khz_to_rad_s(26);
    c.trap.mass = 9.2e-18;
    c.trap.photon_number = 6.4e8;
    c.trap.omega_t = 3219.0;
    c.trap.well_index = 100;
    c.kappa = 2.0 * khz_to_rad_s(130);
    c.detuning0 = bare_detuning(-khz_to_rad_s(75), c.trap);
    c.gamma_m = 2000.0;
    c.omega_d = khz_to_rad_s(0.7);
    c.dt = 1.5e-7;
    c.sample_every = 16;
    c.temperature = 1.0;
    c.transient_periods = 0.0;
    return c;
}

}  // namespace

// One frequency point: banded comb solve for every observable.
static void BM_CombSolve(benchmark::State& state) {
    const SystemParams p = quantum();
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_transfer(p.omega_m + 0.3 * p.omega_d, p, n));
}
BENCHMARK(BM_CombSolve)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

static void BM_PsdGrid(benchmark::State& state) {
    const SystemParams p = quantum();
    const auto axis = sideband_axis(p, static_cast<int>(state.range(0)), 8.0);
    for (auto _ : state) benchmark::DoNotOptimize(psd(Observable::output_quadrature, axis, p, 32));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(axis.size()));
}
BENCHMARK(BM_PsdGrid)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

// Simulator throughput in integration steps per second.
static void BM_Integrate(benchmark::State& state) {
    SimConfig c = trap_sim();
    c.duration = 10.0 * kTwoPi / c.omega_d;
    const double steps = c.duration / c.dt;
    for (auto _ : state) benchmark::DoNotOptimize(integrate(c));
    state.SetItemsProcessed(static_cast<long>(state.iterations() * steps));
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

static void BM_Welch(benchmark::State& state) {
    SimConfig c = trap_sim();
    c.duration = 40.0 * kTwoPi / c.omega_d;
    const Trajectory t = integrate(c);
    const auto y = cavity_quadrature(t);
    WelchOptions o;
    o.segment = 8192;
    for (auto _ : state) benchmark::DoNotOptimize(welch_psd(y, t.sample_rate(), o));
}
BENCHMARK(BM_Welch)->Unit(benchmark::kMillisecond);

static void BM_LineSpectrum(benchmark::State& state) {
    AnsatzParams a;
    a.omega_d = khz_to_rad_s(0.7);
    a.omega_m = khz_to_rad_s(46);
    a.omega_2 = 0.2 * 2.0 * a.omega_d;
    a.drive_amplitude = 0.6;
    a.thermal_amplitude = 0.1;
    a.line_width = 50.0;
    for (auto _ : state) benchmark::DoNotOptimize(line_spectrum(a));
}
BENCHMARK(BM_LineSpectrum);
BENCHMARK_MAIN();
