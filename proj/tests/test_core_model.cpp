#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "splitband/core_model.hpp"
#include "splitband/errors.hpp"
#include "splitband/special.hpp"
#include "splitband/units.hpp"

using namespace splitband;

namespace {

SystemParams cavity_params() {
    SystemParams p;
    p.kappa = 2.0 * khz_to_rad_s(130);
    p.detuning = -khz_to_rad_s(75);
    p.omega_m = khz_to_rad_s(46);
    p.omega_d = khz_to_rad_s(0.7);
    p.gamma_m = 20.0;
    return p;
}

TrapParams fig_trap(int n) {
    TrapParams t;
    t.well_depth = khz_to_rad_s(26);
    t.mass = 9.2e-18;
    t.photon_number = 6.4e8;
    t.omega_t = 3219.0;
    t.well_index = n;
    return t;
}

}  // namespace

TEST_CASE("susceptibilities match their definitions") {
    const SystemParams p = cavity_params();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0 * p.omega_m, 3.0 * p.omega_m);
    for (int i = 0; i < 200; ++i) {
        const double w = u(rng);
        const cplx co = 1.0 / cplx(p.kappa / 2.0, -(w + p.detuning));
        const cplx cm = 1.0 / cplx(p.gamma_m / 2.0, -(w - p.omega_m));
        CHECK(std::abs(chi_o(w, p) - co) <= 1e-14 * std::abs(co));
        CHECK(std::abs(chi_m(w, p) - cm) <= 1e-14 * std::abs(cm));
        // eta(-w) = -eta(w)^*
        CHECK(std::abs(eta(-w, p) + std::conj(eta(w, p))) <= 1e-14 * std::abs(eta(w, p)));
    }
}

TEST_CASE("mechanical susceptibility peaks at omega_m with height 2/Gamma") {
    const SystemParams p = cavity_params();
    CHECK(std::abs(chi_m(p.omega_m, p)) == doctest::Approx(2.0 / p.gamma_m).epsilon(1e-14));
    CHECK(std::abs(chi_m(p.omega_m + p.gamma_m / 2.0, p)) ==
          doctest::Approx(std::sqrt(2.0) / p.gamma_m).epsilon(1e-12));
}

TEST_CASE("undamped oscillator on resonance is a singular evaluation") {
    CHECK_THROWS_AS(chi_m(1000.0, 1000.0, 0.0), SingularEvaluationError);
    CHECK_NOTHROW(chi_m(1001.0, 1000.0, 0.0));
}

TEST_CASE("ratio prediction agrees with the corrected-weight oracle") {
    const double wd = khz_to_rad_s(0.7);
    for (double q : {0.0, 0.01, 0.05, 0.2, 0.5, 0.9, 1.0, 1.7}) {
        const double w2 = 2.0 * wd * q;
        CHECK(ratio_prediction(wd, w2) == doctest::Approx(oracle::ratio_law(wd, w2)).epsilon(1e-14));
    }
    CHECK(ratio_prediction(wd, 0.0) == 1.0);
    CHECK(ratio_prediction(wd, 2.0 * wd) == 0.0);
    CHECK(ratio_prediction(wd, 2.0 * wd * 0.05) == doctest::Approx(0.8185941).epsilon(1e-6));
    CHECK_THROWS_AS(ratio_prediction(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(ratio_prediction(1.0, -1.0), ConfigError);
}

TEST_CASE("ratio prediction is monotone decreasing up to full cancellation") {
    const double wd = 1000.0;
    double prev = 2.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = ratio_prediction(wd, 2.0 * wd * i / 100.0);
        CHECK(r < prev);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        prev = r;
    }
}

TEST_CASE("backaction occupancy and pressure map") {
    SystemParams p;
    p.kappa = 2.0 * khz_to_rad_s(26);
    p.omega_m = khz_to_rad_s(46);
    CHECK(n_backaction(p) == doctest::Approx(std::pow(52.0 / (4.0 * 46.0), 2)).epsilon(1e-13));
    CHECK(n_backaction(p) == doctest::Approx(0.0799).epsilon(2e-3));
    CHECK(pressure_to_gamma(1e-6) == doctest::Approx(2e-3));
    CHECK(pressure_to_gamma(0.0) == 0.0);
    CHECK_THROWS_AS(pressure_to_gamma(-1.0), ConfigError);
}

TEST_CASE("thermal occupancy approaches k T / hbar omega") {
    const double w = khz_to_rad_s(46);
    const double T = 300.0;
    CHECK(thermal_occupancy(T, w) == doctest::Approx(kBoltzmann * T / (kHbar * w)).epsilon(1e-6));
    CHECK(thermal_occupancy(0.0, w) == 0.0);
}

TEST_CASE("Bessel functions satisfy the three-term recurrence and sum rule") {
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0}) {
        double sum = bessel_j(0, x) * bessel_j(0, x);
        for (int n = 1; n < 40; ++n) {
            sum += 2.0 * bessel_j(n, x) * bessel_j(n, x);
            const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
            CHECK(lhs == doctest::Approx(2.0 * n / x * bessel_j(n, x)).epsilon(1e-10).scale(1e-14));
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(bessel_j(-3, x) == doctest::Approx(-bessel_j(3, x)));
        CHECK(bessel_j(2, -x) == doctest::Approx(bessel_j(2, x)));
    }
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(1, 0.0) == 0.0);
}

TEST_CASE("trap harmonics match a numerical Fourier transform") {
    const TrapParams t = fig_trap(100);
    for (double xd : {0.05, 0.3, 0.7, 1.2}) {
        const TrapModulation m = trap_modulation(t, xd);
        auto freq_sq = [&](double th) { return std::cos(xd * std::sin(th)); };
        auto coupling = [&](double th) { return m.coupling_scale * std::sin(xd * std::sin(th)); };
        auto freq = [&](double th) { return m.omega_m0 * std::sqrt(std::cos(xd * std::sin(th))); };

        for (std::size_t n = 0; n < m.frequency_sq_harmonics.size(); ++n) {
            const double ref = n == 0 ? oracle::mean_over_period(freq_sq)
                                      : oracle::cos_coefficient(freq_sq, 2 * static_cast<int>(n));
            CHECK(m.frequency_sq_harmonics[n] == doctest::Approx(ref).scale(1.0).epsilon(1e-12));
        }
        for (std::size_t n = 0; n < m.coupling_harmonics.size(); ++n) {
            const double ref = oracle::sin_coefficient(coupling, 2 * static_cast<int>(n) + 1);
            CHECK(m.coupling_harmonics[n] == doctest::Approx(ref).scale(m.coupling_scale).epsilon(1e-12));
        }
        // g(t) = 2 g_mod sin(omega_d t)
        CHECK(2.0 * m.g_mod == doctest::Approx(oracle::sin_coefficient(coupling, 1)).epsilon(1e-12));
        // Leading harmonic of the frequency itself, to first order in J_2 / J_0.
        const double w2_exact = oracle::cos_coefficient(freq, 2) / 2.0;
        CHECK(m.omega_2 == doctest::Approx(w2_exact).epsilon(0.05 * xd * xd + 1e-6));
    }
}

TEST_CASE("small drive amplitude gives omega_2 / omega_m = X_d^2 / 16") {
    const TrapParams t = fig_trap(100);
    for (double xd : {1e-3, 1e-2, 5e-2}) {
        const TrapModulation m = trap_modulation(t, xd);
        CHECK(m.omega_2 / m.omega_m == doctest::Approx(xd * xd / 16.0).epsilon(xd * xd));
    }
    CHECK_THROWS_AS(trap_modulation(t, 1.6), ConfigError);
}

TEST_CASE("self-consistent drive amplitude grows with the well index") {
    double prev = 0.0;
    for (int n : {100, 200, 300, 400}) {
        const TrapParams t = fig_trap(n);
        const double xd = drive_amplitude_from_trap(t);
        CHECK(xd > prev);
        const double w0 = t.unmodulated_frequency();
        const double lever = t.omega_t * t.omega_t / (w0 * w0 * bessel_j(0, xd)) * 2.0 *
                             t.wavenumber() * t.well_position();
        CHECK(xd == doctest::Approx(lever).epsilon(1e-9));
        prev = xd;
    }
}

TEST_CASE("validation rejects non-physical parameters") {
    SystemParams p = cavity_params();
    CHECK_NOTHROW(validate(p));
    SystemParams bad = p;
    bad.kappa = -1.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = p;
    bad.n_th = -0.1;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = p;
    bad.omega_d = p.omega_m;  // not slow
    CHECK_FALSE(validate(bad).empty());
}

TEST_CASE("params hash is stable and sensitive to every field") {
    const SystemParams p = cavity_params();
    CHECK(params_hash(p) == params_hash(cavity_params()));
    double SystemParams::*fields[] = {&SystemParams::detuning, &SystemParams::kappa,
                                      &SystemParams::gamma_m,  &SystemParams::omega_m,
                                      &SystemParams::omega_d,  &SystemParams::omega_2,
                                      &SystemParams::g_mod,    &SystemParams::g_static,
                                      &SystemParams::n_th,     &SystemParams::n_opt,
                                      &SystemParams::homodyne_phase};
    for (auto f : fields) {
        SystemParams q = p;
        q.*f += 1e-3;
        CHECK(params_hash(q) != params_hash(p));
    }
}
