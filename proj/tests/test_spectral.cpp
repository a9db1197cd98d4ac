#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "splitband/errors.hpp"
#include "splitband/floquet.hpp"
#include "splitband/spectral_analysis.hpp"
#include "splitband/units.hpp"

using namespace splitband;

namespace {

double band_integral(const SpectrumGrid& s, double lo, double hi) {
    double a = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s.omega[i - 1] < lo || s.omega[i] > hi) continue;
        a += 0.5 * (s.value[i] + s.value[i - 1]) * (s.omega[i] - s.omega[i - 1]);
    }
    return a / kTwoPi;
}

struct Twin {
    double wm = 1000.0, wd = 40.0;
    double h_minus = 3.0, h_plus = 1.2, width = 6.0, floor = 0.25;
};

SpectrumGrid twin_spectrum(const Twin& t, int side, int points = 2001, double jitter = 0.0,
                           std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SpectrumGrid s;
    s.quantity = "synthetic";
    const double lo = t.wm - 6.0 * t.wd, hi = t.wm + 6.0 * t.wd;
    for (int i = 0; i < points; ++i) {
        const double w = lo + (hi - lo) * i / (points - 1);
        double v = t.floor + oracle::lorentzian(w, t.wm - t.wd, t.h_minus, t.width) +
                   oracle::lorentzian(w, t.wm + t.wd, t.h_plus, t.width);
        if (jitter > 0.0) v *= 1.0 + jitter * n(rng);
        s.omega.push_back(side * w);
        s.value.push_back(v);
    }
    if (side < 0) {
        std::reverse(s.omega.begin(), s.omega.end());
        std::reverse(s.value.begin(), s.value.end());
    }
    return s;
}

}  // namespace

TEST_CASE("Welch PSD of a sinusoid puts its power at +-omega_0") {
    const double fs = 1000.0, w0 = kTwoPi * 62.5, A = 1.7;
    std::vector<double> x(1 << 16);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = A * std::sin(w0 * i / fs);
    WelchOptions o;
    o.segment = 1024;
    const SpectrumGrid s = welch_psd(x, fs, o);
    const double bin = s.omega[1] - s.omega[0];
    const long ip = argmax_in(s, 0.0, s.omega.back());
    CHECK(std::abs(s.omega[ip] - w0) <= bin);
    CHECK(band_integral(s, w0 - 10 * bin, w0 + 10 * bin) == doctest::Approx(A * A / 4.0).epsilon(1e-3));
    CHECK(band_integral(s, -w0 - 10 * bin, -w0 + 10 * bin) == doctest::Approx(A * A / 4.0).epsilon(1e-3));
}

TEST_CASE("Welch PSD of white noise is flat at sigma^2 / fs") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const double fs = 1000.0, sigma = 0.5;
    std::vector<double> x(1 << 18);
    for (double& v : x) v = sigma * n(rng);
    const SpectrumGrid s = welch_psd(x, fs);
    double mean = 0.0;
    for (double v : s.value) mean += v;
    mean /= static_cast<double>(s.size());
    CHECK(mean == doctest::Approx(sigma * sigma / fs).epsilon(0.01));
    CHECK(s.omega.front() == doctest::Approx(-kPi * fs));
    CHECK(s.omega.back() < kPi * fs);
}

TEST_CASE("Welch PSD of an AR(1) process matches its exact spectrum") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    const double fs = 2000.0, phi = 0.95, sigma = 0.1;
    std::vector<double> x(1 << 19);
    double v = 0.0;
    for (double& s : x) {
        v = phi * v + sigma * n(rng);
        s = v;
    }
    WelchOptions o;
    o.segment = 2048;
    const SpectrumGrid s = welch_psd(x, fs, o);
    // Average over bands of 32 bins to beat down the estimator variance.
    const std::size_t band = 32;
    for (std::size_t i0 = 0; i0 + band <= s.size(); i0 += band) {
        double est = 0.0, ref = 0.0;
        for (std::size_t i = i0; i < i0 + band; ++i) {
            est += s.value[i];
            ref += oracle::ar1_psd(s.omega[i], phi, sigma, fs);
        }
        CHECK(est == doctest::Approx(ref).epsilon(0.06));
    }
}

TEST_CASE("single rectangular segment satisfies Parseval exactly") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(4096);
    for (double& v : x) v = 2.0 + n(rng);
    WelchOptions o;
    o.segment = x.size();
    o.window = Window::rectangular;
    o.overlap = 0.0;
    const double fs = 50.0;
    const SpectrumGrid s = welch_psd(x, fs, o);
    double mean = 0.0, var = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    const double dw = s.omega[1] - s.omega[0];
    double sum = 0.0;
    for (double v : s.value) sum += v * dw / kTwoPi;
    CHECK(sum == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("Welch rejects unusable input") {
    std::vector<double> x(100, 1.0);
    WelchOptions o;
    o.segment = 4096;
    CHECK_THROWS_AS(welch_psd(x, 1.0, o), InsufficientDataError);
    o.segment = 1000;  // not a power of two
    std::vector<double> y(5000, 1.0);
    CHECK_THROWS(welch_psd(y, 1.0, o));
}

TEST_CASE("averaging spectra is pointwise and demands identical axes") {
    SpectrumGrid a, b;
    a.omega = b.omega = {1.0, 2.0, 3.0};
    a.value = {1.0, 2.0, 3.0};
    b.value = {3.0, 2.0, 1.0};
    const std::vector<SpectrumGrid> both{a, b};
    const SpectrumGrid m = average_spectra(both);
    for (double v : m.value) CHECK(v == doctest::Approx(2.0));
    b.omega[1] = 2.5;
    const std::vector<SpectrumGrid> bad{a, b};
    CHECK_THROWS_AS(average_spectra(bad), NumericalError);
}

TEST_CASE("split-peak fit recovers noise-free Lorentzians on either side") {
    const Twin t;
    for (int side : {+1, -1}) {
        PeakSearchOptions o;
        o.side = side;
        const PeakReport r = find_split_peaks(twin_spectrum(t, side), t.wm, t.wd, o);
        CHECK(r.minus.center == doctest::Approx(side * (t.wm - t.wd)).epsilon(1e-8));
        CHECK(r.plus.center == doctest::Approx(side * (t.wm + t.wd)).epsilon(1e-8));
        CHECK(r.minus.height == doctest::Approx(t.h_minus).epsilon(1e-6));
        CHECK(r.plus.height == doctest::Approx(t.h_plus).epsilon(1e-6));
        CHECK(r.minus.width == doctest::Approx(t.width).epsilon(1e-6));
        CHECK(r.floor == doctest::Approx(t.floor).epsilon(1e-6));
        CHECK(r.r_floor == doctest::Approx(t.h_plus / t.h_minus).epsilon(1e-6));
        CHECK(r.area_ratio == doctest::Approx(t.h_plus / t.h_minus).epsilon(1e-6));
        CHECK(r.rms_residual < 1e-8);
    }
}

TEST_CASE("split-peak fit tolerates multiplicative estimator noise") {
    const Twin t;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const PeakReport r = find_split_peaks(twin_spectrum(t, +1, 2001, 0.05, seed), t.wm, t.wd);
        CHECK(r.r_floor == doctest::Approx(t.h_plus / t.h_minus).epsilon(0.03));
        CHECK(std::abs(r.r_floor - t.h_plus / t.h_minus) < 4.0 * r.r_floor_err + 1e-3);
    }
}

TEST_CASE("a held floor is honoured by the fit") {
    Twin t;
    t.floor = 0.0;
    PeakSearchOptions o;
    o.fixed_floor = 0.0;
    const PeakReport r = find_split_peaks(twin_spectrum(t, +1), t.wm, t.wd, o);
    CHECK(r.floor == 0.0);
    CHECK(r.r_floor == doctest::Approx(t.h_plus / t.h_minus).epsilon(1e-6));
}

TEST_CASE("coarse grids are refused") {
    const Twin t;
    CHECK_THROWS_AS(find_split_peaks(twin_spectrum(t, +1, 30), t.wm, t.wd), InsufficientDataError);
}

TEST_CASE("floor-referenced ratio uses the second spectrum as baseline") {
    const Twin t;
    const SpectrumGrid total = twin_spectrum(t, +1);
    SpectrumGrid floor = total;
    for (double& v : floor.value) v = t.floor;
    const double r = floor_referenced_ratio(total, floor, t.wm - t.wd, t.wm + t.wd);
    const double sm = oracle::lorentzian(t.wm - t.wd, t.wm - t.wd, t.h_minus, t.width) +
                      oracle::lorentzian(t.wm - t.wd, t.wm + t.wd, t.h_plus, t.width);
    const double sp = oracle::lorentzian(t.wm + t.wd, t.wm - t.wd, t.h_minus, t.width) +
                      oracle::lorentzian(t.wm + t.wd, t.wm + t.wd, t.h_plus, t.width);
    // Centres fall between grid points; the library interpolates linearly.
    CHECK(r == doctest::Approx(sp / sm).epsilon(1e-4));
    for (double& v : floor.value) v = 2.0;
    CHECK(floor_referenced_ratio(total, floor, t.wm - t.wd, t.wm + t.wd) < 0.0);
}

TEST_CASE("sideband area of a Lorentzian pair") {
    Twin t;
    t.floor = 0.0;
    const SpectrumGrid s = twin_spectrum(t, +1, 20001);
    const double hw = 6.0 * t.wd;
    // Exact area of each Lorentzian truncated to the window, over d omega / 2 pi.
    auto part = [&](double c, double h) {
        const double g = t.width / 2.0;
        return h * g * (std::atan((t.wm + hw - c) / g) - std::atan((t.wm - hw - c) / g)) / kTwoPi;
    };
    const double ref = part(t.wm - t.wd, t.h_minus) + part(t.wm + t.wd, t.h_plus);
    CHECK(sideband_area(s, t.wm, +1, hw) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("occupancy calibration is self-consistent and linear") {
    Twin t;
    t.floor = 0.1;
    const SpectrumGrid ref = twin_spectrum(t, +1, 4001);
    const OccupancyCalibration cal = calibrate_occupancy(ref, 50.0, t.wm, 4.0 * t.wd, t.floor);
    CHECK(sideband_occupancy(ref, t.floor, cal, t.wm) == doctest::Approx(50.0).epsilon(1e-12));
    for (double k : {0.01, 0.3, 2.0}) {
        SpectrumGrid s = ref;
        for (double& v : s.value) v = t.floor + k * (v - t.floor);
        CHECK(sideband_occupancy(s, t.floor, cal, t.wm) == doctest::Approx(50.0 * k).epsilon(1e-10));
    }
    SpectrumGrid empty = ref;
    for (double& v : empty.value) v = 0.0;
    CHECK_THROWS_AS(sideband_occupancy(empty, t.floor, cal, t.wm), NumericalError);
}

TEST_CASE("Stokes ratio of a free oscillator is n / (n + 1)") {
    SystemParams p;
    p.kappa = 1e5;
    p.detuning = -1e5;
    p.omega_m = khz_to_rad_s(46);
    p.omega_d = khz_to_rad_s(0.7);
    p.gamma_m = 200.0;
    for (double n : {0.0, 0.5, 4.0, 100.0}) {
        p.n_th = n;
        const auto axis = two_sided_axis(p, 8000, 40.0);
        const SpectrumGrid s = psd(Observable::displacement, axis, p, 4);
        // Window wide against Gamma so the truncated tails are negligible.
        // The counter-rotating tail adds ~1e-4 even at n = 0.
        const double r = stokes_antistokes(s, p.omega_m, 40.0 * p.omega_d);
        CHECK(std::abs(r - n / (n + 1.0)) < 2e-3 * n / (n + 1.0) + 1e-4);
    }
}

TEST_CASE("two-sided analysis reports both groups and the larger one as primary") {
    Twin t;
    SpectrumGrid pos = twin_spectrum(t, +1);
    t.h_minus *= 2.0;
    t.h_plus *= 2.0;
    SpectrumGrid neg = twin_spectrum(t, -1);
    SpectrumGrid both;
    both.omega = neg.omega;
    both.value = neg.value;
    both.omega.insert(both.omega.end(), pos.omega.begin(), pos.omega.end());
    both.value.insert(both.value.end(), pos.value.begin(), pos.value.end());
    const SidebandReport r = analyze_sidebands(both, t.wm, t.wd);
    REQUIRE(r.positive);
    REQUIRE(r.negative);
    REQUIRE(r.stokes_ratio);
    CHECK(*r.stokes_ratio == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.primary_side == -1);
    CHECK(r.positive->r_floor == doctest::Approx(r.negative->r_floor).epsilon(1e-6));
}
