#pragma once

// Reference values computed without the library's solvers.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

struct Static {
    double kappa, detuning, gamma_m, omega_m, g, n_th, n_opt;
};

struct StaticSpectra {
    double xx, yy, yout;
};

// Standard linearized optomechanics with a constant coupling, solved by hand:
//   a = chi_o (sqrt(kappa) a_in - i g x),  b = chi_m (sqrt(Gamma) b_in - i g y)
// so x (1 + g^2 X eta) = sqrt(Gamma) X_th - i g sqrt(kappa) X Y_th.
inline StaticSpectra static_spectra(double w, const Static& s) {
    auto chio = [&](double v) { return 1.0 / cplx(s.kappa / 2.0, -(v + s.detuning)); };
    auto chim = [&](double v) { return 1.0 / cplx(s.gamma_m / 2.0, -(v - s.omega_m)); };
    const cplx I(0.0, 1.0);
    const cplx eta = chio(w) - std::conj(chio(-w));
    const cplx X = chim(w) - std::conj(chim(-w));
    const cplx D = 1.0 + s.g * s.g * X * eta;
    const double sk = std::sqrt(s.kappa), sg = std::sqrt(s.gamma_m);

    // channels: a_in, a_in^dag, b_in, b_in^dag
    const cplx x[4] = {-I * s.g * sk * X * chio(w) / D, -I * s.g * sk * X * std::conj(chio(-w)) / D,
                       sg * chim(w) / D, sg * std::conj(chim(-w)) / D};
    const cplx yth[4] = {sk * chio(w), sk * std::conj(chio(-w)), 0.0, 0.0};
    const double weight[4] = {s.n_opt, s.n_opt + 1.0, s.n_th, s.n_th + 1.0};
    StaticSpectra out{0, 0, 0};
    for (int c = 0; c < 4; ++c) {
        const cplx y = -I * s.g * eta * x[c] + yth[c];
        const cplx direct = c < 2 ? 1.0 : 0.0;
        const cplx yo = direct - sk * y;
        out.xx += std::norm(x[c]) * weight[c];
        out.yy += std::norm(y) * weight[c];
        out.yout += std::norm(yo) * weight[c];
    }
    return out;
}

// Split-peak ratio written out directly from the two corrected weights
// |1 + omega_2 / (2 omega_d)|^2 and |1 - omega_2 / (2 omega_d)|^2.
inline double ratio_law(double omega_d, double omega_2) {
    const double up = 1.0 - omega_2 / (2.0 * omega_d);
    const double down = 1.0 + omega_2 / (2.0 * omega_d);
    return (up * up) / (down * down);
}

// Fourier coefficients of a 2pi-periodic function by the trapezoid rule,
// which is spectrally accurate for smooth periodic integrands.
template <class F>
double cos_coefficient(F f, int n, int samples = 4096) {
    double s = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * pi * i / samples;
        s += f(t) * std::cos(n * t);
    }
    return 2.0 * s / samples;
}
template <class F>
double sin_coefficient(F f, int n, int samples = 4096) {
    double s = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * pi * i / samples;
        s += f(t) * std::sin(n * t);
    }
    return 2.0 * s / samples;
}
template <class F>
double mean_over_period(F f, int samples = 4096) {
    return cos_coefficient(f, 0, samples) / 2.0;
}

// Complex amplitude c of the c e^{i omega t} component of a sampled signal
// over an integer number of periods.
inline cplx fourier_amplitude(const std::vector<double>& v, double sample_rate, double omega) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        s += v[i] * std::exp(cplx(0.0, -omega * t));
    }
    return s / static_cast<double>(v.size());
}

// Exact two-sided PSD (per Hz, angular axis) of a discretely sampled
// Ornstein-Uhlenbeck process x_{k+1} = phi x_k + sigma xi_k.
inline double ar1_psd(double omega, double phi, double sigma, double fs) {
    const double c = std::cos(omega / fs);
    return sigma * sigma / (1.0 + phi * phi - 2.0 * phi * c) / fs;
}

inline double lorentzian(double w, double center, double height, double fwhm) {
    const double u = 2.0 * (w - center) / fwhm;
    return height / (1.0 + u * u);
}

}  // namespace oracle
