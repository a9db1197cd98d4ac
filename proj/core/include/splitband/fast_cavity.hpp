#pragma once

#include <span>
#include <string>
#include <vector>

#include "splitband/core_model.hpp"
#include "splitband/spectrum.hpp"

namespace splitband {

/// How the fast mechanical phase Phi_M(t) = omega_m t + beta sin(2 omega_d t)
/// gets its modulation index beta.
enum class PhaseIndex {
    integrated,  // beta = omega_2 / omega_d, the integral of omega_M(t)
    printed,     // beta = omega_2 / (2 omega_d)
};

/// Fast-cavity ansatz for u(t) = 2 k x(t):
///   u(t) = X_d sin(omega_d t) + X_M cos(Phi_M(t)),
/// and the detected signal is cos u(t).
struct AnsatzParams {
    double drive_amplitude = 0.0;  // X_d
    double thermal_amplitude = 0.0;  // X_M, RMS of 2 k x_M
    double omega_m = 0.0;
    double omega_d = 0.0;
    double omega_2 = 0.0;
    double line_width = 0.0;  // Gamma_line, rad/s
    PhaseIndex phase_index = PhaseIndex::integrated;

    double beta() const;
};

void validate(const AnsatzParams& params);

struct Line {
    double omega = 0.0;
    double weight = 0.0;   // |amplitude|^2; sum equals <cos^2 u>
    cplx amplitude;        // complex Fourier amplitude at omega
};

struct LineSpectrum {
    std::vector<Line> lines;  // sorted by frequency, both signs
    std::vector<std::string> warnings;
};

inline constexpr double kLineTolerance = 1e-8;

/// Discrete line spectrum of cos u(t). `max_harmonic` caps every Bessel
/// series; 0 picks each cutoff from kLineTolerance. A warning is added when
/// the cap leaves Bessel weights above the tolerance.
LineSpectrum line_spectrum(const AnsatzParams& params, int max_harmonic = 0);

/// cos u(t) sampled at rate `sample_rate` (Hz) for `duration` seconds.
/// Rejects sample rates at or below 8 omega_m / 2pi.
std::vector<double> sampled_ansatz(const AnsatzParams& params, double sample_rate,
                                   double duration);

/// Lines convolved with unit-area Lorentzians of FWHM line_width, as a
/// two-sided density in 1/Hz.
SpectrumGrid convolved_spectrum(const LineSpectrum& lines, const AnsatzParams& params,
                                std::span<const double> omega);

/// Sum of line weights at omega_m + omega_d over omega_m - omega_d.
double line_ratio(const LineSpectrum& lines, const AnsatzParams& params);

/// Weight of the line nearest `omega` (within 1e-6 omega_d), zero if absent.
double line_weight_at(const LineSpectrum& lines, double omega, double omega_d);

}  // namespace splitband
