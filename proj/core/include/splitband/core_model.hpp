#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace splitband {

using cplx = std::complex<double>;

/// Constants of the linearized, slowly modulated optomechanical model.
///
/// All rates are angular (rad/s). `kappa` is the full amplitude decay rate of
/// the cavity; configs quoting kappa/2 are converted on ingestion. Red
/// detuning is `detuning < 0`.
///
/// The coupling is g(t) = g_static + 2 g_mod sin(omega_d t) and the mechanical
/// frequency is omega_M(t) = omega_m + 2 omega_2 cos(2 omega_d t).
///
/// `homodyne_phase` selects the detected output quadrature
/// a_out e^{-i theta} + a_out^dag e^{i theta}; theta = 0 is the quadrature in
/// phase with the intracavity mean field, y = a + a^dag.
struct SystemParams {
    double detuning = 0.0;
    double kappa = 0.0;
    double gamma_m = 0.0;
    double omega_m = 0.0;
    double omega_d = 0.0;
    double omega_2 = 0.0;
    double g_mod = 0.0;
    double g_static = 0.0;
    double n_th = 0.0;
    double n_opt = 0.0;
    double homodyne_phase = 0.0;
};

/// Throws ConfigError on a violated invariant; returns human-readable
/// warnings for soft conditions (e.g. modulation that is not slow).
std::vector<std::string> validate(const SystemParams& params);

/// Stable 64-bit hash over every physics field (FNV-1a of the raw doubles).
std::uint64_t params_hash(const SystemParams& params);

/// Physical constants of a hybrid electro-optical trap.
struct TrapParams {
    double well_depth = 0.0;      // A, rad/s per photon
    double wavelength = 1064e-9;  // m
    double mass = 0.0;            // kg
    double omega_t = 0.0;         // ion-trap secular frequency, rad/s
    int well_index = 0;           // N, antinode at k x_N = 2 pi N
    double photon_number = 0.0;   // |alpha|^2
    double pressure_mbar = -1.0;  // optional; negative when absent

    double wavenumber() const;
    double well_position() const;         // x_N
    double unmodulated_frequency() const; // sqrt(2 hbar k^2 A |alpha|^2 / m)
};

void validate(const TrapParams& trap);

// Susceptibilities, in seconds.
cplx chi_o(double omega, const SystemParams& params);
cplx chi_m(double omega, double omega_m, double gamma_m);
cplx chi_m(double omega, const SystemParams& params);
cplx eta(double omega, const SystemParams& params);

/// Small-coupling split-peak ratio height(omega_m + omega_d) /
/// height(omega_m - omega_d) = (2 w_d - w_2)^2 / (2 w_d + w_2)^2.
double ratio_prediction(double omega_d, double omega_2);

/// Backaction-limited occupancy (kappa / 4 omega_m)^2.
double n_backaction(const SystemParams& params);

/// Damping from residual gas, Gamma_M = 0.2e4 * P[mbar] s^-1.
double pressure_to_gamma(double pressure_mbar);

/// Mechanical bath occupancy for temperature T at frequency omega.
double thermal_occupancy(double temperature, double omega);

/// Modulation content of a particle whose equilibrium oscillates as
/// 2 k x_0(t) = X_d sin(omega_d t) inside one optical well.
///
/// The squared frequency is omega_M^2(t) = Omega_0^2 cos(2 k x_0(t)) and the
/// linear coupling is g(t) = k A |alpha| x_zpf sin(2 k x_0(t)). Both are
/// expanded with the Jacobi-Anger identity; only the leading harmonics are
/// carried into SystemParams, the rest is kept here.
struct TrapModulation {
    double drive_amplitude = 0.0;  // X_d
    double omega_m0 = 0.0;         // Omega_0, unmodulated
    double omega_m = 0.0;          // mean frequency
    double omega_2 = 0.0;
    double g_mod = 0.0;
    double coupling_scale = 0.0;   // k A |alpha| x_zpf
    double x_zpf = 0.0;            // m, at omega_m
    // omega_M^2(t) / Omega_0^2 = sum_n c_n cos(2 n omega_d t), n >= 0.
    std::vector<double> frequency_sq_harmonics;
    // g(t) = sum_n s_n sin((2 n + 1) omega_d t), n >= 0, in rad/s.
    std::vector<double> coupling_harmonics;
};

TrapModulation trap_modulation(const TrapParams& trap, double drive_amplitude);

/// Fills omega_m, omega_2 and g_mod of `base` from the trap.
/// Rejects |X_d| >= pi/2.
SystemParams derive_from_trap(const TrapParams& trap, double drive_amplitude,
                              SystemParams base);

/// X_d from the ion-trap geometry, X_d = (omega_t^2 / omega_M^2) 2 k x_N, with
/// omega_M^2 = Omega_0^2 J_0(X_d) solved self-consistently.
double drive_amplitude_from_trap(const TrapParams& trap);

}  // namespace splitband
