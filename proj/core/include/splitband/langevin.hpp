#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "splitband/core_model.hpp"

namespace splitband {

/// What the ion trap does to the particle.
enum class TrapDrive {
    ac,               // 1/2 m w_T^2 (x + x_N)^2 cos(w_d t)
    static_harmonic,  // 1/2 m w_T^2 x^2, time independent
    off,
};

struct NoiseSwitches {
    bool thermal = true;
    bool shot = true;
};

/// Configuration of one stochastic trajectory. The particle coordinate x is
/// measured from the antinode of well N; the cavity amplitude a is in units
/// of sqrt(photons).
struct SimConfig {
    TrapParams trap;
    double drive_rate = 0.0;    // E, sqrt(photons)/s; 0 means solve from trap.photon_number
    double detuning0 = 0.0;     // bare detuning Delta_0, rad/s
    double kappa = 0.0;         // full cavity decay, rad/s
    double gamma_m = 0.0;       // momentum damping, 1/s
    double omega_d = 0.0;       // ion-trap drive, rad/s
    double dt = 0.0;            // s
    double duration = 0.0;      // recorded span after the transient, s
    double transient_periods = 20.0;
    int sample_every = 1;
    std::uint64_t seed = 1;
    double temperature = 0.0;   // K
    NoiseSwitches noise;
    TrapDrive trap_drive = TrapDrive::ac;
    bool optical_force = true;
    double initial_x = 0.0;     // m
    double initial_p = -1.0;    // kg m/s; negative draws a thermal momentum

    double mechanical_frequency_estimate() const;
};

/// Throws ConfigError; returns warnings for soft problems.
std::vector<std::string> validate(const SimConfig& config);
std::uint64_t config_hash(const SimConfig& config);

/// Drive rate E that puts |a|^2 = photons in the cavity when the particle sits
/// at the antinode: E = sqrt(photons ((kappa/2)^2 + (Delta_0 + A)^2)).
double drive_for_photon_number(const SimConfig& config, double photons);

/// Bare detuning giving effective detuning `delta_eff` at the antinode.
double bare_detuning(double delta_eff, const TrapParams& trap);

struct Trajectory {
    double t0 = 0.0;
    double sample_interval = 0.0;  // s
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<double> x;
    std::vector<double> p;
    std::vector<cplx> a;
    // Input vacuum noise averaged over each sample interval; empty when shot
    // noise is off or the trajectory was loaded from disk.
    std::vector<cplx> a_in;

    std::size_t size() const { return x.size(); }
    double sample_rate() const { return 1.0 / sample_interval; }
};

/// Fixed-step stochastic Heun integration. Throws DivergenceError when the
/// state becomes non-finite or the particle leaves its well.
Trajectory integrate(const SimConfig& config);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct EmergentParams {
    Estimate drive_amplitude;  // X_d
    Estimate omega_m;          // mean mechanical frequency, rad/s
    Estimate omega_2;          // rad/s
    Estimate g_mod;            // rad/s
    Estimate photon_number;
    Estimate detuning;         // effective, rad/s
    SystemParams params;       // linear-model estimate, optical spring removed
};

/// Lock-in of 2 k x at omega_d gives X_d; the instantaneous frequency of the
/// fast motion, demodulated at 2 omega_d, gives omega_m and omega_2; g_mod
/// follows from the trap relations with the measured photon number and X_d.
/// Needs at least 50 modulation periods.
EmergentParams extract_emergent_params(const Trajectory& traj, const SimConfig& config);

/// theta-quadrature of the intracavity fluctuation relative to the mean field,
/// e^{-i(phi + theta)} (a - <a>) + c.c.
std::vector<double> cavity_quadrature(const Trajectory& traj, double theta = 0.0);

/// theta-quadrature of a_out = a_in - sqrt(kappa) a, referenced to the mean
/// intracavity phase. Requires recorded input noise when shot noise was on.
std::vector<double> cavity_output_quadrature(const Trajectory& traj, const SimConfig& config,
                                             double theta = 0.0);

// Persistence: binary record plus JSON sidecar, CSV for small runs.
void write_trajectory(const Trajectory& traj, const SimConfig& config,
                      const std::filesystem::path& stem);
Trajectory read_trajectory(const std::filesystem::path& binary_path);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

nlohmann::json to_json(const SimConfig& config);
nlohmann::json to_json(const EmergentParams& params);

}  // namespace splitband
