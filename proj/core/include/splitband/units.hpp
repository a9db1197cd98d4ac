#pragma once

#include <numbers>

namespace splitband {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 exact / recommended values, SI.
inline constexpr double kHbar = 1.054571817e-34;    // J s
inline constexpr double kBoltzmann = 1.380649e-23;  // J / K

// Configs usually quote frequencies as f = omega / 2pi.
constexpr double khz_to_rad_s(double f_khz) { return kTwoPi * 1.0e3 * f_khz; }
constexpr double rad_s_to_khz(double omega) { return omega / (kTwoPi * 1.0e3); }

}  // namespace splitband
