#pragma once

#include <span>
#include <vector>

#include "splitband/core_model.hpp"
#include "splitband/floquet.hpp"
#include "splitband/spectrum.hpp"

namespace splitband {

/// One term group of the iterative expansion: every product of free
/// susceptibilities with `coupling_order` coupling vertices and
/// `frequency_order` omega_2 vertices.
struct OrderGroup {
    int coupling_order = 0;
    int frequency_order = 0;
    NoiseTransfer transfer;
};

/// Iterative (Born) expansion of the modulated Langevin equations around the
/// free susceptibilities, truncated at total order 3 in {g, omega_2}:
///   (0,0) shifted thermal noise, (1,0) backaction, (0,1) omega_2 thermal
///   correction, (1,1) omega_2 backaction, and every remaining group up to
///   cubic order. It diverges once the optical damping rivals Gamma_M.
struct PerturbativeTransfer {
    NoiseTransfer total;
    std::vector<OrderGroup> groups;
};

inline constexpr int kPerturbativeTruncation = 8;

/// Expansion for x or X+- (observable must be displacement or
/// shifted_displacement). Adds a warning to `warnings` (if given) when the
/// couplings are not small against kappa and omega_m.
PerturbativeTransfer perturbative_solution(double omega, const SystemParams& params,
                                           Observable observable = Observable::shifted_displacement,
                                           std::vector<std::string>* warnings = nullptr);

SpectrumGrid perturbative_psd(Observable observable, std::span<const double> omega,
                              const SystemParams& params);

/// Bracketed factor multiplying the thermal weight chi_M(omega + s omega_d)
/// in X+-, s = +1 or -1: 1 + i omega_2 chi_M(omega - s omega_d).
cplx thermal_weight_correction(double omega, int side, const SystemParams& params);

/// chi_M(omega + s omega_d) times its correction.
cplx replaced_thermal_weight(double omega, int side, const SystemParams& params);

/// Peak ratio obtained from the corrected weights evaluated at
/// omega_m +- omega_d; tends to ratio_prediction for Gamma_M << omega_d.
double perturbative_ratio(const SystemParams& params);

}  // namespace splitband
