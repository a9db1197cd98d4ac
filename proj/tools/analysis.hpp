#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "splitband/config.hpp"
#include "splitband/floquet.hpp"
#include "splitband/spectral_analysis.hpp"

namespace splitband::cli {

/// A sideband analysis that may have failed; the message is kept for the
/// report instead of aborting the run.
struct Fitted {
    std::optional<SidebandReport> report;
    std::string error;
};

Fitted fit_sidebands(const SpectrumGrid& spectrum, double omega_m, double omega_d);

struct AnalyticResult {
    SpectraBundle spectra;
    OutputDecomposition decomposition;
    Fitted shifted;   // S_XpmXpm
    Fitted cavity;    // S_yy
    Fitted output;    // S_yout
    std::optional<double> r_output_floor_referenced;
    std::optional<double> occupancy;
    std::optional<double> reference_occupancy;
    std::optional<double> stokes_ratio;
    std::string occupancy_error;
};

/// Spectra on the configured grid plus every derived diagnostic. With
/// `with_occupancy`, a thermal reference (n_th = 1e6, Gamma_M >= 1 s^-1) is
/// solved as well to calibrate S_yout areas in phonons.
AnalyticResult run_analytic(const RunConfig& config, bool with_occupancy = true);

nlohmann::json report_json(const RunConfig& config, const AnalyticResult& result);

/// Headline r: floor-referenced height ratio of S_yy on its primary side.
std::optional<double> headline_r(const AnalyticResult& result);

}  // namespace splitband::cli
