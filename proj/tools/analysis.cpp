#include "analysis.hpp"

#include <algorithm>
#include <cmath>

#include "splitband/errors.hpp"

namespace splitband::cli {

Fitted fit_sidebands(const SpectrumGrid& s, double omega_m, double omega_d) {
    Fitted f;
    try {
        f.report = analyze_sidebands(s, omega_m, omega_d, default_search(s));
    } catch (const NumericalError& e) {
        f.error = e.what();
    }
    return f;
}

namespace {

std::vector<double> axis_for(const RunConfig& rc) {
    const auto& g = rc.grid;
    return g.two_sided ? two_sided_axis(rc.system, g.points_per_side, g.span)
                       : sideband_axis(rc.system, g.points_per_side, g.span);
}

}  // namespace

AnalyticResult run_analytic(const RunConfig& rc, bool with_occupancy) {
    const SystemParams& p = rc.system;
    const std::vector<double> axis = axis_for(rc);
    AnalyticResult r;
    r.spectra = all_spectra(axis, p, rc.grid.truncation);
    r.decomposition = decompose_output(axis, p, rc.grid.truncation);

    r.shifted = fit_sidebands(r.spectra.shifted, p.omega_m, p.omega_d);
    r.cavity = fit_sidebands(r.spectra.cavity, p.omega_m, p.omega_d);
    r.output = fit_sidebands(r.decomposition.total, p.omega_m, p.omega_d);

    if (r.shifted.report) {
        const PeakReport& x = r.shifted.report->primary();
        r.stokes_ratio = r.shifted.report->stokes_ratio;
        try {
            r.r_output_floor_referenced = floor_referenced_ratio(
                r.decomposition.total, r.decomposition.imprecision, x.minus.center, x.plus.center);
        } catch (const NumericalError&) {
        }
    }

    if (with_occupancy) {
        try {
            SystemParams ref = p;
            ref.n_th = 1e6;
            ref.gamma_m = std::max(p.gamma_m, 1.0);
            const double hw = 4.0 * p.omega_d;
            const std::vector<double> pos = sideband_axis(p, rc.grid.points_per_side, rc.grid.span);
            const OutputDecomposition ref_out = decompose_output(pos, ref, rc.grid.truncation);
            const SpectrumGrid ref_x = psd(Observable::displacement, pos, ref, rc.grid.truncation);
            // The displacement spectrum is in zero-point units, so its +omega
            // area is the reference occupancy itself.
            r.reference_occupancy = sideband_area(ref_x, p.omega_m, +1, hw);
            const double ref_floor = interpolate(ref_out.imprecision, p.omega_m);
            const OccupancyCalibration cal =
                calibrate_occupancy(ref_out.total, *r.reference_occupancy, p.omega_m, hw, ref_floor, +1);
            const double floor = interpolate(r.decomposition.imprecision, p.omega_m);
            r.occupancy = sideband_occupancy(r.decomposition.total, floor, cal, p.omega_m);
        } catch (const NumericalError& e) {
            r.occupancy_error = e.what();
        }
    }
    return r;
}

std::optional<double> headline_r(const AnalyticResult& r) {
    if (!r.cavity.report) return std::nullopt;
    return r.cavity.report->primary().r_floor;
}

namespace {

nlohmann::json fitted_json(const Fitted& f) {
    if (f.report) return to_json(*f.report);
    return {{"fit_error", f.error}};
}

}  // namespace

nlohmann::json report_json(const RunConfig& rc, const AnalyticResult& r) {
    const SystemParams& p = rc.system;
    nlohmann::json j;
    j["name"] = rc.name;
    j["system"] = to_json(p);
    j["derived_fields"] = rc.derived_fields;
    j["warnings"] = rc.warnings;
    j["truncation"] = rc.grid.truncation;
    j["ratio_prediction"] = ratio_prediction(p.omega_d, p.omega_2);
    j["n_backaction"] = n_backaction(p);
    j["r_definition"] = "height(omega_m + omega_d) / height(omega_m - omega_d), heights above the fitted floor";
    if (auto h = headline_r(r)) j["r"] = *h;
    else j["r"] = nullptr;
    j["r_source"] = "S_yy";
    j["S_XpmXpm"] = fitted_json(r.shifted);
    j["S_yy"] = fitted_json(r.cavity);
    j["S_yout"] = fitted_json(r.output);
    if (r.r_output_floor_referenced)
        j["S_yout"]["r_imprecision_referenced"] = *r.r_output_floor_referenced;
    j["stokes_antistokes_ratio"] = r.stokes_ratio ? nlohmann::json(*r.stokes_ratio) : nlohmann::json();
    j["stokes_source"] = "S_XpmXpm";
    nlohmann::json occ;
    if (r.occupancy) occ["n_ph"] = *r.occupancy;
    if (r.reference_occupancy) occ["reference_occupancy"] = *r.reference_occupancy;
    if (!r.occupancy_error.empty()) occ["error"] = r.occupancy_error;
    occ["method"] = "S_yout +omega sideband area over the imprecision floor, calibrated against "
                    "a thermal reference (n_th = 1e6) whose occupancy is its S_xx +omega area";
    j["occupancy"] = occ;
    return j;
}

}  // namespace splitband::cli
