#include "splitband/spectral_analysis.hpp"

#include <cmath>

#include "splitband/errors.hpp"
#include "splitband/units.hpp"

namespace splitband {

double sideband_area(const SpectrumGrid& s, double omega_m, int side, double half_width,
                     double floor) {
    const double c = side * omega_m;
    const double lo = c - half_width, hi = c + half_width;
    if (s.size() < 2 || s.omega.front() > lo || s.omega.back() < hi)
        throw InsufficientDataError("sideband window is not covered by the spectrum axis");
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s.omega[i - 1] < lo || s.omega[i] > hi) continue;
        acc += 0.5 * (s.value[i] + s.value[i - 1] - 2.0 * floor) * (s.omega[i] - s.omega[i - 1]);
    }
    return acc / kTwoPi;
}

OccupancyCalibration calibrate_occupancy(const SpectrumGrid& reference, double known,
                                         double omega_m, double half_width, double floor,
                                         int side) {
    if (!(known > 0.0)) throw ConfigError("calibration: reference occupancy must be > 0");
    const double area = sideband_area(reference, omega_m, side, half_width, floor);
    if (!(area > 0.0)) throw NumericalError("calibration: reference sideband area is not positive");
    return {area / known, known, half_width, side};
}

double sideband_occupancy(const SpectrumGrid& s, double floor, const OccupancyCalibration& cal,
                          double omega_m) {
    if (!(cal.area_per_phonon > 0.0)) throw ConfigError("occupancy: calibration is empty");
    const double area = sideband_area(s, omega_m, cal.side, cal.half_width, floor);
    if (area < 0.0)
        throw NumericalError("occupancy: floor exceeds the sideband region (negative area " +
                             std::to_string(area) + ")");
    return area / cal.area_per_phonon;
}

double stokes_antistokes(const SpectrumGrid& s, double omega_m, double half_width, double floor) {
    if (s.size() < 2 || s.omega.front() > -omega_m + half_width)
        throw InsufficientDataError("Stokes ratio: spectrum has no negative-frequency data");
    const double pos = sideband_area(s, omega_m, +1, half_width, floor);
    const double neg = sideband_area(s, omega_m, -1, half_width, floor);
    if (!(neg > 0.0)) throw NumericalError("Stokes ratio: negative-frequency weight is not positive");
    return pos / neg;
}

const PeakReport& SidebandReport::primary() const {
    if (primary_side < 0 && negative) return *negative;
    if (positive) return *positive;
    if (negative) return *negative;
    throw InsufficientDataError("no sideband report available");
}

SidebandReport analyze_sidebands(const SpectrumGrid& s, double omega_m, double omega_d,
                                 const PeakSearchOptions& options) {
    SidebandReport out;
    const double reach = omega_m + options.window * omega_d;
    PeakSearchOptions o = options;
    if (s.omega.back() >= reach) {
        o.side = +1;
        out.positive = find_split_peaks(s, omega_m, omega_d, o);
    }
    if (s.omega.front() <= -reach) {
        o.side = -1;
        out.negative = find_split_peaks(s, omega_m, omega_d, o);
    }
    if (!out.positive && !out.negative)
        throw InsufficientDataError("spectrum does not cover either sideband window");
    if (out.positive && out.negative) {
        // Each group is measured above its own fitted floor.
        const double hw = 4.0 * omega_d;
        out.stokes_ratio = sideband_area(s, omega_m, +1, hw, out.positive->floor) /
                           sideband_area(s, omega_m, -1, hw, out.negative->floor);
        out.primary_side = *out.stokes_ratio >= 1.0 ? +1 : -1;
    } else {
        out.primary_side = out.positive ? +1 : -1;
    }
    return out;
}

PeakSearchOptions default_search(const SpectrumGrid& s) {
    PeakSearchOptions o;
    if (s.quantity == "S_xx" || s.quantity == "S_XpmXpm") o.fixed_floor = 0.0;
    return o;
}

nlohmann::json to_json(const PeakFit& f) {
    return {{"center_rad_s", f.center},     {"height_per_hz", f.height},
            {"fwhm_rad_s", f.width},        {"center_err_rad_s", f.center_err},
            {"height_err_per_hz", f.height_err}, {"fwhm_err_rad_s", f.width_err},
            {"sampled_value_per_hz", f.sampled_value}, {"area", f.area()}};
}

nlohmann::json to_json(const PeakReport& r) {
    return {{"side", r.side},
            {"omega_m_rad_s", r.omega_m},
            {"omega_d_rad_s", r.omega_d},
            {"peak_minus", to_json(r.minus)},
            {"peak_plus", to_json(r.plus)},
            {"floor_per_hz", r.floor},
            {"floor_err_per_hz", r.floor_err},
            {"r_raw", r.r_raw},
            {"r_floor", r.r_floor},
            {"r_floor_err", r.r_floor_err},
            {"r_area", r.area_ratio},
            {"rms_residual_per_hz", r.rms_residual},
            {"iterations", r.iterations}};
}

nlohmann::json to_json(const SidebandReport& r) {
    nlohmann::json j;
    j["r_definition"] = "height(omega_m + omega_d) / height(omega_m - omega_d)";
    j["primary_side"] = r.primary_side;
    if (r.positive) j["positive"] = to_json(*r.positive);
    if (r.negative) j["negative"] = to_json(*r.negative);
    if (r.stokes_ratio) j["stokes_antistokes_ratio"] = *r.stokes_ratio;
    const PeakReport& p = r.primary();
    j["r"] = p.r_floor;
    j["r_err"] = p.r_floor_err;
    j["r_raw"] = p.r_raw;
    return j;
}

}  // namespace splitband
