#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "splitband/spectrum.hpp"

namespace splitband {

// ---- Welch PSD -----------------------------------------------------------

enum class Window { hann, rectangular };

struct WelchOptions {
    std::size_t segment = 4096;  // power of two
    double overlap = 0.5;        // fraction in [0, 0.9]
    Window window = Window::hann;
};

/// Two-sided density in 1/Hz on an angular axis (rad/s), strictly increasing
/// from -pi fs to just below +pi fs. Each segment has its mean removed, so the
/// integral over d omega / 2 pi equals the series variance.
SpectrumGrid welch_psd(std::span<const double> series, double sample_rate,
                       const WelchOptions& options = {});

/// Pointwise mean of spectra on identical axes.
SpectrumGrid average_spectra(std::span<const SpectrumGrid> spectra);

// ---- split peaks -----------------------------------------------------------

struct PeakFit {
    double center = 0.0;       // rad/s (signed)
    double height = 0.0;       // Lorentzian amplitude above the floor
    double width = 0.0;        // FWHM, rad/s
    double center_err = 0.0;
    double height_err = 0.0;
    double width_err = 0.0;
    double sampled_value = 0.0;  // spectrum at the fitted centre, floor included
    double area() const;         // under d omega / 2 pi
};

/// Fit of a constant floor plus two Lorentzians near omega_m -+ omega_d on one
/// side of zero frequency. `minus` is the peak at |omega| = omega_m - omega_d,
/// `plus` the one at |omega| = omega_m + omega_d.
struct PeakReport {
    int side = +1;
    double omega_m = 0.0;
    double omega_d = 0.0;
    PeakFit minus;
    PeakFit plus;
    double floor = 0.0;
    double floor_err = 0.0;
    double r_raw = 0.0;        // sampled(plus) / sampled(minus), floor included
    double r_floor = 0.0;      // height(plus) / height(minus)
    double r_floor_err = 0.0;
    double area_ratio = 0.0;   // area(plus) / area(minus)
    double rms_residual = 0.0; // relative to the largest data value
    int iterations = 0;
    std::vector<double> residuals;
};

struct PeakSearchOptions {
    int side = +1;
    double window = 2.0;                 // fit over |omega| in omega_m +- window*omega_d
    std::optional<double> fixed_floor;   // hold the floor instead of fitting it
    int max_iterations = 400;
};

/// Displacement spectra (S_xx, S_XpmXpm) carry no detection floor, so their
/// fits hold it at zero; detected spectra fit it.
PeakSearchOptions default_search(const SpectrumGrid& spectrum);

/// Throws FitError on non-convergence or a negative fitted height, and
/// InsufficientDataError if the grid has fewer than 8 bins per omega_d.
PeakReport find_split_peaks(const SpectrumGrid& spectrum, double omega_m, double omega_d,
                            const PeakSearchOptions& options = {});

/// (S(c+) - F(c+)) / (S(c-) - F(c-)) with the floor taken from a second
/// spectrum on the same axis. Signed: a negative value means the feature at
/// c+ lies below the floor.
double floor_referenced_ratio(const SpectrumGrid& total, const SpectrumGrid& floor,
                              double center_minus, double center_plus);

// ---- sideband weights -----------------------------------------------------

/// Integrated weight of the split-sideband group around side * omega_m,
/// |omega - side omega_m| <= half_width, minus a constant floor.
double sideband_area(const SpectrumGrid& spectrum, double omega_m, int side, double half_width,
                     double floor = 0.0);

struct OccupancyCalibration {
    double area_per_phonon = 0.0;
    double reference_occupancy = 0.0;
    double half_width = 0.0;
    int side = +1;
};

/// Calibrate from a reference spectrum with known occupancy. The positive
/// sideband of an unsymmetrized spectrum is proportional to n.
OccupancyCalibration calibrate_occupancy(const SpectrumGrid& reference, double known_occupancy,
                                         double omega_m, double half_width, double floor = 0.0,
                                         int side = +1);

/// Floor-subtracted sideband area in phonon units. Throws NumericalError
/// if the area is negative.
double sideband_occupancy(const SpectrumGrid& spectrum, double floor,
                          const OccupancyCalibration& calibration, double omega_m);

/// Weight of the +omega group over the -omega group.
double stokes_antistokes(const SpectrumGrid& spectrum, double omega_m, double half_width,
                         double floor = 0.0);

/// Both sides where available, plus the Stokes ratio if the axis spans +-omega.
struct SidebandReport {
    std::optional<PeakReport> positive;
    std::optional<PeakReport> negative;
    std::optional<double> stokes_ratio;
    int primary_side = +1;  // side with the larger sideband area
    const PeakReport& primary() const;
};

SidebandReport analyze_sidebands(const SpectrumGrid& spectrum, double omega_m, double omega_d,
                                 const PeakSearchOptions& options = {});

nlohmann::json to_json(const PeakFit& fit);
nlohmann::json to_json(const PeakReport& report);
nlohmann::json to_json(const SidebandReport& report);

}  // namespace splitband
