#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace splitband {

/// A power spectral density sampled on a strictly increasing angular
/// frequency axis. Values are densities per Hz, i.e. the integral of `value`
/// over d(omega)/2pi is the variance of the underlying signal.
///
/// The axis may consist of several uniform windows (for instance a positive
/// and a mirrored negative sideband window); integrals are only taken over
/// caller-chosen sub-ranges.
struct SpectrumGrid {
    std::vector<double> omega;
    std::vector<double> value;
    std::string quantity;
    std::string unit = "1/Hz";
    std::string convention;
    std::string detection;
    std::string source;
    std::uint64_t params_hash = 0;
    int truncation = 0;
    bool signed_values = false;  // true for interference terms

    std::size_t size() const { return omega.size(); }
    /// Throws NumericalError if the axis is not strictly increasing, the sizes
    /// differ, or (unless signed_values) a value is negative.
    void check() const;
};

inline constexpr const char* kUnsymmetrizedConvention =
    "unsymmetrized <A^dag(w) A(w)>, stationary (modulation-averaged) part";
inline constexpr const char* kWelchConvention = "two-sided Welch estimate, per Hz";

/// Uniform axis of `points` samples on [lo, hi].
std::vector<double> linear_axis(double lo, double hi, int points);

/// Trapezoidal integral of the density over d(omega)/2pi on [lo, hi].
/// Only samples inside the interval contribute.
double integrate(const SpectrumGrid& spec, double lo, double hi);

/// Linear interpolation; throws if omega is outside the axis.
double interpolate(const SpectrumGrid& spec, double omega);

/// Index of the largest value with lo <= omega <= hi, or -1 if none.
long argmax_in(const SpectrumGrid& spec, double lo, double hi);

/// Restricts to lo <= omega <= hi.
SpectrumGrid slice(const SpectrumGrid& spec, double lo, double hi);

/// CSV with header `omega_rad_s,psd_value,convention`. Output is a pure
/// function of the grid contents.
void write_csv(const SpectrumGrid& spec, std::ostream& os);
SpectrumGrid read_csv(std::istream& is);

nlohmann::json to_json(const SpectrumGrid& spec);
SpectrumGrid spectrum_from_json(const nlohmann::json& j);

/// Writes `<stem>.csv` and `<stem>.json` and returns both paths.
std::vector<std::string> write_spectrum_files(const SpectrumGrid& spec, const std::string& stem);

}  // namespace splitband
