#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "splitband/core_model.hpp"
#include "splitband/spectrum.hpp"

namespace splitband {

/// Input noise operators. Correlators are delta-normalized:
/// <a_in a_in^dag> = n_opt + 1, <a_in^dag a_in> = n_opt, likewise b_in with n_th.
enum class Channel : int { optical_in = 0, optical_in_dagger = 1, mech_in = 2, mech_in_dagger = 3 };
inline constexpr int kChannelCount = 4;

std::string_view to_string(Channel c);

/// Weight of a channel in <O^dag(w) O(w)> for O linear in the inputs.
double occupancy_weight(Channel c, const SystemParams& params);

enum class Observable {
    displacement,          // x(w), x = b + b^dag
    shifted_displacement,  // X(w) = x(w + w_d) - x(w - w_d)
    cavity_quadrature,     // y(w), y = a + a^dag
    output_quadrature,     // y_out = a_out + a_out^dag, a_out = a_in - sqrt(kappa) a
    imprecision,           // part of y_out independent of the mechanics
};

std::string_view to_string(Observable o);
std::string_view spectrum_name(Observable o);

/// Coefficients of one output operator at base frequency `omega` with
/// respect to every input channel at every comb frequency omega + n omega_d,
/// |n| <= truncation. Offsets outside the comb have exactly zero weight.
struct NoiseTransfer {
    Observable observable = Observable::displacement;
    double omega = 0.0;
    int truncation = 0;
    std::vector<std::array<cplx, kChannelCount>> coefficients;

    cplx coefficient(Channel c, int offset) const;
    /// Stationary unsymmetrized density: sum over channels and offsets of
    /// |coefficient|^2 times the occupancy weight.
    double density(const SystemParams& params) const;
};

/// Unknowns at each comb frequency.
enum class Field : int { a = 0, a_dag = 1, b = 2, b_dag = 3 };

/// The truncated frequency-comb system M u = R s for the modulated
/// Langevin equations, stored in LAPACK general-band layout.
///
/// Unknown/equation ordering is 4 (n + N) + field for comb offset n. The
/// g(t) vertex couples offsets at distance 1, the omega_M(t) vertex couples
/// b (and b^dag) at distance 2, so the half-bandwidth is 8.
class CombSystem {
public:
    static constexpr int kBandwidth = 8;

    CombSystem(const SystemParams& params, double omega, int truncation);

    int truncation() const { return truncation_; }
    int size() const { return size_; }
    double omega() const { return omega_; }

    static int index(int offset, Field f, int truncation) {
        return 4 * (offset + truncation) + static_cast<int>(f);
    }
    int index(int offset, Field f) const { return index(offset, f, truncation_); }

    cplx at(int row, int col) const;
    Eigen::MatrixXcd dense() const;
    /// sqrt(rate) multiplying the unit-normalized input on each row.
    double source_scale(Field f) const { return source_scale_[static_cast<int>(f)]; }

    /// Raw band storage (leading dimension 3 * kBandwidth + 1).
    const std::vector<cplx>& band() const { return band_; }

private:
    friend CombSystem build_comb_system(const SystemParams&, double, int);
    void set(int row, int col, cplx v);
    void add(int row, int col, cplx v);

    int truncation_;
    int size_;
    double omega_;
    std::array<double, 4> source_scale_{};
    std::vector<cplx> band_;
};

/// Assembles the comb system. Requires truncation >= 2.
CombSystem build_comb_system(const SystemParams& params, double omega, int truncation);

struct TransferSet {
    NoiseTransfer displacement;
    NoiseTransfer shifted;
    NoiseTransfer cavity;
    NoiseTransfer output;
    NoiseTransfer imprecision;
    double reciprocal_condition = 0.0;

    const NoiseTransfer& get(Observable o) const;
};

/// Solves the comb system at one base frequency. Throws SingularSystemError if
/// the estimated condition number exceeds 1e12.
TransferSet solve_transfer(double omega, const SystemParams& params, int truncation);

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr int kDefaultTruncation = 32;

struct SpectraBundle {
    SpectrumGrid displacement;
    SpectrumGrid shifted;
    SpectrumGrid cavity;
    SpectrumGrid output;

    const SpectrumGrid& get(Observable o) const;
};

SpectrumGrid psd(Observable which, std::span<const double> omega, const SystemParams& params,
                 int truncation = kDefaultTruncation);

/// All four spectra from one sweep over the axis.
SpectraBundle all_spectra(std::span<const double> omega, const SystemParams& params,
                          int truncation = kDefaultTruncation);

/// S_yout split into its motional part (thermal plus backaction-driven
/// motion seen through the cavity), the imprecision part (input noise reaching
/// the detector directly or cavity filtered), and their interference.
/// motion + imprecision + interference == total.
struct OutputDecomposition {
    SpectrumGrid motion;
    SpectrumGrid imprecision;
    SpectrumGrid interference;
    SpectrumGrid total;
};

OutputDecomposition decompose_output(std::span<const double> omega, const SystemParams& params,
                                     int truncation = kDefaultTruncation);

/// Default sideband window [omega_m - span*omega_d, omega_m + span*omega_d]
/// (negated and reversed if `negative`).
std::vector<double> sideband_axis(const SystemParams& params, int points, double span = 8.0,
                                  bool negative = false);

/// Negative window followed by the positive one, strictly increasing.
std::vector<double> two_sided_axis(const SystemParams& params, int points_per_side,
                                   double span = 8.0);

}  // namespace splitband
