#include "splitband/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "splitband/errors.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace splitband {

namespace {

constexpr int kLdab = 3 * CombSystem::kBandwidth + 1;
const cplx kI(0.0, 1.0);

std::vector<std::array<cplx, kChannelCount>> zero_coefficients(int truncation) {
    return std::vector<std::array<cplx, kChannelCount>>(2 * truncation + 1, {cplx{}, cplx{}, cplx{}, cplx{}});
}

}  // namespace

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::optical_in: return "optical_in";
        case Channel::optical_in_dagger: return "optical_in_dagger";
        case Channel::mech_in: return "mech_in";
        case Channel::mech_in_dagger: return "mech_in_dagger";
    }
    return "?";
}

double occupancy_weight(Channel c, const SystemParams& p) {
    switch (c) {
        case Channel::optical_in: return p.n_opt;
        case Channel::optical_in_dagger: return p.n_opt + 1.0;
        case Channel::mech_in: return p.n_th;
        case Channel::mech_in_dagger: return p.n_th + 1.0;
    }
    return 0.0;
}

std::string_view to_string(Observable o) {
    switch (o) {
        case Observable::displacement: return "displacement";
        case Observable::shifted_displacement: return "shifted_displacement";
        case Observable::cavity_quadrature: return "cavity_quadrature";
        case Observable::output_quadrature: return "output_quadrature";
        case Observable::imprecision: return "imprecision";
    }
    return "?";
}

std::string_view spectrum_name(Observable o) {
    switch (o) {
        case Observable::displacement: return "S_xx";
        case Observable::shifted_displacement: return "S_XpmXpm";
        case Observable::cavity_quadrature: return "S_yy";
        case Observable::output_quadrature: return "S_yout";
        case Observable::imprecision: return "S_imp";
    }
    return "?";
}

cplx NoiseTransfer::coefficient(Channel c, int offset) const {
    if (offset < -truncation || offset > truncation) return {};
    return coefficients[offset + truncation][static_cast<int>(c)];
}

double NoiseTransfer::density(const SystemParams& p) const {
    std::array<double, kChannelCount> w{};
    for (int c = 0; c < kChannelCount; ++c) w[c] = occupancy_weight(static_cast<Channel>(c), p);
    double s = 0.0;
    for (const auto& row : coefficients)
        for (int c = 0; c < kChannelCount; ++c) s += std::norm(row[c]) * w[c];
    return s;
}

CombSystem::CombSystem(const SystemParams& p, double omega, int truncation)
    : truncation_(truncation), size_(4 * (2 * truncation + 1)), omega_(omega),
      band_(static_cast<std::size_t>(kLdab) * size_, cplx{}) {
    source_scale_ = {std::sqrt(p.kappa), std::sqrt(p.kappa), std::sqrt(p.gamma_m),
                     std::sqrt(p.gamma_m)};
}

void CombSystem::set(int row, int col, cplx v) {
    band_[static_cast<std::size_t>(2 * kBandwidth + row - col) + static_cast<std::size_t>(col) * kLdab] = v;
}

void CombSystem::add(int row, int col, cplx v) {
    band_[static_cast<std::size_t>(2 * kBandwidth + row - col) + static_cast<std::size_t>(col) * kLdab] += v;
}

cplx CombSystem::at(int row, int col) const {
    if (std::abs(row - col) > kBandwidth) return {};
    return band_[static_cast<std::size_t>(2 * kBandwidth + row - col) + static_cast<std::size_t>(col) * kLdab];
}

Eigen::MatrixXcd CombSystem::dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size_, size_);
    for (int c = 0; c < size_; ++c)
        for (int r = std::max(0, c - kBandwidth); r <= std::min(size_ - 1, c + kBandwidth); ++r)
            m(r, c) = at(r, c);
    return m;
}

CombSystem build_comb_system(const SystemParams& p, double omega, int truncation) {
    if (truncation < 2) throw ConfigError("truncation: comb order must be >= 2");
    CombSystem sys(p, omega, truncation);
    const int N = truncation;
    const double gm = p.g_mod;
    const double g0 = p.g_static;

    auto couple_x = [&](int row, int offset, cplx v) {
        if (offset < -N || offset > N) return;
        sys.add(row, sys.index(offset, Field::b), v);
        sys.add(row, sys.index(offset, Field::b_dag), v);
    };
    auto couple_y = [&](int row, int offset, cplx v) {
        if (offset < -N || offset > N) return;
        sys.add(row, sys.index(offset, Field::a), v);
        sys.add(row, sys.index(offset, Field::a_dag), v);
    };

    for (int n = -N; n <= N; ++n) {
        const double w = omega + n * p.omega_d;

        // a:  [kappa/2 - i(w + Delta)] a - g_mod (x_{n+1} - x_{n-1}) - i g0 x_n = sqrt(kappa) a_in
        const int ra = sys.index(n, Field::a);
        sys.set(ra, ra, cplx(p.kappa / 2.0, -(w + p.detuning)));
        couple_x(ra, n + 1, -gm);
        couple_x(ra, n - 1, gm);
        couple_x(ra, n, -kI * g0);

        // a^dag:  [kappa/2 - i(w - Delta)] a^dag + g_mod (x_{n+1} - x_{n-1}) + i g0 x_n
        const int rad = sys.index(n, Field::a_dag);
        sys.set(rad, rad, cplx(p.kappa / 2.0, -(w - p.detuning)));
        couple_x(rad, n + 1, gm);
        couple_x(rad, n - 1, -gm);
        couple_x(rad, n, kI * g0);

        // b:  [Gamma/2 - i(w - w_M)] b + i w_2 (b_{n+2} + b_{n-2}) - g_mod (y_{n+1} - y_{n-1}) - i g0 y_n
        const int rb = sys.index(n, Field::b);
        sys.set(rb, rb, cplx(p.gamma_m / 2.0, -(w - p.omega_m)));
        if (p.omega_2 != 0.0) {
            if (n + 2 <= N) sys.add(rb, sys.index(n + 2, Field::b), kI * p.omega_2);
            if (n - 2 >= -N) sys.add(rb, sys.index(n - 2, Field::b), kI * p.omega_2);
        }
        couple_y(rb, n + 1, -gm);
        couple_y(rb, n - 1, gm);
        couple_y(rb, n, -kI * g0);

        // b^dag:  [Gamma/2 - i(w + w_M)] b^dag - i w_2 (...) + g_mod (y_{n+1} - y_{n-1}) + i g0 y_n
        const int rbd = sys.index(n, Field::b_dag);
        sys.set(rbd, rbd, cplx(p.gamma_m / 2.0, -(w + p.omega_m)));
        if (p.omega_2 != 0.0) {
            if (n + 2 <= N) sys.add(rbd, sys.index(n + 2, Field::b_dag), -kI * p.omega_2);
            if (n - 2 >= -N) sys.add(rbd, sys.index(n - 2, Field::b_dag), -kI * p.omega_2);
        }
        couple_y(rbd, n + 1, gm);
        couple_y(rbd, n - 1, -gm);
        couple_y(rbd, n, kI * g0);
    }
    return sys;
}

const NoiseTransfer& TransferSet::get(Observable o) const {
    switch (o) {
        case Observable::displacement: return displacement;
        case Observable::shifted_displacement: return shifted;
        case Observable::cavity_quadrature: return cavity;
        case Observable::output_quadrature: return output;
        case Observable::imprecision: return imprecision;
    }
    return displacement;
}

TransferSet solve_transfer(double omega, const SystemParams& p, int truncation) {
    CombSystem sys = build_comb_system(p, omega, truncation);
    const int n = sys.size();
    const int kl = CombSystem::kBandwidth;
    const int ku = CombSystem::kBandwidth;

    // The factorization overwrites the band, so work on a copy.
    std::vector<cplx> ab = sys.band();

    double anorm = 0.0;
    for (int c = 0; c < n; ++c) {
        double col = 0.0;
        for (int r = std::max(0, c - ku); r <= std::min(n - 1, c + kl); ++r) col += std::abs(sys.at(r, c));
        anorm = std::max(anorm, col);
    }

    std::vector<lapack_int> ipiv(n);
    lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), kLdab, ipiv.data());
    double rcond = 0.0;
    if (info == 0) {
        info = LAPACKE_zgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, ab.data(), kLdab, ipiv.data(),
                              anorm, &rcond);
    }
    if (info != 0 || !(rcond * kMaxConditionNumber >= 1.0)) {
        std::ostringstream os;
        os << "comb system is numerically singular at omega = " << omega
           << " rad/s (reciprocal condition " << rcond << ")";
        throw SingularSystemError(os.str(), rcond > 0.0 ? 1.0 / rcond : INFINITY);
    }

    // Rows of M^{-1} for the selected unknowns: solve M^T w = e.
    constexpr int kRhs = 4;  // x, X, a, a^dag
    std::vector<cplx> rhs(static_cast<std::size_t>(n) * kRhs, cplx{});
    auto e = [&](int col, int idx) -> cplx& { return rhs[static_cast<std::size_t>(col) * n + idx]; };
    e(0, sys.index(0, Field::b)) = 1.0;
    e(0, sys.index(0, Field::b_dag)) = 1.0;
    e(1, sys.index(1, Field::b)) = 1.0;
    e(1, sys.index(1, Field::b_dag)) = 1.0;
    e(1, sys.index(-1, Field::b)) = -1.0;
    e(1, sys.index(-1, Field::b_dag)) = -1.0;
    e(2, sys.index(0, Field::a)) = 1.0;
    e(3, sys.index(0, Field::a_dag)) = 1.0;

    info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'T', n, kl, ku, kRhs, ab.data(), kLdab, ipiv.data(),
                          rhs.data(), n);
    if (info != 0) throw NumericalError("zgbtrs failed while solving the comb system");

    auto extract = [&](int col, Observable obs) {
        NoiseTransfer t;
        t.observable = obs;
        t.omega = omega;
        t.truncation = truncation;
        t.coefficients = zero_coefficients(truncation);
        for (int off = -truncation; off <= truncation; ++off) {
            for (int f = 0; f < 4; ++f) {
                const Field field = static_cast<Field>(f);
                t.coefficients[off + truncation][f] =
                    e(col, sys.index(off, field)) * sys.source_scale(field);
            }
        }
        return t;
    };

    TransferSet out;
    out.reciprocal_condition = rcond;
    out.displacement = extract(0, Observable::displacement);
    out.shifted = extract(1, Observable::shifted_displacement);
    const NoiseTransfer field_a = extract(2, Observable::cavity_quadrature);
    const NoiseTransfer field_a_dag = extract(3, Observable::cavity_quadrature);

    out.cavity = field_a;
    for (std::size_t k = 0; k < out.cavity.coefficients.size(); ++k)
        for (int c = 0; c < kChannelCount; ++c)
            out.cavity.coefficients[k][c] += field_a_dag.coefficients[k][c];

    // Detected quadrature of a_out = a_in - sqrt(kappa) a with LO phase theta.
    const cplx lo = std::polar(1.0, -p.homodyne_phase);
    const cplx lo_dag = std::conj(lo);
    const double sk = std::sqrt(p.kappa);

    // Imprecision: the part reaching the detector without involving the
    // mechanics, lo (1 - kappa chi_o(w)) a_in + c.c.-partner.
    out.imprecision.observable = Observable::imprecision;
    out.imprecision.omega = omega;
    out.imprecision.truncation = truncation;
    out.imprecision.coefficients = zero_coefficients(truncation);
    auto& imp0 = out.imprecision.coefficients[truncation];
    imp0[static_cast<int>(Channel::optical_in)] = lo * (1.0 - p.kappa * chi_o(omega, p));
    imp0[static_cast<int>(Channel::optical_in_dagger)] =
        lo_dag * (1.0 - p.kappa * std::conj(chi_o(-omega, p)));

    out.output.observable = Observable::output_quadrature;
    out.output.omega = omega;
    out.output.truncation = truncation;
    out.output.coefficients = zero_coefficients(truncation);
    for (std::size_t k = 0; k < out.output.coefficients.size(); ++k)
        for (int c = 0; c < kChannelCount; ++c)
            out.output.coefficients[k][c] =
                -sk * (lo * field_a.coefficients[k][c] + lo_dag * field_a_dag.coefficients[k][c]);
    out.output.coefficients[truncation][static_cast<int>(Channel::optical_in)] += lo;
    out.output.coefficients[truncation][static_cast<int>(Channel::optical_in_dagger)] += lo_dag;
    return out;
}

const SpectrumGrid& SpectraBundle::get(Observable o) const {
    switch (o) {
        case Observable::displacement: return displacement;
        case Observable::shifted_displacement: return shifted;
        case Observable::cavity_quadrature: return cavity;
        case Observable::output_quadrature: return output;
        case Observable::imprecision: break;
    }
    throw ConfigError("imprecision is only available through decompose_output");
}

namespace {

SpectrumGrid empty_grid(Observable o, std::span<const double> omega, const SystemParams& p,
                        int truncation) {
    SpectrumGrid g;
    g.omega.assign(omega.begin(), omega.end());
    g.value.assign(omega.size(), 0.0);
    g.quantity = std::string(spectrum_name(o));
    g.convention = kUnsymmetrizedConvention;
    g.source = "floquet_comb";
    g.params_hash = params_hash(p);
    g.truncation = truncation;
    if (o == Observable::output_quadrature || o == Observable::imprecision)
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "homodyne, a_out e^{-i theta} + h.c., theta = %.6g rad",
                      p.homodyne_phase);
        g.detection = buf;
    }
    return g;
}

void check_axis(std::span<const double> omega) {
    for (std::size_t i = 1; i < omega.size(); ++i)
        if (!(omega[i] > omega[i - 1])) throw ConfigError("frequency axis must be strictly increasing");
}

}  // namespace

SpectraBundle all_spectra(std::span<const double> omega, const SystemParams& p, int truncation) {
    validate(p);
    check_axis(omega);
    SpectraBundle b{empty_grid(Observable::displacement, omega, p, truncation),
                    empty_grid(Observable::shifted_displacement, omega, p, truncation),
                    empty_grid(Observable::cavity_quadrature, omega, p, truncation),
                    empty_grid(Observable::output_quadrature, omega, p, truncation)};
    const long count = static_cast<long>(omega.size());
    std::string failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        try {
            const TransferSet t = solve_transfer(omega[i], p, truncation);
            b.displacement.value[i] = t.displacement.density(p);
            b.shifted.value[i] = t.shifted.density(p);
            b.cavity.value[i] = t.cavity.density(p);
            b.output.value[i] = t.output.density(p);
        } catch (const std::exception& ex) {
#pragma omp critical
            if (failure.empty()) failure = ex.what();
        }
    }
    if (!failure.empty()) throw SingularSystemError(failure, INFINITY);
    return b;
}

SpectrumGrid psd(Observable which, std::span<const double> omega, const SystemParams& p,
                 int truncation) {
    if (which == Observable::imprecision) return decompose_output(omega, p, truncation).imprecision;
    SpectraBundle b = all_spectra(omega, p, truncation);
    switch (which) {
        case Observable::displacement: return std::move(b.displacement);
        case Observable::shifted_displacement: return std::move(b.shifted);
        case Observable::cavity_quadrature: return std::move(b.cavity);
        default: return std::move(b.output);
    }
}

OutputDecomposition decompose_output(std::span<const double> omega, const SystemParams& p,
                                     int truncation) {
    validate(p);
    check_axis(omega);
    OutputDecomposition d{empty_grid(Observable::output_quadrature, omega, p, truncation),
                          empty_grid(Observable::imprecision, omega, p, truncation),
                          empty_grid(Observable::output_quadrature, omega, p, truncation),
                          empty_grid(Observable::output_quadrature, omega, p, truncation)};
    d.motion.quantity = "S_yout_motion";
    d.imprecision.quantity = "S_yout_imprecision";
    d.interference.quantity = "S_yout_interference";
    d.interference.signed_values = true;

    std::array<double, kChannelCount> w{};
    for (int c = 0; c < kChannelCount; ++c) w[c] = occupancy_weight(static_cast<Channel>(c), p);

    const long count = static_cast<long>(omega.size());
    std::string failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        try {
            const TransferSet t = solve_transfer(omega[i], p, truncation);
            double mot = 0.0, imp = 0.0, cross = 0.0, tot = 0.0;
            for (std::size_t k = 0; k < t.output.coefficients.size(); ++k) {
                for (int c = 0; c < kChannelCount; ++c) {
                    const cplx ti = t.imprecision.coefficients[k][c];
                    const cplx to = t.output.coefficients[k][c];
                    const cplx tm = to - ti;
                    mot += std::norm(tm) * w[c];
                    imp += std::norm(ti) * w[c];
                    cross += 2.0 * std::real(std::conj(ti) * tm) * w[c];
                    tot += std::norm(to) * w[c];
                }
            }
            d.motion.value[i] = mot;
            d.imprecision.value[i] = imp;
            d.interference.value[i] = cross;
            d.total.value[i] = tot;
        } catch (const std::exception& ex) {
#pragma omp critical
            if (failure.empty()) failure = ex.what();
        }
    }
    if (!failure.empty()) throw SingularSystemError(failure, INFINITY);
    return d;
}

std::vector<double> sideband_axis(const SystemParams& p, int points, double span, bool negative) {
    if (points < 2) throw ConfigError("grid points: need at least 2");
    const double lo = p.omega_m - span * p.omega_d;
    const double hi = p.omega_m + span * p.omega_d;
    std::vector<double> axis = linear_axis(lo, hi, points);
    if (negative) {
        std::reverse(axis.begin(), axis.end());
        for (double& v : axis) v = -v;
    }
    return axis;
}

std::vector<double> two_sided_axis(const SystemParams& p, int points_per_side, double span) {
    std::vector<double> axis = sideband_axis(p, points_per_side, span, true);
    const std::vector<double> pos = sideband_axis(p, points_per_side, span, false);
    if (!(pos.front() > axis.back()))
        throw ConfigError("sideband window overlaps zero frequency; reduce the span");
    axis.insert(axis.end(), pos.begin(), pos.end());
    return axis;
}

}  // namespace splitband
