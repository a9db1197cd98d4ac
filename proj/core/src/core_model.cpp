#include "splitband/core_model.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "splitband/errors.hpp"
#include "splitband/special.hpp"
#include "splitband/units.hpp"

namespace splitband {

namespace {

constexpr double kHarmonicTolerance = 1e-12;

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
}

bool finite_all(std::initializer_list<double> values) {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

std::vector<std::string> validate(const SystemParams& p) {
    require(finite_all({p.detuning, p.kappa, p.gamma_m, p.omega_m, p.omega_d, p.omega_2,
                        p.g_mod, p.g_static, p.n_th, p.n_opt, p.homodyne_phase}),
            "system", "all parameters must be finite");
    require(p.kappa > 0.0, "kappa", "must be > 0");
    require(p.omega_m > 0.0, "omega_m", "must be > 0");
    require(p.omega_d > 0.0, "omega_d", "must be > 0");
    require(p.gamma_m >= 0.0, "gamma_m", "must be >= 0");
    require(p.omega_2 >= 0.0, "omega_2", "must be >= 0");
    require(p.g_mod >= 0.0, "g_mod", "must be >= 0");
    require(p.n_th >= 0.0, "n_th", "must be >= 0");
    require(p.n_opt >= 0.0, "n_opt", "must be >= 0");

    std::vector<std::string> warnings;
    if (p.omega_d > p.omega_m / 5.0) {
        std::ostringstream os;
        os << "omega_d = " << p.omega_d << " rad/s exceeds omega_m/5; the slow-modulation "
           << "picture (omega_m >> omega_d) is questionable";
        warnings.push_back(os.str());
    }
    return warnings;
}

std::uint64_t params_hash(const SystemParams& p) {
    const double fields[] = {p.detuning, p.kappa, p.gamma_m, p.omega_m, p.omega_d,
                             p.omega_2,  p.g_mod, p.g_static, p.n_th,  p.n_opt,
                             p.homodyne_phase};
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : fields) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

double TrapParams::wavenumber() const { return kTwoPi / wavelength; }

double TrapParams::well_position() const { return kTwoPi * well_index / wavenumber(); }

double TrapParams::unmodulated_frequency() const {
    const double k = wavenumber();
    return std::sqrt(2.0 * kHbar * k * k * well_depth * photon_number / mass);
}

void validate(const TrapParams& t) {
    require(std::isfinite(t.well_depth) && t.well_depth > 0.0, "well_depth", "must be > 0");
    require(std::isfinite(t.wavelength) && t.wavelength > 0.0, "wavelength", "must be > 0");
    require(std::isfinite(t.mass) && t.mass > 0.0, "mass", "must be > 0");
    require(std::isfinite(t.photon_number) && t.photon_number > 0.0, "photon_number",
            "must be > 0");
    require(std::isfinite(t.omega_t) && t.omega_t >= 0.0, "omega_t", "must be >= 0");
    require(t.well_index >= 0, "well_index", "must be >= 0");
}

cplx chi_o(double omega, const SystemParams& p) {
    return 1.0 / cplx(p.kappa / 2.0, -(omega + p.detuning));
}

cplx chi_m(double omega, double omega_m, double gamma_m) {
    if (gamma_m == 0.0 && omega == omega_m)
        throw SingularEvaluationError("chi_m: undamped oscillator evaluated on resonance");
    return 1.0 / cplx(gamma_m / 2.0, -(omega - omega_m));
}

cplx chi_m(double omega, const SystemParams& p) { return chi_m(omega, p.omega_m, p.gamma_m); }

cplx eta(double omega, const SystemParams& p) {
    return chi_o(omega, p) - std::conj(chi_o(-omega, p));
}

double ratio_prediction(double omega_d, double omega_2) {
    if (!(omega_d > 0.0)) throw ConfigError("omega_d: must be > 0");
    if (!(omega_2 >= 0.0)) throw ConfigError("omega_2: must be >= 0");
    const double lo = 2.0 * omega_d - omega_2;
    const double hi = 2.0 * omega_d + omega_2;
    return (lo * lo) / (hi * hi);
}

double n_backaction(const SystemParams& p) {
    if (!(p.omega_m > 0.0)) throw ConfigError("omega_m: must be > 0");
    const double q = p.kappa / (4.0 * p.omega_m);
    return q * q;
}

double pressure_to_gamma(double pressure_mbar) {
    if (!(pressure_mbar >= 0.0)) throw ConfigError("pressure: must be >= 0");
    return 0.2e4 * pressure_mbar;
}

double thermal_occupancy(double temperature, double omega) {
    if (temperature <= 0.0) return 0.0;
    // Bose-Einstein; reduces to k_B T / (hbar omega) for the usual regimes.
    return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

TrapModulation trap_modulation(const TrapParams& trap, double xd) {
    validate(trap);
    if (!(std::abs(xd) < kPi / 2.0))
        throw ConfigError("drive amplitude X_d: |X_d| must be < pi/2 to stay inside the well");

    TrapModulation m;
    m.drive_amplitude = xd;
    m.omega_m0 = trap.unmodulated_frequency();

    // cos(X sin t) = J_0(X) + 2 sum_{n>=1} J_2n(X) cos(2 n t)
    const int cut = jacobi_anger_cutoff(xd, kHarmonicTolerance);
    m.frequency_sq_harmonics.push_back(bessel_j(0, xd));
    for (int n = 1; 2 * n <= cut; ++n) m.frequency_sq_harmonics.push_back(2.0 * bessel_j(2 * n, xd));

    const double j0 = m.frequency_sq_harmonics.front();
    m.omega_m = m.omega_m0 * std::sqrt(j0);
    m.omega_2 = m.omega_m0 * bessel_j(2, xd) / (2.0 * std::sqrt(j0));

    const double k = trap.wavenumber();
    m.x_zpf = std::sqrt(kHbar / (2.0 * trap.mass * m.omega_m));
    m.coupling_scale = k * trap.well_depth * std::sqrt(trap.photon_number) * m.x_zpf;

    // sin(X sin t) = 2 sum_{n>=0} J_{2n+1}(X) sin((2n+1) t)
    for (int n = 0; 2 * n + 1 <= std::max(cut, 1); ++n)
        m.coupling_harmonics.push_back(2.0 * m.coupling_scale * bessel_j(2 * n + 1, xd));
    m.g_mod = m.coupling_harmonics.front() / 2.0;
    return m;
}

SystemParams derive_from_trap(const TrapParams& trap, double xd, SystemParams base) {
    const TrapModulation m = trap_modulation(trap, xd);
    base.omega_m = m.omega_m;
    base.omega_2 = std::abs(m.omega_2);
    base.g_mod = std::abs(m.g_mod);
    return base;
}

double drive_amplitude_from_trap(const TrapParams& trap) {
    validate(trap);
    const double omega0 = trap.unmodulated_frequency();
    const double lever = (trap.omega_t * trap.omega_t) / (omega0 * omega0) * 2.0 *
                         trap.wavenumber() * trap.well_position();
    double xd = lever;
    for (int it = 0; it < 200; ++it) {
        const double j0 = bessel_j(0, xd);
        if (!(j0 > 0.0)) break;
        const double next = lever / j0;
        if (std::abs(next - xd) < 1e-14 * std::max(1.0, xd)) {
            xd = next;
            break;
        }
        xd = next;
    }
    if (!(xd < kPi / 2.0))
        throw ConfigError("trap drive pushes the particle out of the harmonic region (X_d >= pi/2)");
    return xd;
}

}  // namespace splitband
