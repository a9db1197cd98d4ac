#include "splitband/langevin.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <random>
#include <sstream>

#include <fftw3.h>

#include "splitband/errors.hpp"
#include "splitband/special.hpp"
#include "splitband/units.hpp"

namespace splitband {

double SimConfig::mechanical_frequency_estimate() const {
    if (optical_force) return trap.unmodulated_frequency();
    return trap.omega_t;
}

double bare_detuning(double delta_eff, const TrapParams& trap) { return delta_eff - trap.well_depth; }

double drive_for_photon_number(const SimConfig& c, double photons) {
    const double delta = c.detuning0 + (c.optical_force ? c.trap.well_depth : 0.0);
    return std::sqrt(photons * (0.25 * c.kappa * c.kappa + delta * delta));
}

std::vector<std::string> validate(const SimConfig& c) {
    std::vector<std::string> warn;
    if (c.optical_force) validate(c.trap);
    if (!(c.trap.mass > 0.0)) throw ConfigError("trap.mass: must be > 0");
    if (!(c.dt > 0.0)) throw ConfigError("simulation.dt: timestep must be > 0");
    if (!(c.duration > 0.0)) throw ConfigError("simulation.duration: must be > 0");
    if (!(c.kappa > 0.0)) throw ConfigError("simulation.kappa: must be > 0");
    if (!(c.gamma_m >= 0.0)) throw ConfigError("simulation.gamma_m: must be >= 0");
    if (!(c.temperature >= 0.0)) throw ConfigError("simulation.temperature: must be >= 0");
    if (c.sample_every < 1) throw ConfigError("simulation.sample_every: must be >= 1");
    if (!(c.transient_periods >= 0.0)) throw ConfigError("simulation.transient_periods: must be >= 0");
    if (c.trap_drive == TrapDrive::ac && !(c.omega_d > 0.0))
        throw ConfigError("simulation.omega_d: must be > 0 with an AC trap");
    if (c.trap_drive != TrapDrive::off && !(c.trap.omega_t > 0.0))
        throw ConfigError("trap.omega_t: must be > 0 when the ion trap is on");
    const double wm = c.mechanical_frequency_estimate();
    double limit = kTwoPi / c.kappa;
    if (wm > 0.0) limit = std::min(limit, kTwoPi / wm);
    if (!(c.dt < 0.05 * limit))
        throw ConfigError("simulation.dt: must be below 0.05 min(2pi/omega_M, 2pi/kappa) = " +
                          std::to_string(0.05 * limit) + " s");
    if (c.omega_d > 0.0 && c.duration * c.omega_d / kTwoPi < 200.0)
        warn.push_back("duration covers fewer than 200 modulation periods");
    return warn;
}

std::uint64_t config_hash(const SimConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const double d[] = {c.trap.well_depth, c.trap.wavelength, c.trap.mass, c.trap.omega_t,
                        c.trap.photon_number, c.drive_rate, c.detuning0, c.kappa, c.gamma_m,
                        c.omega_d, c.dt, c.duration, c.transient_periods, c.temperature,
                        c.initial_x, c.initial_p};
    mix(d, sizeof d);
    const std::int64_t i[] = {c.trap.well_index, c.sample_every, static_cast<int>(c.trap_drive),
                              c.noise.thermal, c.noise.shot, c.optical_force};
    mix(i, sizeof i);
    return h;
}

namespace {

struct State {
    double x, p;
    cplx a;
};

struct Model {
    double m, k, hbar_a_k, well_depth, wt2, xn, gamma, kappa_half, delta0, drive, omega_d;
    bool optical;
    TrapDrive trap;

    State drift(const State& s, double trap_phase_cos) const {
        State d;
        double force = 0.0;
        double cos_sq = 1.0;
        if (optical) {
            const double arg = 2.0 * k * s.x;
            const double sn = std::sin(arg), cs = std::cos(arg);
            force -= hbar_a_k * std::norm(s.a) * sn;
            cos_sq = 0.5 * (1.0 + cs);
        }
        switch (trap) {
            case TrapDrive::ac: force -= m * wt2 * (s.x + xn) * trap_phase_cos; break;
            case TrapDrive::static_harmonic: force -= m * wt2 * s.x; break;
            case TrapDrive::off: break;
        }
        d.x = s.p / m;
        d.p = force - gamma * s.p;
        const double delta = delta0 + (optical ? well_depth * cos_sq : 0.0);
        d.a = cplx(-kappa_half, delta) * s.a + drive;
        return d;
    }
};

}  // namespace

Trajectory integrate(const SimConfig& c) {
    validate(c);
    Model md{};
    md.m = c.trap.mass;
    md.k = c.trap.wavenumber();
    md.well_depth = c.trap.well_depth;
    md.hbar_a_k = kHbar * c.trap.well_depth * md.k;
    md.wt2 = c.trap.omega_t * c.trap.omega_t;
    md.xn = c.trap.well_position();
    md.gamma = c.gamma_m;
    md.kappa_half = 0.5 * c.kappa;
    md.delta0 = c.detuning0;
    md.drive = c.drive_rate > 0.0 ? c.drive_rate
                                  : (c.trap.photon_number > 0.0
                                         ? drive_for_photon_number(c, c.trap.photon_number)
                                         : 0.0);
    md.omega_d = c.omega_d;
    md.optical = c.optical_force;
    md.trap = c.trap_drive;

    std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                      0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double dt = c.dt;
    const double thermal_amp = c.noise.thermal && c.gamma_m > 0.0 && c.temperature > 0.0
                                   ? std::sqrt(2.0 * c.trap.mass * c.gamma_m * kBoltzmann *
                                               c.temperature * dt)
                                   : 0.0;
    // Vacuum input: <a_in(t) a_in^*(t')> = delta(t - t') / 2, so each
    // quadrature increment has variance dt / 4.
    const double shot_amp = c.noise.shot ? std::sqrt(0.25 * dt) : 0.0;
    const double sqrt_kappa = std::sqrt(c.kappa);

    State s{c.initial_x, 0.0, cplx{}};
    if (c.initial_p >= 0.0) {
        s.p = c.initial_p;
    } else if (c.temperature > 0.0) {
        s.p = std::sqrt(c.trap.mass * kBoltzmann * c.temperature) * normal(rng);
    }
    // Cavity starts in its steady state for the initial particle position.
    {
        const double cos_sq = std::pow(std::cos(md.k * s.x), 2);
        const double delta = md.delta0 + (md.optical ? md.well_depth * cos_sq : 0.0);
        s.a = md.drive / cplx(md.kappa_half, -delta);
    }

    const long transient = c.omega_d > 0.0
                               ? static_cast<long>(std::ceil(c.transient_periods * kTwoPi / c.omega_d / dt))
                               : 0;
    const long samples = static_cast<long>(std::floor(c.duration / (dt * c.sample_every)));
    if (samples < 2) throw ConfigError("simulation.duration: shorter than two samples");
    const long total = transient + samples * static_cast<long>(c.sample_every);

    Trajectory tr;
    tr.dt = dt;
    tr.seed = c.seed;
    tr.config_hash = config_hash(c);
    tr.sample_interval = dt * c.sample_every;
    tr.t0 = static_cast<double>(transient + c.sample_every) * dt;
    tr.x.reserve(samples);
    tr.p.reserve(samples);
    tr.a.reserve(samples);
    if (c.noise.shot) tr.a_in.reserve(samples);

    double cos_now = std::cos(c.omega_d * 0.0);
    cplx in_acc{};
    const double half_pi = kPi / 2.0;
    for (long i = 0; i < total; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double cos_next = std::cos(c.omega_d * (t + dt));
        const double dwp = thermal_amp != 0.0 ? thermal_amp * normal(rng) : 0.0;
        cplx dwa{};
        if (shot_amp != 0.0) {
            const double re = normal(rng), im = normal(rng);
            dwa = cplx(re, im) * shot_amp;
        }
        const State f0 = md.drift(s, cos_now);
        State pred{s.x + f0.x * dt, s.p + f0.p * dt + dwp, s.a + f0.a * dt + sqrt_kappa * dwa};
        const State f1 = md.drift(pred, cos_next);
        s.x += 0.5 * (f0.x + f1.x) * dt;
        s.p += 0.5 * (f0.p + f1.p) * dt + dwp;
        s.a += 0.5 * (f0.a + f1.a) * dt + sqrt_kappa * dwa;
        cos_now = cos_next;

        if (!std::isfinite(s.x) || !std::isfinite(s.p) || !std::isfinite(s.a.real()) ||
            !std::isfinite(s.a.imag()) || (md.optical && std::abs(md.k * s.x) > half_pi)) {
            std::ostringstream os;
            os << "trajectory diverged at t = " << t + dt << " s (seed " << c.seed << "): x = " << s.x
               << " m, k x = " << md.k * s.x << ", |a|^2 = " << std::norm(s.a);
            throw DivergenceError(os.str());
        }

        if (i >= transient) {
            in_acc += dwa;
            if ((i - transient + 1) % c.sample_every == 0) {
                tr.x.push_back(s.x);
                tr.p.push_back(s.p);
                tr.a.push_back(s.a);
                if (c.noise.shot) tr.a_in.push_back(in_acc / tr.sample_interval);
                in_acc = {};
            }
        }
    }
    return tr;
}

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Analytic signal of x restricted to |omega - center| < half_band (positive
// frequencies only), and its time derivative.
void analytic_band(const std::vector<double>& x, double rate, double center, double half_band,
                   std::vector<cplx>& z, std::vector<cplx>& zdot) {
    const int n = static_cast<int>(x.size());
    std::unique_ptr<fftw_complex, FftwFree> buf(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
    std::unique_ptr<fftw_complex, FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
    for (int i = 0; i < n; ++i) {
        buf.get()[i][0] = x[i];
        buf.get()[i][1] = 0.0;
    }
    fftw_plan fwd = fftw_plan_dft_1d(n, buf.get(), spec.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    // FFTW_FORWARD uses e^{-i...}; bin k >= 0 holds frequency +k rate / n,
    // which carries the e^{+i omega t} component.
    std::vector<cplx> zs(n), ds(n);
    for (int k = 0; k < n; ++k) {
        const int kk = k <= n / 2 ? k : k - n;
        const double w = kTwoPi * rate * kk / n;
        const cplx v(spec.get()[k][0], spec.get()[k][1]);
        if (w > 0.0 && std::abs(w - center) < half_band) {
            zs[k] = 2.0 * v / static_cast<double>(n);
            ds[k] = zs[k] * cplx(0.0, w);
        }
    }
    auto inverse = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        for (int k = 0; k < n; ++k) {
            buf.get()[k][0] = in[k].real();
            buf.get()[k][1] = in[k].imag();
        }
        fftw_plan bwd = fftw_plan_dft_1d(n, buf.get(), spec.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(bwd);
        fftw_destroy_plan(bwd);
        out.resize(n);
        for (int i = 0; i < n; ++i) out[i] = cplx(spec.get()[i][0], spec.get()[i][1]);
    };
    inverse(zs, z);
    inverse(ds, zdot);
}

Estimate mean_and_error(const std::vector<double>& blocks) {
    Estimate e;
    const double n = static_cast<double>(blocks.size());
    for (double b : blocks) e.value += b;
    e.value /= n;
    double var = 0.0;
    for (double b : blocks) var += (b - e.value) * (b - e.value);
    e.stderr_ = blocks.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    return e;
}

}  // namespace

EmergentParams extract_emergent_params(const Trajectory& tr, const SimConfig& c) {
    if (!(c.omega_d > 0.0)) throw ConfigError("extraction needs omega_d > 0");
    const double span = tr.size() * tr.sample_interval;
    if (span * c.omega_d / kTwoPi < 50.0)
        throw InsufficientDataError("extraction needs at least 50 modulation periods");
    const double k = c.trap.wavenumber();
    const std::size_t n = tr.size();
    constexpr int kBlocks = 10;
    const std::size_t block = n / kBlocks;

    // Slow drive: lock-in of 2 k x at omega_d, and the cavity averages.
    std::vector<double> xd_b, nph_b, det_b;
    for (int b = 0; b < kBlocks; ++b) {
        cplx acc{};
        double nph = 0.0, cs = 0.0;
        for (std::size_t i = b * block; i < (b + 1) * block; ++i) {
            const double t = tr.t0 + static_cast<double>(i) * tr.sample_interval;
            acc += 2.0 * k * tr.x[i] * std::polar(1.0, c.omega_d * t);
            nph += std::norm(tr.a[i]);
            cs += std::pow(std::cos(k * tr.x[i]), 2);
        }
        xd_b.push_back(2.0 * std::abs(acc) / static_cast<double>(block));
        nph_b.push_back(nph / static_cast<double>(block));
        det_b.push_back(c.detuning0 + (c.optical_force ? c.trap.well_depth : 0.0) * cs /
                                          static_cast<double>(block));
    }

    EmergentParams out;
    out.drive_amplitude = mean_and_error(xd_b);
    out.photon_number = mean_and_error(nph_b);
    out.detuning = mean_and_error(det_b);

    // Fast motion: instantaneous frequency |z|^2 dphi/dt = Im(z^* zdot),
    // averaged and demodulated at 2 omega_d with |z|^2 weights.
    const double center = c.mechanical_frequency_estimate() *
                          std::sqrt(std::max(0.1, bessel_j(0, out.drive_amplitude.value)));
    std::vector<cplx> z, zd;
    // Wide enough for the frequency-modulation sidebands at 2 n w_d; a wider
    // band pulls the centroid down through the asymmetric Brownian tails.
    analytic_band(tr.x, tr.sample_rate(), center, std::min(0.5 * center, 12.0 * c.omega_d), z, zd);
    std::vector<double> wm_b, w2_b;
    for (int b = 0; b < kBlocks; ++b) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = b * block; i < (b + 1) * block; ++i) {
            num += std::imag(std::conj(z[i]) * zd[i]);
            den += std::norm(z[i]);
        }
        const double wm = num / den;
        // |z|^2 itself breathes at 2 omega_d, so the mean frequency is removed
        // before the lock-in.
        cplx mod{};
        for (std::size_t i = b * block; i < (b + 1) * block; ++i) {
            const double t = tr.t0 + static_cast<double>(i) * tr.sample_interval;
            const double f = std::imag(std::conj(z[i]) * zd[i]) - wm * std::norm(z[i]);
            mod += f * std::polar(1.0, 2.0 * c.omega_d * t);
        }
        wm_b.push_back(wm);
        // f = |z|^2 2 w2 cos(2 w_d t + psi): lock-in gives w2 |z|^2.
        w2_b.push_back(std::abs(mod) / den);
    }
    out.omega_m = mean_and_error(wm_b);
    out.omega_2 = mean_and_error(w2_b);

    // Coupling from the trap relations with measured photon number and X_d.
    const double xzpf = std::sqrt(kHbar / (2.0 * c.trap.mass * out.omega_m.value));
    const double scale = k * c.trap.well_depth * std::sqrt(out.photon_number.value) * xzpf;
    const double xd = out.drive_amplitude.value;
    out.g_mod.value = scale * bessel_j(1, xd);
    const double dj1 = 0.5 * (bessel_j(0, xd) - bessel_j(2, xd));
    out.g_mod.stderr_ = std::hypot(scale * dj1 * out.drive_amplitude.stderr_,
                                   0.5 * out.g_mod.value * out.photon_number.stderr_ /
                                       out.photon_number.value);

    SystemParams& p = out.params;
    p.detuning = out.detuning.value;
    p.kappa = c.kappa;
    p.gamma_m = c.gamma_m;
    p.omega_m = out.omega_m.value;
    p.omega_d = c.omega_d;
    p.omega_2 = out.omega_2.value;
    p.g_mod = out.g_mod.value;
    // The demodulated frequency already contains the optical spring
    // Im eta g(t)^2, which the linear model adds again from g_mod. Remove it:
    // g(t)^2 = 2 g^2 (1 - cos 2 w_d t).
    const double spring = p.g_mod * p.g_mod * eta(p.omega_m, p).imag();
    p.omega_m -= 2.0 * spring;
    p.omega_2 = std::max(0.0, p.omega_2 + spring);
    p.n_th = c.temperature > 0.0 ? thermal_occupancy(c.temperature, p.omega_m) : 0.0;
    p.n_opt = 0.0;
    return out;
}

std::vector<double> cavity_quadrature(const Trajectory& tr, double theta) {
    cplx mean{};
    for (const cplx& a : tr.a) mean += a;
    mean /= static_cast<double>(tr.a.size());
    const cplx ref = std::polar(1.0, -(std::arg(mean) + theta));
    std::vector<double> y(tr.a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 2.0 * std::real(ref * (tr.a[i] - mean));
    return y;
}

std::vector<double> cavity_output_quadrature(const Trajectory& tr, const SimConfig& c, double theta) {
    if (c.noise.shot && tr.a_in.size() != tr.a.size())
        throw ConfigError("output quadrature: input noise was not recorded for this trajectory");
    cplx mean{};
    for (const cplx& a : tr.a) mean += a;
    mean /= static_cast<double>(tr.a.size());
    const cplx ref = std::polar(1.0, -(std::arg(mean) + theta));
    const double sk = std::sqrt(c.kappa);
    std::vector<double> y(tr.a.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const cplx in = tr.a_in.empty() ? cplx{} : tr.a_in[i];
        y[i] = 2.0 * std::real(ref * (in - sk * (tr.a[i] - mean)));
    }
    return y;
}

nlohmann::json to_json(const SimConfig& c) {
    auto drive_name = [](TrapDrive d) {
        switch (d) {
            case TrapDrive::ac: return "ac";
            case TrapDrive::static_harmonic: return "static_harmonic";
            case TrapDrive::off: return "off";
        }
        return "?";
    };
    return {{"trap",
             {{"well_depth_rad_s", c.trap.well_depth},
              {"wavelength_m", c.trap.wavelength},
              {"mass_kg", c.trap.mass},
              {"omega_t_rad_s", c.trap.omega_t},
              {"well_index", c.trap.well_index},
              {"photon_number", c.trap.photon_number}}},
            {"drive_rate_per_s", c.drive_rate},
            {"detuning0_rad_s", c.detuning0},
            {"kappa_rad_s", c.kappa},
            {"gamma_m_per_s", c.gamma_m},
            {"omega_d_rad_s", c.omega_d},
            {"dt_s", c.dt},
            {"duration_s", c.duration},
            {"transient_periods", c.transient_periods},
            {"sample_every", c.sample_every},
            {"seed", c.seed},
            {"temperature_k", c.temperature},
            {"noise", {{"thermal", c.noise.thermal}, {"shot", c.noise.shot}}},
            {"trap_drive", drive_name(c.trap_drive)},
            {"optical_force", c.optical_force}};
}

nlohmann::json to_json(const EmergentParams& e) {
    auto est = [](const Estimate& v) { return nlohmann::json{{"value", v.value}, {"stderr", v.stderr_}}; };
    return {{"drive_amplitude", est(e.drive_amplitude)},
            {"omega_m_rad_s", est(e.omega_m)},
            {"omega_2_rad_s", est(e.omega_2)},
            {"g_mod_per_s", est(e.g_mod)},
            {"photon_number", est(e.photon_number)},
            {"detuning_rad_s", est(e.detuning)}};
}

}  // namespace splitband
