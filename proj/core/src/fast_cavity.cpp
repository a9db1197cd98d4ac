#include "splitband/fast_cavity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "splitband/errors.hpp"
#include "splitband/special.hpp"
#include "splitband/units.hpp"

namespace splitband {

double AnsatzParams::beta() const {
    if (omega_d <= 0.0) return 0.0;
    return phase_index == PhaseIndex::integrated ? omega_2 / omega_d : omega_2 / (2.0 * omega_d);
}

void validate(const AnsatzParams& p) {
    if (!(p.drive_amplitude >= 0.0)) throw ConfigError("drive_amplitude: X_d must be >= 0");
    if (!(p.thermal_amplitude >= 0.0)) throw ConfigError("thermal_amplitude: X_M must be >= 0");
    if (!(p.omega_m > 0.0)) throw ConfigError("omega_m: must be > 0");
    if (!(p.omega_d > 0.0)) throw ConfigError("omega_d: must be > 0");
    if (!(p.line_width > 0.0)) throw ConfigError("line_width: must be > 0");
}

namespace {

int cutoff(double x, int cap, bool* short_cut) {
    const int need = jacobi_anger_cutoff(x, kLineTolerance);
    if (cap > 0 && need > cap) {
        *short_cut = true;
        return cap;
    }
    return need;
}

}  // namespace

LineSpectrum line_spectrum(const AnsatzParams& p, int max_harmonic) {
    validate(p);
    LineSpectrum out;
    const double beta = p.beta();
    bool short_cut = false;

    // e^{i u} = sum_n J_n(X_d) e^{i n w_d t}
    //         * sum_m i^m J_m(X_M) e^{i m w_m t} sum_l J_l(m beta) e^{2 i l w_d t}
    // Each term sits at m w_m + (n + 2 l) w_d. Keyed by (m, n + 2l).
    const int n_cut = cutoff(p.drive_amplitude, max_harmonic, &short_cut);
    const int m_cut = cutoff(p.thermal_amplitude, max_harmonic, &short_cut);
    std::map<std::pair<int, int>, cplx> e_iu;
    static const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int m = -m_cut; m <= m_cut; ++m) {
        const double jm = bessel_j(m, p.thermal_amplitude);
        if (jm == 0.0) continue;
        const cplx im = kIPow[((m % 4) + 4) % 4] * jm;
        const int l_cut = cutoff(m * beta, max_harmonic, &short_cut);
        for (int l = -l_cut; l <= l_cut; ++l) {
            const double jl = bessel_j(l, m * beta);
            if (jl == 0.0) continue;
            for (int n = -n_cut; n <= n_cut; ++n) {
                const double jn = bessel_j(n, p.drive_amplitude);
                if (jn == 0.0) continue;
                e_iu[{m, n + 2 * l}] += im * jl * jn;
            }
        }
    }

    // cos u = (e^{iu} + conj(e^{iu})) / 2; conj moves (m, j) to (-m, -j).
    std::map<std::pair<int, int>, cplx> cos_u;
    for (const auto& [key, c] : e_iu) {
        cos_u[key] += 0.5 * c;
        cos_u[{-key.first, -key.second}] += 0.5 * std::conj(c);
    }
    for (const auto& [key, c] : cos_u) {
        const double w = std::norm(c);
        if (w == 0.0) continue;
        out.lines.push_back({key.first * p.omega_m + key.second * p.omega_d, w, c});
    }
    std::sort(out.lines.begin(), out.lines.end(),
              [](const Line& a, const Line& b) { return a.omega < b.omega; });

    // Lines that land on the same frequency (commensurate omega_m) merge.
    std::vector<Line> merged;
    for (const Line& l : out.lines) {
        if (!merged.empty() && std::abs(l.omega - merged.back().omega) < 1e-9 * p.omega_d) {
            merged.back().amplitude += l.amplitude;
            merged.back().weight = std::norm(merged.back().amplitude);
        } else {
            merged.push_back(l);
        }
    }
    out.lines = std::move(merged);

    if (short_cut)
        out.warnings.push_back("max_harmonic truncates Bessel series above the 1e-8 tolerance");
    return out;
}

std::vector<double> sampled_ansatz(const AnsatzParams& p, double sample_rate, double duration) {
    validate(p);
    if (!(sample_rate > 8.0 * p.omega_m / kTwoPi))
        throw ConfigError("sample_rate: must exceed 8 omega_m / 2pi to avoid aliasing");
    if (!(duration > 0.0)) throw ConfigError("duration: must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
    std::vector<double> s(n);
    const double beta = p.beta();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double phase = p.omega_m * t + beta * std::sin(2.0 * p.omega_d * t);
        const double u = p.drive_amplitude * std::sin(p.omega_d * t) +
                         p.thermal_amplitude * std::cos(phase);
        s[i] = std::cos(u);
    }
    return s;
}

SpectrumGrid convolved_spectrum(const LineSpectrum& lines, const AnsatzParams& p,
                                std::span<const double> omega) {
    validate(p);
    SpectrumGrid g;
    g.omega.assign(omega.begin(), omega.end());
    g.value.assign(omega.size(), 0.0);
    g.quantity = "S_cos2kx";
    g.convention = "two-sided line spectrum of cos 2kx convolved with unit-area Lorentzians";
    g.source = "fast_cavity";
    const double half = p.line_width / 2.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        double s = 0.0;
        for (const Line& l : lines.lines) {
            const double d = omega[i] - l.omega;
            // Lorentzian in omega, unit area under d omega / 2 pi.
            s += l.weight * p.line_width / (d * d + half * half);
        }
        g.value[i] = s;
    }
    g.check();
    return g;
}

double line_weight_at(const LineSpectrum& lines, double omega, double omega_d) {
    for (const Line& l : lines.lines)
        if (std::abs(l.omega - omega) < 1e-6 * omega_d) return l.weight;
    return 0.0;
}

double line_ratio(const LineSpectrum& lines, const AnsatzParams& p) {
    const double up = line_weight_at(lines, p.omega_m + p.omega_d, p.omega_d);
    const double down = line_weight_at(lines, p.omega_m - p.omega_d, p.omega_d);
    if (!(down > 0.0)) throw NumericalError("fast cavity: no line at omega_m - omega_d");
    return up / down;
}

}  // namespace splitband
