#include "splitband/perturbative.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "splitband/errors.hpp"

namespace splitband {

namespace {

struct Split {
    Eigen::VectorXcd inv_diag;
    Eigen::MatrixXcd coupling;   // g vertices (static and modulated)
    Eigen::MatrixXcd frequency;  // omega_2 vertices
};

Split split_system(const SystemParams& p, double omega, int truncation) {
    SystemParams bare = p;
    bare.g_mod = 0.0;
    bare.g_static = 0.0;
    bare.omega_2 = 0.0;
    SystemParams only_g = bare;
    only_g.g_mod = p.g_mod;
    only_g.g_static = p.g_static;
    SystemParams only_w2 = bare;
    only_w2.omega_2 = p.omega_2;

    const Eigen::MatrixXcd d = build_comb_system(bare, omega, truncation).dense();
    Split s;
    s.inv_diag = d.diagonal().cwiseInverse();
    s.coupling = build_comb_system(only_g, omega, truncation).dense() - d;
    s.frequency = build_comb_system(only_w2, omega, truncation).dense() - d;
    return s;
}

Eigen::VectorXcd selector(Observable obs, int truncation) {
    const int n = 4 * (2 * truncation + 1);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    auto put = [&](int off, double v) {
        e(CombSystem::index(off, Field::b, truncation)) = v;
        e(CombSystem::index(off, Field::b_dag, truncation)) = v;
    };
    if (obs == Observable::displacement) {
        put(0, 1.0);
    } else if (obs == Observable::shifted_displacement) {
        put(1, 1.0);
        put(-1, -1.0);
    } else {
        throw ConfigError("perturbative expansion covers x and X+- only");
    }
    return e;
}

NoiseTransfer to_transfer(const Eigen::VectorXcd& w, Observable obs, double omega,
                          const SystemParams& p, int truncation) {
    const std::array<double, 4> scale = {std::sqrt(p.kappa), std::sqrt(p.kappa),
                                         std::sqrt(p.gamma_m), std::sqrt(p.gamma_m)};
    NoiseTransfer t;
    t.observable = obs;
    t.omega = omega;
    t.truncation = truncation;
    t.coefficients.assign(2 * truncation + 1, {cplx{}, cplx{}, cplx{}, cplx{}});
    for (int off = -truncation; off <= truncation; ++off)
        for (int f = 0; f < 4; ++f)
            t.coefficients[off + truncation][f] =
                w(CombSystem::index(off, static_cast<Field>(f), truncation)) * scale[f];
    return t;
}

}  // namespace

PerturbativeTransfer perturbative_solution(double omega, const SystemParams& p, Observable obs,
                                           std::vector<std::string>* warnings) {
    validate(p);
    if (warnings) {
        const double small = 0.1 * std::min(p.kappa, p.omega_m);
        if (std::abs(p.g_mod) > small || std::abs(p.g_static) > small || p.omega_2 > small)
            warnings->push_back("couplings are not small against kappa and omega_m; "
                                "the expansion may be inaccurate");
    }
    const int N = kPerturbativeTruncation;
    const Split s = split_system(p, omega, N);

    // M = D + V, u = sum_k (-D^-1 V)^k D^-1 s. For one output row e^T,
    // r_0 = e, r_k = -V^T D^-1 r_{k-1} and the row is D^-1 r_k.
    struct Word {
        int g;
        int w;
        Eigen::VectorXcd r;
    };
    std::vector<Word> frontier{{0, 0, selector(obs, N)}};
    std::vector<Word> all = frontier;
    for (int order = 1; order <= 3; ++order) {
        std::vector<Word> next;
        for (const Word& word : frontier) {
            const Eigen::VectorXcd scaled = s.inv_diag.cwiseProduct(word.r);
            next.push_back({word.g + 1, word.w, -(s.coupling.transpose() * scaled)});
            if (p.omega_2 != 0.0)
                next.push_back({word.g, word.w + 1, -(s.frequency.transpose() * scaled)});
        }
        all.insert(all.end(), next.begin(), next.end());
        frontier = std::move(next);
    }

    PerturbativeTransfer out;
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(s.inv_diag.size());
    for (int g = 0; g <= 3; ++g) {
        for (int w = 0; g + w <= 3; ++w) {
            Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(s.inv_diag.size());
            bool any = false;
            for (const Word& word : all) {
                if (word.g != g || word.w != w) continue;
                acc += s.inv_diag.cwiseProduct(word.r);
                any = true;
            }
            if (!any) continue;
            total += acc;
            out.groups.push_back({g, w, to_transfer(acc, obs, omega, p, N)});
        }
    }
    out.total = to_transfer(total, obs, omega, p, N);
    return out;
}

SpectrumGrid perturbative_psd(Observable obs, std::span<const double> omega,
                              const SystemParams& p) {
    SpectrumGrid g;
    g.omega.assign(omega.begin(), omega.end());
    g.value.assign(omega.size(), 0.0);
    g.quantity = std::string(spectrum_name(obs));
    g.convention = kUnsymmetrizedConvention;
    g.source = "perturbative_cubic";
    g.params_hash = params_hash(p);
    g.truncation = kPerturbativeTruncation;
    for (std::size_t i = 0; i < omega.size(); ++i)
        g.value[i] = perturbative_solution(omega[i], p, obs).total.density(p);
    g.check();
    return g;
}

cplx thermal_weight_correction(double omega, int side, const SystemParams& p) {
    return 1.0 + cplx(0.0, p.omega_2) * chi_m(omega - side * p.omega_d, p);
}

cplx replaced_thermal_weight(double omega, int side, const SystemParams& p) {
    return chi_m(omega + side * p.omega_d, p) * thermal_weight_correction(omega, side, p);
}

double perturbative_ratio(const SystemParams& p) {
    // omega_m - omega_d peak comes from chi_M(omega + omega_d), the
    // omega_m + omega_d peak from chi_M(omega - omega_d).
    const double up = std::norm(thermal_weight_correction(p.omega_m + p.omega_d, -1, p));
    const double down = std::norm(thermal_weight_correction(p.omega_m - p.omega_d, +1, p));
    return up / down;
}

}  // namespace splitband
