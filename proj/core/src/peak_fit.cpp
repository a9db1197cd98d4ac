#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "splitband/errors.hpp"
#include "splitband/spectral_analysis.hpp"
#include "splitband/units.hpp"

namespace splitband {

double PeakFit::area() const {
    // Lorentzian H / (1 + (2 d / w)^2) integrates to H w / 4 over d omega / 2 pi.
    return height * width / 4.0;
}

namespace {

// Parameters: floor, then (height, center, width) for minus and plus.
// Frequencies are scaled by omega_d and values by the data maximum so the
// problem is well conditioned.
struct TwinLorentzian : Eigen::DenseFunctor<double> {
    const Eigen::VectorXd& u;
    const Eigen::VectorXd& y;
    std::optional<double> fixed_floor;

    TwinLorentzian(const Eigen::VectorXd& u_, const Eigen::VectorXd& y_, std::optional<double> ff)
        : DenseFunctor<double>(ff ? 6 : 7, static_cast<int>(u_.size())), u(u_), y(y_),
          fixed_floor(ff) {}

    int offset() const { return fixed_floor ? 0 : 1; }
    double floor_of(const InputType& x) const { return fixed_floor ? *fixed_floor : x(0); }

    static double lorentz(double h, double c, double w, double v) {
        const double d = 2.0 * (v - c) / w;
        return h / (1.0 + d * d);
    }

    int operator()(const InputType& x, ValueType& f) const {
        const int o = offset();
        for (Eigen::Index i = 0; i < u.size(); ++i)
            f(i) = floor_of(x) + lorentz(x(o), x(o + 1), x(o + 2), u(i)) +
                   lorentz(x(o + 3), x(o + 4), x(o + 5), u(i)) - y(i);
        return 0;
    }

    int df(const InputType& x, JacobianType& j) const {
        const int o = offset();
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (!fixed_floor) j(i, 0) = 1.0;
            for (int p = 0; p < 2; ++p) {
                const double h = x(o + 3 * p), c = x(o + 3 * p + 1), w = x(o + 3 * p + 2);
                const double d = 2.0 * (u(i) - c) / w;
                const double den = 1.0 + d * d;
                j(i, o + 3 * p) = 1.0 / den;
                j(i, o + 3 * p + 1) = h * 2.0 * d * (2.0 / w) / (den * den);
                j(i, o + 3 * p + 2) = h * 2.0 * d * d / w / (den * den);
            }
        }
        return 0;
    }
};

struct Guess {
    double center;
    double height;
    double width;
};

Guess initial_peak(const std::vector<double>& u, const std::vector<double>& y, double target,
                   double floor) {
    // Largest value within half a modulation spacing of the nominal position.
    // Ties go to the bin nearest the nominal position.
    long best = -1;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i] - target) > 0.5) continue;
        if (best < 0) {
            best = static_cast<long>(i);
            continue;
        }
        const double vb = y[static_cast<std::size_t>(best)];
        if (y[i] > vb || (y[i] == vb && std::abs(u[i] - target) <
                                            std::abs(u[static_cast<std::size_t>(best)] - target)))
            best = static_cast<long>(i);
    }
    if (best < 0) throw InsufficientDataError("peak search window is empty");
    const auto b = static_cast<std::size_t>(best);
    const double h = y[b] - floor;
    const double half = floor + 0.5 * h;
    std::size_t lo = b, hi = b;
    while (lo > 0 && y[lo] > half && u[b] - u[lo] < 0.5) --lo;
    while (hi + 1 < u.size() && y[hi] > half && u[hi] - u[b] < 0.5) ++hi;
    const double step = u.size() > 1 ? u[1] - u[0] : 0.01;
    const double w = std::max(u[hi] - u[lo], 2.0 * step);
    return {u[b], h, w};
}

}  // namespace

PeakReport find_split_peaks(const SpectrumGrid& s, double omega_m, double omega_d,
                            const PeakSearchOptions& opt) {
    if (!(omega_d > 0.0) || !(omega_m > 0.0)) throw ConfigError("peak search: omega_m, omega_d must be > 0");
    if (opt.side != 1 && opt.side != -1) throw ConfigError("peak search: side must be +1 or -1");
    const int side = opt.side;

    // Work in u = (side * omega - omega_m) / omega_d so both sides look alike.
    std::vector<double> u, y;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double ui = (side * s.omega[i] - omega_m) / omega_d;
        if (std::abs(ui) > opt.window) continue;
        u.push_back(ui);
        y.push_back(s.value[i]);
    }
    if (side < 0) {
        std::reverse(u.begin(), u.end());
        std::reverse(y.begin(), y.end());
    }
    if (u.size() < 16) throw InsufficientDataError("peak search: fewer than 16 bins in the fit window");
    const double bins_per_wd = 1.0 / (u[1] - u[0]);
    if (bins_per_wd < 8.0) throw InsufficientDataError("peak search: grid must resolve omega_d with >= 8 bins");

    const double scale = *std::max_element(y.begin(), y.end());
    if (!(scale > 0.0)) throw FitError("peak search: spectrum has no positive values in the window");
    std::vector<double> ys(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ys[i] = y[i] / scale;

    double floor0 = opt.fixed_floor ? *opt.fixed_floor / scale : *std::min_element(ys.begin(), ys.end());
    const Guess gm = initial_peak(u, ys, -1.0, floor0);
    const Guess gp = initial_peak(u, ys, +1.0, floor0);

    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::Map<const Eigen::VectorXd> yv(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const Eigen::VectorXd uvec = uv, yvec = yv;
    std::optional<double> ff;
    if (opt.fixed_floor) ff = *opt.fixed_floor / scale;
    TwinLorentzian fn(uvec, yvec, ff);

    Eigen::VectorXd x(fn.inputs());
    int o = 0;
    if (!ff) x(o++) = floor0;
    x(o++) = gm.height;
    x(o++) = gm.center;
    x(o++) = gm.width;
    x(o++) = gp.height;
    x(o++) = gp.center;
    x(o++) = gp.width;

    Eigen::LevenbergMarquardt<TwinLorentzian> lm(fn);
    lm.setMaxfev(opt.max_iterations * 10);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    const auto status = lm.minimize(x);
    const bool ok = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
    if (!ok) throw FitError("peak fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");

    const int off = ff ? 0 : 1;
    const double floor_s = ff ? *ff : x(0);
    const double hm = x(off), cm = x(off + 1), wm = std::abs(x(off + 2));
    const double hp = x(off + 3), cp = x(off + 4), wp = std::abs(x(off + 5));
    if (!(hm > 0.0) || !(hp > 0.0))
        throw FitError("peak fit returned a negative height (minus " + std::to_string(hm * scale) +
                       ", plus " + std::to_string(hp * scale) + ")");
    if (std::abs(cm + 1.0) > 0.5 || std::abs(cp - 1.0) > 0.5)
        throw FitError("peak fit wandered outside the search windows");

    // Covariance from the Jacobian at the optimum and the residual variance.
    Eigen::VectorXd fvec(fn.values());
    fn(x, fvec);
    Eigen::MatrixXd jac(fn.values(), fn.inputs());
    fn.df(x, jac);
    const double dof = std::max(1, fn.values() - fn.inputs());
    const double s2 = fvec.squaredNorm() / dof;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
    auto err = [&](int i) { return std::sqrt(std::max(0.0, cov(i, i))); };

    PeakReport r;
    r.side = side;
    r.omega_m = omega_m;
    r.omega_d = omega_d;
    r.iterations = static_cast<int>(lm.iterations());
    r.floor = floor_s * scale;
    r.floor_err = ff ? 0.0 : err(0) * scale;
    auto fill = [&](PeakFit& p, double h, double c, double w, int base) {
        p.height = h * scale;
        p.center = side * (omega_m + c * omega_d);
        p.width = w * omega_d;
        p.height_err = err(base) * scale;
        p.center_err = err(base + 1) * omega_d;
        p.width_err = err(base + 2) * omega_d;
        p.sampled_value = interpolate(s, p.center);
    };
    fill(r.minus, hm, cm, wm, off);
    fill(r.plus, hp, cp, wp, off + 3);

    r.r_raw = r.plus.sampled_value / r.minus.sampled_value;
    r.r_floor = hp / hm;
    const double rel2 = std::pow(err(off) / hm, 2) + std::pow(err(off + 3) / hp, 2) -
                        2.0 * cov(off, off + 3) / (hm * hp);
    r.r_floor_err = r.r_floor * std::sqrt(std::max(0.0, rel2));
    r.area_ratio = r.plus.area() / r.minus.area();
    r.residuals.assign(fvec.data(), fvec.data() + fvec.size());
    r.rms_residual = std::sqrt(fvec.squaredNorm() / static_cast<double>(fvec.size()));
    for (double& v : r.residuals) v *= scale;
    return r;
}

double floor_referenced_ratio(const SpectrumGrid& total, const SpectrumGrid& floor,
                              double center_minus, double center_plus) {
    const double down = interpolate(total, center_minus) - interpolate(floor, center_minus);
    const double up = interpolate(total, center_plus) - interpolate(floor, center_plus);
    if (down == 0.0) throw NumericalError("floor-referenced ratio: reference peak sits exactly on the floor");
    return up / down;
}

}  // namespace splitband
