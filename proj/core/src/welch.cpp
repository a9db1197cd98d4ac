#include <cmath>
#include <complex>
#include <memory>

#include <fftw3.h>

#include "splitband/errors.hpp"
#include "splitband/spectral_analysis.hpp"
#include "splitband/units.hpp"

namespace splitband {

namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct BufferDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    if (w == Window::hann)
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    return out;
}

}  // namespace

SpectrumGrid welch_psd(std::span<const double> series, double sample_rate,
                       const WelchOptions& o) {
    if (!power_of_two(o.segment)) throw ConfigError("welch: segment length must be a power of two");
    if (!(o.overlap >= 0.0 && o.overlap <= 0.9)) throw ConfigError("welch: overlap must be in [0, 0.9]");
    if (!(sample_rate > 0.0)) throw ConfigError("welch: sample rate must be > 0");
    const std::size_t n = o.segment;
    if (series.size() < n) throw InsufficientDataError("welch: series shorter than one segment");

    const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                          std::floor(n * (1.0 - o.overlap))));
    const std::vector<double> win = make_window(o.window, n);
    double win_sq = 0.0;
    for (double w : win) win_sq += w * w;

    std::unique_ptr<double, BufferDeleter> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, BufferDeleter> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    std::unique_ptr<fftw_plan_s, PlanDeleter> plan(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));

    std::vector<double> acc(n / 2 + 1, 0.0);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + n <= series.size(); start += step) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += series[start + i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) in.get()[i] = (series[start + i] - mean) * win[i];
        fftw_execute(plan.get());
        for (std::size_t k = 0; k <= n / 2; ++k)
            acc[k] += out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
        ++segments;
    }
    const double norm = 1.0 / (sample_rate * win_sq * static_cast<double>(segments));

    // Two-sided axis: bins -n/2 .. n/2 - 1, negative half mirrored.
    SpectrumGrid g;
    g.quantity = "S_welch";
    g.convention = kWelchConvention;
    g.source = "welch";
    g.omega.resize(n);
    g.value.resize(n);
    const double df = sample_rate / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const long k = static_cast<long>(j) - static_cast<long>(n / 2);
        g.omega[j] = kTwoPi * df * static_cast<double>(k);
        g.value[j] = acc[static_cast<std::size_t>(std::labs(k))] * norm;
    }
    return g;
}

SpectrumGrid average_spectra(std::span<const SpectrumGrid> spectra) {
    if (spectra.empty()) throw InsufficientDataError("average: no spectra");
    SpectrumGrid out = spectra.front();
    for (std::size_t s = 1; s < spectra.size(); ++s) {
        if (spectra[s].omega != out.omega) throw NumericalError("average: spectra on different axes");
        for (std::size_t i = 0; i < out.size(); ++i) out.value[i] += spectra[s].value[i];
    }
    for (double& v : out.value) v /= static_cast<double>(spectra.size());
    return out;
}

}  // namespace splitband
