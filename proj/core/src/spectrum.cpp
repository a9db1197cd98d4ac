#include "splitband/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "splitband/errors.hpp"
#include "splitband/units.hpp"

namespace splitband {

void SpectrumGrid::check() const {
    if (omega.size() != value.size()) throw NumericalError(quantity + ": axis/value size mismatch");
    for (std::size_t i = 1; i < omega.size(); ++i)
        if (!(omega[i] > omega[i - 1]))
            throw NumericalError(quantity + ": frequency axis not strictly increasing");
    for (double v : value) {
        if (!std::isfinite(v)) throw NumericalError(quantity + ": non-finite spectral value");
        if (!signed_values && v < 0.0) throw NumericalError(quantity + ": negative spectral density");
    }
}

std::vector<double> linear_axis(double lo, double hi, int points) {
    if (points < 2 || !(hi > lo)) throw ConfigError("axis: need hi > lo and at least 2 points");
    std::vector<double> axis(points);
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) axis[i] = lo + step * i;
    axis.back() = hi;
    return axis;
}

double integrate(const SpectrumGrid& s, double lo, double hi) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s.omega[i - 1] < lo || s.omega[i] > hi) continue;
        acc += 0.5 * (s.value[i] + s.value[i - 1]) * (s.omega[i] - s.omega[i - 1]);
    }
    return acc / kTwoPi;
}

double interpolate(const SpectrumGrid& s, double omega) {
    if (s.size() < 2 || omega < s.omega.front() || omega > s.omega.back())
        throw NumericalError("interpolate: frequency outside the spectrum axis");
    auto it = std::upper_bound(s.omega.begin(), s.omega.end(), omega);
    if (it == s.omega.end()) return s.value.back();
    const std::size_t i = static_cast<std::size_t>(it - s.omega.begin());
    const double t = (omega - s.omega[i - 1]) / (s.omega[i] - s.omega[i - 1]);
    return s.value[i - 1] + t * (s.value[i] - s.value[i - 1]);
}

long argmax_in(const SpectrumGrid& s, double lo, double hi) {
    long best = -1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.omega[i] < lo || s.omega[i] > hi) continue;
        if (best < 0 || s.value[i] > s.value[static_cast<std::size_t>(best)]) best = static_cast<long>(i);
    }
    return best;
}

SpectrumGrid slice(const SpectrumGrid& s, double lo, double hi) {
    SpectrumGrid out = s;
    out.omega.clear();
    out.value.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.omega[i] < lo || s.omega[i] > hi) continue;
        out.omega.push_back(s.omega[i]);
        out.value.push_back(s.value[i]);
    }
    return out;
}

void write_csv(const SpectrumGrid& s, std::ostream& os) {
    os << "omega_rad_s,psd_value,convention\n";
    char buf[96];
    const std::string tag = s.quantity + " [" + s.unit + "]";
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,", s.omega[i], s.value[i]);
        os << buf << tag << '\n';
    }
}

SpectrumGrid read_csv(std::istream& is) {
    SpectrumGrid s;
    std::string line;
    if (!std::getline(is, line) || line.rfind("omega_rad_s,psd_value", 0) != 0)
        throw ConfigError("spectrum CSV: missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
            throw ConfigError("spectrum CSV: malformed row '" + line + "'");
        std::getline(ls, c);
        s.omega.push_back(std::stod(a));
        s.value.push_back(std::stod(b));
        if (s.quantity.empty() && !c.empty()) s.quantity = c.substr(0, c.find(' '));
    }
    s.signed_values = std::any_of(s.value.begin(), s.value.end(), [](double v) { return v < 0.0; });
    return s;
}

nlohmann::json to_json(const SpectrumGrid& s) {
    nlohmann::json j;
    j["quantity"] = s.quantity;
    j["unit"] = s.unit;
    j["convention"] = s.convention;
    j["detection"] = s.detection;
    j["source"] = s.source;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.params_hash));
    j["params_hash"] = hash;
    j["truncation"] = s.truncation;
    j["signed_values"] = s.signed_values;
    j["omega_rad_s"] = s.omega;
    j["psd_value"] = s.value;
    return j;
}

SpectrumGrid spectrum_from_json(const nlohmann::json& j) {
    SpectrumGrid s;
    try {
        s.quantity = j.value("quantity", "");
        s.unit = j.value("unit", "1/Hz");
        s.convention = j.value("convention", "");
        s.detection = j.value("detection", "");
        s.source = j.value("source", "");
        s.truncation = j.value("truncation", 0);
        s.signed_values = j.value("signed_values", false);
        s.params_hash = std::stoull(j.value("params_hash", std::string("0")), nullptr, 16);
        s.omega = j.at("omega_rad_s").get<std::vector<double>>();
        s.value = j.at("psd_value").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("spectrum JSON: ") + ex.what());
    }
    s.check();
    return s;
}

std::vector<std::string> write_spectrum_files(const SpectrumGrid& s, const std::string& stem) {
    const std::string csv = stem + ".csv";
    const std::string json = stem + ".json";
    {
        std::ofstream os(csv, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + csv);
        write_csv(s, os);
    }
    {
        std::ofstream os(json, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + json);
        os << to_json(s).dump(1) << '\n';
    }
    return {csv, json};
}

}  // namespace splitband
