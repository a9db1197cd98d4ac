#include "splitband/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "splitband/errors.hpp"
#include "splitband/units.hpp"

namespace splitband {

namespace {

using json = nlohmann::json;

// Unit suffixes accepted for angular rates.
const std::vector<std::pair<std::string, double>> kRateSuffixes = {
    {"_rad_s", 1.0},
    {"_per_s", 1.0},
    {"_over_2pi_hz", kTwoPi},
    {"_over_2pi_khz", kTwoPi * 1e3},
};

const std::map<std::string, std::set<std::string>> kSectionKeys = {
    {"system",
     {"kappa", "half_kappa", "detuning", "gamma_m", "pressure_mbar", "omega_m", "omega_d",
      "omega_2", "omega_2_over_2omega_d", "g_mod", "g_static", "n_th", "temperature_k", "n_opt",
      "homodyne_phase_rad"}},
    {"trap",
     {"well_depth", "wavelength_nm", "mass_kg", "omega_t", "well_index", "photon_number",
      "pressure_mbar", "drive_amplitude"}},
    {"grid", {"points_per_side", "span_omega_d", "truncation", "two_sided"}},
    {"simulation",
     {"dt_s", "duration_s", "modulation_periods", "transient_periods", "sample_every",
      "temperature_k", "seeds", "noise", "welch_segment", "welch_overlap", "trap_drive",
      "optical_force", "homodyne_phase_rad", "initial_x_m"}},
    {"fast_cavity", {"thermal_amplitude", "drive_amplitude", "line_width", "phase_index", "max_harmonic"}},
};

// Keys whose value carries a rate suffix.
const std::set<std::string> kRateKeys = {"kappa", "half_kappa", "detuning", "gamma_m", "omega_m",
                                         "omega_d", "omega_2", "g_mod", "g_static", "well_depth",
                                         "omega_t", "line_width"};

// Splits "kappa_over_2pi_khz" into ("kappa", factor). Returns false if no
// rate suffix matches.
bool split_rate_key(const std::string& key, std::string& base, double& factor) {
    for (const auto& [suffix, f] : kRateSuffixes) {
        if (key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
            const std::string b = key.substr(0, key.size() - suffix.size());
            if (kRateKeys.count(b)) {
                base = b;
                factor = f;
                return true;
            }
        }
    }
    return false;
}

std::string base_of(const std::string& key) {
    std::string base;
    double f = 0.0;
    if (split_rate_key(key, base, f)) return base;
    return key;
}

class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.contains(name_)) return;
        const json& s = doc.at(name_);
        if (!s.is_object()) throw ConfigError(name_ + ": must be an object");
        present_ = true;
        const auto& allowed = kSectionKeys.at(name_);
        for (auto it = s.begin(); it != s.end(); ++it) {
            const std::string base = base_of(it.key());
            if (!allowed.count(base))
                throw ConfigError(name_ + "." + it.key() + ": unknown field");
            if (kRateKeys.count(base)) {
                std::string b;
                double f = 0.0;
                if (!split_rate_key(it.key(), b, f))
                    throw ConfigError(name_ + "." + it.key() +
                                      ": rate needs a unit suffix (_rad_s, _per_s, _over_2pi_hz, _over_2pi_khz)");
                if (!it.value().is_number())
                    throw ConfigError(name_ + "." + it.key() + ": must be a number");
                if (rates_.count(b))
                    throw ConfigError(name_ + "." + it.key() + ": " + b + " given more than once");
                rates_[b] = {it.value().get<double>() * f, it.key()};
            } else {
                plain_[it.key()] = it.value();
            }
        }
    }

    bool present() const { return present_; }

    std::optional<double> rate(const std::string& base) const {
        auto it = rates_.find(base);
        if (it == rates_.end()) return std::nullopt;
        return it->second.first;
    }
    std::string rate_key(const std::string& base) const {
        auto it = rates_.find(base);
        return name_ + "." + (it == rates_.end() ? base : it->second.second);
    }

    std::optional<double> number(const std::string& key) const {
        auto it = plain_.find(key);
        if (it == plain_.end()) return std::nullopt;
        if (!it->second.is_number()) throw ConfigError(name_ + "." + key + ": must be a number");
        return it->second.get<double>();
    }
    std::optional<json> raw(const std::string& key) const {
        auto it = plain_.find(key);
        if (it == plain_.end()) return std::nullopt;
        return std::optional<json>(std::in_place, it->second);
    }
    std::string path(const std::string& key) const { return name_ + "." + key; }

private:
    std::string name_;
    bool present_ = false;
    std::map<std::string, std::pair<double, std::string>> rates_;
    std::map<std::string, json> plain_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path + ": " + what);
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (it.key() != "name" && it.key() != "description" && !kSectionKeys.count(it.key()))
            throw ConfigError(it.key() + ": unknown section");

    RunConfig rc;
    rc.source = doc;
    rc.name = doc.value("name", std::string("run"));

    const Section sys(doc, "system");
    const Section trap(doc, "trap");
    const Section grid(doc, "grid");
    const Section sim(doc, "simulation");
    const Section fast(doc, "fast_cavity");
    require(sys.present(), "system", "section is required");

    SystemParams& p = rc.system;

    // Cavity.
    if (sys.rate("kappa") && sys.rate("half_kappa"))
        throw ConfigError("system: give kappa or half_kappa, not both");
    if (auto v = sys.rate("kappa")) p.kappa = *v;
    else if (auto h = sys.rate("half_kappa")) p.kappa = 2.0 * *h;
    else throw ConfigError("system.kappa_over_2pi_khz: required (or half_kappa_*)");
    require(p.kappa > 0.0, sys.rate_key(sys.rate("kappa") ? "kappa" : "half_kappa"), "must be > 0");
    p.detuning = sys.rate("detuning").value_or(0.0);

    // Mechanics.
    if (sys.rate("gamma_m") && sys.number("pressure_mbar"))
        throw ConfigError("system: give gamma_m or pressure_mbar, not both");
    if (auto g = sys.rate("gamma_m")) {
        p.gamma_m = *g;
    } else if (auto pr = sys.number("pressure_mbar")) {
        require(*pr >= 0.0, sys.path("pressure_mbar"), "must be >= 0");
        p.gamma_m = pressure_to_gamma(*pr);
    }
    require(p.gamma_m >= 0.0, sys.rate_key("gamma_m"), "must be >= 0");

    auto omega_d = sys.rate("omega_d");
    if (!omega_d) throw ConfigError("system.omega_d_over_2pi_khz: required");
    p.omega_d = *omega_d;
    require(p.omega_d > 0.0, sys.rate_key("omega_d"), "must be > 0");

    // Trap.
    if (trap.present()) {
        TrapParams t;
        t.well_depth = trap.rate("well_depth").value_or(0.0);
        t.wavelength = trap.number("wavelength_nm").value_or(1064.0) * 1e-9;
        t.mass = trap.number("mass_kg").value_or(0.0);
        t.omega_t = trap.rate("omega_t").value_or(0.0);
        if (auto n = trap.number("well_index")) {
            require(*n >= 0.0 && std::floor(*n) == *n, trap.path("well_index"), "must be a non-negative integer");
            t.well_index = static_cast<int>(*n);
        }
        t.photon_number = trap.number("photon_number").value_or(0.0);
        t.pressure_mbar = trap.number("pressure_mbar").value_or(-1.0);
        try {
            validate(t);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("trap.") + e.what());
        }
        rc.trap = t;
        if (auto xd = trap.number("drive_amplitude")) {
            rc.drive_amplitude = *xd;
        } else if (t.omega_t > 0.0) {
            rc.drive_amplitude = drive_amplitude_from_trap(t);
        }
    }

    auto from_trap = [&](const char* field) {
        if (!rc.trap) throw ConfigError(std::string("system.") + field + ": required (no trap section to derive it from)");
        rc.derived_fields.push_back(std::string("system.") + field);
    };
    std::optional<TrapModulation> mod;
    auto modulation = [&]() -> const TrapModulation& {
        if (!mod) mod = trap_modulation(*rc.trap, rc.drive_amplitude);
        return *mod;
    };

    if (auto w = sys.rate("omega_m")) {
        p.omega_m = *w;
    } else {
        from_trap("omega_m");
        p.omega_m = modulation().omega_m;
    }
    require(p.omega_m > 0.0, sys.rate_key("omega_m"), "must be > 0");

    if (sys.rate("omega_2") && sys.number("omega_2_over_2omega_d"))
        throw ConfigError("system: give omega_2 or omega_2_over_2omega_d, not both");
    if (auto w2 = sys.rate("omega_2")) {
        p.omega_2 = *w2;
    } else if (auto q = sys.number("omega_2_over_2omega_d")) {
        p.omega_2 = *q * 2.0 * p.omega_d;
    } else {
        from_trap("omega_2");
        p.omega_2 = std::abs(modulation().omega_2);
    }
    require(p.omega_2 >= 0.0, "system.omega_2", "must be >= 0");

    if (auto g = sys.rate("g_mod")) {
        p.g_mod = *g;
    } else {
        from_trap("g_mod");
        p.g_mod = std::abs(modulation().g_mod);
    }
    p.g_static = sys.rate("g_static").value_or(0.0);

    if (sys.number("n_th") && sys.number("temperature_k"))
        throw ConfigError("system: give n_th or temperature_k, not both");
    if (auto n = sys.number("n_th")) p.n_th = *n;
    else if (auto T = sys.number("temperature_k")) p.n_th = thermal_occupancy(*T, p.omega_m);
    require(p.n_th >= 0.0, sys.path("n_th"), "must be >= 0");
    p.n_opt = sys.number("n_opt").value_or(0.0);
    require(p.n_opt >= 0.0, sys.path("n_opt"), "must be >= 0");
    p.homodyne_phase = sys.number("homodyne_phase_rad").value_or(0.0);

    try {
        rc.warnings = validate(p);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("system.") + e.what());
    }

    // Grid.
    if (auto v = grid.number("points_per_side")) rc.grid.points_per_side = static_cast<int>(*v);
    if (auto v = grid.number("span_omega_d")) rc.grid.span = *v;
    if (auto v = grid.number("truncation")) rc.grid.truncation = static_cast<int>(*v);
    if (auto v = grid.raw("two_sided")) {
        require(v->is_boolean(), grid.path("two_sided"), "must be true or false");
        rc.grid.two_sided = v->get<bool>();
    }
    require(rc.grid.points_per_side >= 16, grid.path("points_per_side"), "must be >= 16");
    require(rc.grid.span > 2.0, grid.path("span_omega_d"), "must be > 2");
    require(rc.grid.truncation >= 2, grid.path("truncation"), "must be >= 2");
    require(p.omega_m - rc.grid.span * p.omega_d > 0.0, grid.path("span_omega_d"),
            "window reaches zero frequency; reduce the span");

    // Fast cavity.
    if (auto v = fast.number("thermal_amplitude")) rc.fast_cavity.thermal_amplitude = *v;
    if (auto v = fast.number("drive_amplitude")) {
        require(*v > 0.0 && *v < kPi / 2.0, fast.path("drive_amplitude"), "must lie in (0, pi/2)");
        rc.fast_cavity.drive_amplitude = *v;
    }
    rc.fast_cavity.line_width = fast.rate("line_width").value_or(0.0);
    if (auto v = fast.raw("phase_index")) {
        require(v->is_string(), fast.path("phase_index"), "must be \"integrated\" or \"printed\"");
        const std::string s = v->get<std::string>();
        if (s == "integrated") rc.fast_cavity.phase_index = PhaseIndex::integrated;
        else if (s == "printed") rc.fast_cavity.phase_index = PhaseIndex::printed;
        else throw ConfigError(fast.path("phase_index") + ": must be \"integrated\" or \"printed\"");
    }
    if (auto v = fast.number("max_harmonic")) rc.fast_cavity.max_harmonic = static_cast<int>(*v);
    require(rc.fast_cavity.thermal_amplitude >= 0.0, fast.path("thermal_amplitude"), "must be >= 0");

    // Simulation.
    if (sim.present()) {
        require(rc.trap.has_value(), "simulation", "needs a trap section");
        SimulationSection s;
        SimConfig& c = s.base;
        c.trap = *rc.trap;
        c.kappa = p.kappa;
        c.gamma_m = p.gamma_m;
        c.omega_d = p.omega_d;
        c.detuning0 = bare_detuning(p.detuning, c.trap);
        c.dt = sim.number("dt_s").value_or(0.0);
        require(c.dt > 0.0, sim.path("dt_s"), "required and > 0");
        const auto dur = sim.number("duration_s");
        const auto periods = sim.number("modulation_periods");
        if (dur && periods) throw ConfigError("simulation: give duration_s or modulation_periods, not both");
        if (dur) c.duration = *dur;
        else if (periods) c.duration = *periods * kTwoPi / p.omega_d;
        else throw ConfigError("simulation.modulation_periods: required (or duration_s)");
        c.transient_periods = sim.number("transient_periods").value_or(20.0);
        c.sample_every = static_cast<int>(sim.number("sample_every").value_or(1.0));
        c.temperature = sim.number("temperature_k").value_or(0.0);
        c.initial_x = sim.number("initial_x_m").value_or(0.0);
        if (auto n = sim.raw("noise")) {
            require(n->is_object(), sim.path("noise"), "must be an object");
            for (auto it = n->begin(); it != n->end(); ++it) {
                if (it.key() != "thermal" && it.key() != "shot")
                    throw ConfigError(sim.path("noise." + it.key()) + ": unknown field");
                require(it.value().is_boolean(), sim.path("noise." + it.key()), "must be true or false");
            }
            c.noise.thermal = n->value("thermal", true);
            c.noise.shot = n->value("shot", true);
        }
        if (auto d = sim.raw("trap_drive")) {
            const std::string v = d->is_string() ? d->get<std::string>() : "";
            if (v == "ac") c.trap_drive = TrapDrive::ac;
            else if (v == "static_harmonic") c.trap_drive = TrapDrive::static_harmonic;
            else if (v == "off") c.trap_drive = TrapDrive::off;
            else throw ConfigError(sim.path("trap_drive") + ": must be ac, static_harmonic or off");
        }
        if (auto o = sim.raw("optical_force")) {
            require(o->is_boolean(), sim.path("optical_force"), "must be true or false");
            c.optical_force = o->get<bool>();
        }
        if (auto seeds = sim.raw("seeds")) {
            require(seeds->is_array() && !seeds->empty(), sim.path("seeds"), "must be a non-empty array");
            s.seeds.clear();
            for (const auto& v : *seeds) {
                require(v.is_number_unsigned(), sim.path("seeds"), "entries must be non-negative integers");
                s.seeds.push_back(v.get<std::uint64_t>());
            }
        }
        if (auto v = sim.number("welch_segment")) s.welch.segment = static_cast<std::size_t>(*v);
        if (auto v = sim.number("welch_overlap")) s.welch.overlap = *v;
        s.homodyne_phase = sim.number("homodyne_phase_rad").value_or(0.0);
        try {
            for (auto& w : validate(c)) rc.warnings.push_back(w);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what());
        }
        rc.simulation = s;
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed JSON: " + e.what());
    }
    return parse_config(doc);
}

std::string resolve_field(const json& doc, const std::string& field) {
    const auto dot = field.find('.');
    auto known = [](const std::string& section, const std::string& key) {
        auto it = kSectionKeys.find(section);
        return it != kSectionKeys.end() && it->second.count(base_of(key)) > 0;
    };
    if (dot != std::string::npos) {
        const std::string section = field.substr(0, dot), key = field.substr(dot + 1);
        if (!known(section, key)) throw ConfigError("sweep: unknown parameter '" + field + "'");
        if (kRateKeys.count(key)) throw ConfigError("sweep: '" + field + "' needs a unit suffix");
        return field;
    }
    // A bare key: prefer the section that already has it, then the first
    // section that accepts it.
    for (const char* section : {"system", "trap", "simulation", "fast_cavity", "grid"})
        if (doc.contains(section) && doc.at(section).contains(field)) return std::string(section) + "." + field;
    for (const char* section : {"system", "trap", "simulation", "fast_cavity", "grid"})
        if (known(section, field) && !kRateKeys.count(field)) return std::string(section) + "." + field;
    throw ConfigError("sweep: unknown parameter '" + field + "'");
}

namespace {

// Keys that set the same quantity in different forms.
std::string quantity_of(const std::string& base) {
    if (base == "omega_2_over_2omega_d") return "omega_2";
    if (base == "half_kappa") return "kappa";
    if (base == "pressure_mbar") return "gamma_m";
    if (base == "temperature_k") return "n_th";
    return base;
}

}  // namespace

json with_override(const json& doc, const std::string& field, double value) {
    const std::string full = resolve_field(doc, field);
    const auto dot = full.find('.');
    const std::string section = full.substr(0, dot), key = full.substr(dot + 1);
    json out = doc;
    // Replace any spelling of the same quantity so the override is unambiguous.
    if (out.contains(section)) {
        const std::string q = quantity_of(base_of(key));
        std::vector<std::string> drop;
        for (auto it = out[section].begin(); it != out[section].end(); ++it)
            if (quantity_of(base_of(it.key())) == q) drop.push_back(it.key());
        for (const auto& k : drop) out[section].erase(k);
    }
    if (key == "well_index" || key == "points_per_side" || key == "truncation" || key == "sample_every")
        out[section][key] = static_cast<long long>(std::llround(value));
    else
        out[section][key] = value;
    return out;
}

AnsatzParams ansatz_from(const RunConfig& rc) {
    AnsatzParams a;
    a.omega_m = rc.system.omega_m;
    a.omega_d = rc.system.omega_d;
    a.omega_2 = rc.system.omega_2;
    a.thermal_amplitude = rc.fast_cavity.thermal_amplitude;
    a.line_width = rc.fast_cavity.line_width > 0.0 ? rc.fast_cavity.line_width : rc.system.gamma_m;
    a.phase_index = rc.fast_cavity.phase_index;
    if (rc.fast_cavity.drive_amplitude > 0.0) {
        a.drive_amplitude = rc.fast_cavity.drive_amplitude;
    } else if (rc.trap) {
        a.drive_amplitude = rc.drive_amplitude;
    } else {
        // Invert omega_2 = Omega_0 J_2(X) / (2 sqrt(J_0(X))) at small X:
        // omega_2 / omega_m = X^2 / 16.
        a.drive_amplitude = 4.0 * std::sqrt(rc.system.omega_2 / rc.system.omega_m);
    }
    return a;
}

json to_json(const SystemParams& p) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(params_hash(p)));
    return {{"detuning_rad_s", p.detuning},   {"kappa_rad_s", p.kappa},
            {"gamma_m_per_s", p.gamma_m},     {"omega_m_rad_s", p.omega_m},
            {"omega_d_rad_s", p.omega_d},     {"omega_2_rad_s", p.omega_2},
            {"g_mod_per_s", p.g_mod},         {"g_static_per_s", p.g_static},
            {"n_th", p.n_th},                 {"n_opt", p.n_opt},
            {"homodyne_phase_rad", p.homodyne_phase}, {"params_hash", hash}};
}

}  // namespace splitband
