#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "analysis.hpp"
#include "artifacts.hpp"
#include "splitband/config.hpp"
#include "splitband/errors.hpp"
#include "splitband/fast_cavity.hpp"
#include "splitband/langevin.hpp"
#include "splitband/units.hpp"
#include "splitband/version.hpp"

namespace splitband::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct CommonOptions {
    std::string config;
    std::string out;
    int grid_points = 0;
    int truncation = 0;
};

struct Loaded {
    RunConfig rc;
    json effective;  // config document plus command-line overrides
};

Loaded load(const CommonOptions& o) {
    std::ifstream is(o.config);
    if (!is) throw ConfigError("--config: cannot open " + o.config);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(o.config + ": malformed JSON: " + e.what());
    }
    // Grid overrides go through the document so the hash covers them.
    if (o.grid_points) doc["grid"]["points_per_side"] = o.grid_points;
    if (o.truncation) doc["grid"]["truncation"] = o.truncation;
    Loaded l{parse_config(doc), doc};
    return l;
}

void emit_spectrum(Staging& st, const std::string& name, const SpectrumGrid& s) {
    for (const auto& path : write_spectrum_files(s, (st.staging_dir() / name).string()))
        st.add(fs::path(path).lexically_relative(st.staging_dir()).string());
}

void emit_json(Staging& st, const std::string& name, const json& j) {
    std::ofstream os(st.file(name), std::ios::binary);
    os << j.dump(2) << '\n';
}

std::string num(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void warn_all(const RunConfig& rc, std::ostream& err) {
    for (const auto& w : rc.warnings) err << "warning: " << w << '\n';
}

// ---- analytic -------------------------------------------------------------

int cmd_analytic(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    const Loaded l = load(o);
    warn_all(l.rc, err);
    Staging st(o.out);
    const AnalyticResult r = run_analytic(l.rc);

    emit_spectrum(st, "S_xx", r.spectra.displacement);
    emit_spectrum(st, "S_XpmXpm", r.spectra.shifted);
    emit_spectrum(st, "S_yy", r.spectra.cavity);
    emit_spectrum(st, "S_yout", r.spectra.output);
    emit_spectrum(st, "S_yout_motion", r.decomposition.motion);
    emit_spectrum(st, "S_yout_imprecision", r.decomposition.imprecision);
    emit_spectrum(st, "S_yout_interference", r.decomposition.interference);
    const json report = report_json(l.rc, r);
    emit_json(st, "peak_report.json", report);

    json m = manifest_base("analytic", o.config, l.effective, started);
    m["params_hash"] = hex64(params_hash(l.rc.system));
    m["seeds"] = json::array();
    st.commit(m);

    out << "r (S_yy) = " << (report["r"].is_null() ? std::string("n/a") : num(report["r"].get<double>()))
        << ", prediction " << num(report["ratio_prediction"].get<double>()) << '\n';
    for (const Fitted* f : {&r.shifted, &r.cavity, &r.output})
        if (!f->report) err << "warning: peak fit failed: " << f->error << '\n';
    return kExitOk;
}

// ---- simulate -------------------------------------------------------------

SystemParams mean_params(const std::vector<SystemParams>& ps) {
    SystemParams m = ps.front();
    auto avg = [&](double SystemParams::*f) {
        double s = 0.0;
        for (const auto& p : ps) s += p.*f;
        m.*f = s / static_cast<double>(ps.size());
    };
    for (auto f : {&SystemParams::detuning, &SystemParams::omega_m, &SystemParams::omega_2,
                   &SystemParams::g_mod, &SystemParams::n_th})
        avg(f);
    return m;
}

int cmd_simulate(const CommonOptions& o, std::vector<std::uint64_t> seeds, std::ostream& out,
                 std::ostream& err) {
    const std::string started = utc_now();
    Loaded l = load(o);
    if (!l.rc.simulation) throw ConfigError("simulation: section is required for simulate");
    const SimulationSection& sim = *l.rc.simulation;
    if (seeds.empty()) seeds = sim.seeds;
    l.effective["simulation"]["seeds"] = seeds;
    warn_all(l.rc, err);
    Staging st(o.out);

    struct SeedResult {
        bool ok = false;
        std::string error;
        SpectrumGrid x, y, yout;
        EmergentParams emergent;
        bool have_emergent = false;
        std::string emergent_error;
    };
    std::vector<SeedResult> res(seeds.size());
    const long n = static_cast<long>(seeds.size());
    fs::create_directories(st.staging_dir() / "trajectories");

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        SeedResult& sr = res[i];
        SimConfig c = sim.base;
        c.seed = seeds[i];
        try {
            const Trajectory tr = integrate(c);
            write_trajectory(tr, c, st.staging_dir() / "trajectories" / ("seed_" + std::to_string(c.seed)));
            sr.x = welch_psd(tr.x, tr.sample_rate(), sim.welch);
            sr.y = welch_psd(cavity_quadrature(tr, sim.homodyne_phase), tr.sample_rate(), sim.welch);
            if (c.noise.shot)
                sr.yout = welch_psd(cavity_output_quadrature(tr, c, sim.homodyne_phase),
                                    tr.sample_rate(), sim.welch);
            try {
                sr.emergent = extract_emergent_params(tr, c);
                sr.have_emergent = true;
            } catch (const NumericalError& e) {
                sr.emergent_error = e.what();
            }
            sr.ok = true;
        } catch (const NumericalError& e) {
            sr.error = e.what();
        }
    }

    json seed_rows = json::array();
    std::vector<SpectrumGrid> xs, ys, youts;
    std::vector<SystemParams> params;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const SeedResult& sr = res[i];
        json row{{"seed", seeds[i]}, {"status", sr.ok ? "ok" : "diverged"}};
        if (!sr.ok) {
            row["error"] = sr.error;
            err << "seed " << seeds[i] << ": " << sr.error << '\n';
        } else {
            const std::string stem = "trajectories/seed_" + std::to_string(seeds[i]);
            st.add(stem + ".bin");
            st.add(stem + ".json");
            xs.push_back(sr.x);
            ys.push_back(sr.y);
            if (!sr.yout.omega.empty()) youts.push_back(sr.yout);
            if (sr.have_emergent) {
                row["emergent"] = to_json(sr.emergent);
                params.push_back(sr.emergent.params);
            } else {
                row["emergent_error"] = sr.emergent_error;
            }
        }
        seed_rows.push_back(row);
    }
    if (xs.empty()) throw NumericalError("every seed diverged; nothing to average");

    SpectrumGrid sx = average_spectra(xs), sy = average_spectra(ys);
    sx.quantity = "S_xx_sim";
    sx.unit = "m^2/Hz";
    sy.quantity = "S_yy_sim";
    emit_spectrum(st, "sim_S_xx", sx);
    emit_spectrum(st, "sim_S_yy", sy);
    if (!youts.empty()) {
        SpectrumGrid so = average_spectra(youts);
        so.quantity = "S_yout_sim";
        emit_spectrum(st, "sim_S_yout", so);
    }

    json report;
    report["name"] = l.rc.name;
    report["simulation"] = to_json(sim.base);
    report["seeds"] = seed_rows;
    report["successful_seeds"] = xs.size();
    if (!params.empty()) {
        const SystemParams p = mean_params(params);
        report["ensemble_params"] = to_json(p);
        const double lo = p.omega_m - l.rc.grid.span * p.omega_d;
        const double hi = p.omega_m + l.rc.grid.span * p.omega_d;
        const SpectrumGrid win = slice(sy, lo, hi);
        const SpectrumGrid ana = psd(Observable::cavity_quadrature, win.omega, p, l.rc.grid.truncation);
        emit_spectrum(st, "analytic_S_yy", ana);
        const Fitted fs_ = fit_sidebands(win, p.omega_m, p.omega_d);
        const Fitted fa = fit_sidebands(ana, p.omega_m, p.omega_d);
        report["sim_S_yy"] = fs_.report ? to_json(*fs_.report) : json{{"fit_error", fs_.error}};
        report["analytic_S_yy"] = fa.report ? to_json(*fa.report) : json{{"fit_error", fa.error}};
        report["ratio_prediction"] = ratio_prediction(p.omega_d, p.omega_2);
        if (fs_.report) report["r_sim"] = fs_.report->primary().r_floor;
        if (fa.report) report["r_analytic"] = fa.report->primary().r_floor;
        out << "r sim = " << (fs_.report ? num(fs_.report->primary().r_floor) : "n/a")
            << ", r analytic = " << (fa.report ? num(fa.report->primary().r_floor) : "n/a") << '\n';
    }
    emit_json(st, "report.json", report);

    json m = manifest_base("simulate", o.config, l.effective, started);
    m["params_hash"] = hex64(config_hash(sim.base));
    m["seeds"] = seeds;
    st.commit(m);
    return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepAxis {
    std::string field;
    std::vector<double> values;
};

SweepAxis parse_sweep(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
        throw ConfigError("--sweep: expected FIELD=v1,v2,...");
    SweepAxis a;
    a.field = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ConfigError("--sweep: '" + tok + "' is not a number");
        a.values.push_back(v);
    }
    if (a.values.empty()) throw ConfigError("--sweep: no values given");
    return a;
}

int cmd_sweep(const CommonOptions& o, const std::string& sweep, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    const Loaded base = load(o);
    const SweepAxis axis = parse_sweep(sweep);
    const std::string field = resolve_field(base.effective, axis.field);

    // Parse every point up front so a bad value fails before any work.
    std::vector<RunConfig> points;
    for (double v : axis.values) {
        try {
            points.push_back(parse_config(with_override(base.effective, field, v)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (sweep " + field + " = " + num(v) + ")");
        }
    }
    Staging st(o.out);

    struct Row {
        AnalyticResult r;
        std::string error;
    };
    std::vector<Row> rows(points.size());
    const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            rows[i].r = run_analytic(points[i]);
        } catch (const NumericalError& e) {
            rows[i].error = e.what();
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::ofstream csv(st.file("sweep.csv"), std::ios::binary);
    csv << "field,value,omega_m_rad_s,omega_d_rad_s,omega_2_rad_s,g_mod_per_s,gamma_m_per_s,n_th,"
           "ratio_prediction,r_raw,r_floor,r_XpmXpm,r_yout_imprecision_referenced,occupancy,"
           "stokes_ratio,status\n";
    json table = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SystemParams& p = points[i].system;
        const AnalyticResult& r = rows[i].r;
        std::string status = rows[i].error.empty() ? "ok" : rows[i].error;
        double r_raw = nan, r_floor = nan, r_x = nan;
        if (r.cavity.report) {
            r_raw = r.cavity.report->primary().r_raw;
            r_floor = r.cavity.report->primary().r_floor;
        } else if (rows[i].error.empty()) {
            status = "S_yy fit: " + r.cavity.error;
        }
        if (r.shifted.report) r_x = r.shifted.report->primary().r_floor;
        const double r_out = r.r_output_floor_referenced.value_or(nan);
        const double occ = r.occupancy.value_or(nan);
        const double stokes = r.stokes_ratio.value_or(nan);
        for (char& c : status)
            if (c == ',' || c == '\n') c = ';';
        csv << field << ',' << num(axis.values[i]) << ',' << num(p.omega_m) << ',' << num(p.omega_d) << ','
            << num(p.omega_2) << ',' << num(p.g_mod) << ',' << num(p.gamma_m) << ',' << num(p.n_th) << ','
            << num(ratio_prediction(p.omega_d, p.omega_2)) << ',' << num(r_raw) << ',' << num(r_floor)
            << ',' << num(r_x) << ',' << num(r_out) << ',' << num(occ) << ',' << num(stokes) << ','
            << status << '\n';
        table.push_back({{"value", axis.values[i]}, {"system", to_json(p)}, {"status", status}});
        if (status != "ok") err << "sweep point " << num(axis.values[i]) << ": " << status << '\n';
    }
    csv.close();
    emit_json(st, "sweep.json", {{"field", field}, {"points", table}});

    json m = manifest_base("sweep", o.config, base.effective, started);
    m["sweep"] = {{"field", field}, {"values", axis.values}};
    m["seeds"] = json::array();
    st.commit(m);
    out << "swept " << field << " over " << points.size() << " values\n";
    return kExitOk;
}

// ---- fastcavity -----------------------------------------------------------

int cmd_fastcavity(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const std::string started = utc_now();
    const Loaded l = load(o);
    warn_all(l.rc, err);
    const AnsatzParams a = ansatz_from(l.rc);
    const LineSpectrum lines = line_spectrum(a, l.rc.fast_cavity.max_harmonic);
    for (const auto& w : lines.warnings) err << "warning: " << w << '\n';
    Staging st(o.out);

    {
        std::ofstream csv(st.file("lines.csv"), std::ios::binary);
        csv << "omega_rad_s,weight,re_amplitude,im_amplitude\n";
        for (const Line& ln : lines.lines)
            csv << num(ln.omega) << ',' << num(ln.weight) << ',' << num(ln.amplitude.real()) << ','
                << num(ln.amplitude.imag()) << '\n';
    }
    const auto& g = l.rc.grid;
    const std::vector<double> axis = g.two_sided ? two_sided_axis(l.rc.system, g.points_per_side, g.span)
                                                 : sideband_axis(l.rc.system, g.points_per_side, g.span);
    const SpectrumGrid conv = convolved_spectrum(lines, a, axis);
    emit_spectrum(st, "S_cos2kx", conv);

    json report;
    report["name"] = l.rc.name;
    report["drive_amplitude"] = a.drive_amplitude;
    report["thermal_amplitude"] = a.thermal_amplitude;
    report["beta"] = a.beta();
    report["phase_index"] = a.phase_index == PhaseIndex::integrated ? "integrated" : "printed";
    report["line_width_rad_s"] = a.line_width;
    report["line_count"] = lines.lines.size();
    report["line_ratio"] = line_ratio(lines, a);
    report["warnings"] = lines.warnings;
    const Fitted f = fit_sidebands(conv, a.omega_m, a.omega_d);
    report["S_cos2kx"] = f.report ? to_json(*f.report) : json{{"fit_error", f.error}};
    emit_json(st, "fastcavity_report.json", report);

    json m = manifest_base("fastcavity", o.config, l.effective, started);
    m["seeds"] = json::array();
    st.commit(m);
    out << "line ratio = " << num(line_ratio(lines, a)) << '\n';
    return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--grid-points", o.grid_points, "frequency points per sideband window");
    sub->add_option("--truncation", o.truncation, "comb truncation N_h");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Split-sideband spectra of slowly modulated optomechanics", "splitband"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonOptions analytic_o, simulate_o, sweep_o, fast_o;
    std::vector<std::uint64_t> seeds;
    std::string sweep_spec;

    auto* analytic = app.add_subcommand("analytic", "Floquet spectra and peak report");
    add_common(analytic, analytic_o);
    auto* simulate = app.add_subcommand("simulate", "stochastic trajectories and averaged PSDs");
    add_common(simulate, simulate_o);
    simulate->add_option("--seed", seeds, "RNG seed, repeatable; overrides the config list");
    auto* sweep = app.add_subcommand("sweep", "analytic diagnostics over one parameter");
    add_common(sweep, sweep_o);
    sweep->add_option("--sweep", sweep_spec, "FIELD=v1,v2,...")->required();
    auto* fast = app.add_subcommand("fastcavity", "fast-cavity line spectrum");
    add_common(fast, fast_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*analytic) return cmd_analytic(analytic_o, out, err);
        if (*simulate) return cmd_simulate(simulate_o, seeds, out, err);
        if (*sweep) return cmd_sweep(sweep_o, sweep_spec, out, err);
        if (*fast) return cmd_fastcavity(fast_o, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace splitband::cli
