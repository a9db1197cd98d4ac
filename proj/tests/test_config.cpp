#include <doctest.h>

#include <string>

#include "splitband/config.hpp"
#include "splitband/errors.hpp"
#include "splitband/units.hpp"

using namespace splitband;
using json = nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
      "system": {
        "omega_m_over_2pi_khz": 46.0,
        "half_kappa_over_2pi_khz": 26.0,
        "detuning_over_2pi_khz": -46.0,
        "omega_d_over_2pi_khz": 1.5,
        "omega_2_over_2omega_d": 0.24,
        "g_mod_per_s": 18500.0,
        "gamma_m_per_s": 1.0,
        "n_th": 10.0
      }
    })");
}

std::string error_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const std::string kConfigs = SPLITBAND_CONFIG_DIR;

}  // namespace

TEST_CASE("rate suffixes convert to rad/s and half_kappa doubles") {
    const RunConfig rc = parse_config(minimal());
    CHECK(rc.system.omega_m == doctest::Approx(khz_to_rad_s(46.0)));
    CHECK(rc.system.kappa == doctest::Approx(2.0 * khz_to_rad_s(26.0)));
    CHECK(rc.system.detuning == doctest::Approx(-khz_to_rad_s(46.0)));
    CHECK(rc.system.omega_2 == doctest::Approx(0.24 * 2.0 * khz_to_rad_s(1.5)));
    CHECK(rc.system.g_mod == 18500.0);
    CHECK(rc.derived_fields.empty());

    json d = minimal();
    d["system"].erase("half_kappa_over_2pi_khz");
    d["system"]["kappa_over_2pi_hz"] = 52000.0;
    CHECK(parse_config(d).system.kappa == doctest::Approx(2.0 * khz_to_rad_s(26.0)));
}

TEST_CASE("errors name the offending field") {
    json d = minimal();
    d["system"]["colour"] = 3;
    CHECK(error_of(d).find("system.colour") != std::string::npos);

    d = minimal();
    d["extras"] = json::object();
    CHECK(error_of(d).find("extras") != std::string::npos);

    d = minimal();
    d["system"]["g_mod_per_s"] = -5.0;
    CHECK(error_of(d).find("g_mod") != std::string::npos);

    d = minimal();
    d["system"]["omega_2_rad_s"] = 100.0;
    CHECK(error_of(d).find("not both") != std::string::npos);

    d = minimal();
    d["system"]["kappa_over_2pi_khz"] = 52.0;
    CHECK_FALSE(error_of(d).empty());

    d = minimal();
    d["system"]["omega_m_over_2pi_khz"] = "fast";
    CHECK(error_of(d).find("omega_m") != std::string::npos);

    d = minimal();
    d["system"].erase("omega_m_over_2pi_khz");
    CHECK(error_of(d).find("omega_m") != std::string::npos);

    d = minimal();
    d["grid"]["span_omega_d"] = 40.0;  // window reaches zero frequency
    CHECK(error_of(d).find("grid.span_omega_d") != std::string::npos);

    d = minimal();
    d["simulation"] = {{"dt_s", 1e-7}, {"duration_s", 1.0}};
    CHECK(error_of(d).find("trap") != std::string::npos);
}

TEST_CASE("temperature and pressure map onto n_th and Gamma_M") {
    json d = minimal();
    d["system"].erase("n_th");
    d["system"]["temperature_k"] = 300.0;
    d["system"].erase("gamma_m_per_s");
    d["system"]["pressure_mbar"] = 1e-3;
    const RunConfig rc = parse_config(d);
    CHECK(rc.system.n_th == doctest::Approx(thermal_occupancy(300.0, rc.system.omega_m)));
    CHECK(rc.system.gamma_m == doctest::Approx(pressure_to_gamma(1e-3)));
}

TEST_CASE("trap section derives the modulation and records it") {
    const RunConfig rc = load_config(kConfigs + "/fig2_i.json");
    REQUIRE(rc.trap);
    CHECK(rc.derived_fields.size() == 3);
    const SystemParams d = derive_from_trap(*rc.trap, drive_amplitude_from_trap(*rc.trap), rc.system);
    CHECK(rc.system.omega_m == doctest::Approx(d.omega_m));
    CHECK(rc.system.omega_2 == doctest::Approx(d.omega_2));
    CHECK(rc.system.g_mod == doctest::Approx(d.g_mod));
    REQUIRE(rc.simulation);
    CHECK(rc.simulation->seeds.size() == 8);
    CHECK(rc.simulation->base.detuning0 == doctest::Approx(bare_detuning(rc.system.detuning, *rc.trap)));
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"fig2_i", "fig2_ii", "fig2_iii", "fig2_iv", "fig3_quantum", "twin_peaks"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(kConfigs + "/" + name + ".json"));
    }
    const RunConfig q = load_config(kConfigs + "/fig3_quantum.json");
    CHECK(q.system.n_th == 0.0);
    CHECK(n_backaction(q.system) == doctest::Approx(0.0799).epsilon(2e-3));
}

TEST_CASE("overrides replace every spelling of a quantity") {
    const json d = minimal();
    CHECK(resolve_field(d, "omega_2_over_2omega_d") == "system.omega_2_over_2omega_d");
    CHECK(resolve_field(d, "system.g_mod_per_s") == "system.g_mod_per_s");
    CHECK(resolve_field(d, "well_index") == "trap.well_index");
    CHECK_THROWS_AS(resolve_field(d, "bogus"), ConfigError);
    CHECK_THROWS_AS(resolve_field(d, "system.g_mod"), ConfigError);  // unit suffix required

    const json o = with_override(d, "system.omega_2_rad_s", 123.0);
    CHECK_FALSE(o["system"].contains("omega_2_over_2omega_d"));
    CHECK(parse_config(o).system.omega_2 == 123.0);

    const json k = with_override(d, "system.kappa_rad_s", 1e5);
    CHECK_FALSE(k["system"].contains("half_kappa_over_2pi_khz"));
    CHECK(parse_config(k).system.kappa == 1e5);
}

TEST_CASE("load_config reports unreadable and malformed files") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
