#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "artifacts.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kConfigs = SPLITBAND_CONFIG_DIR;

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "splitband");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = splitband::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("splitband_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    }
    std::set<std::string> entries() const {
        std::set<std::string> s;
        for (const auto& e : fs::directory_iterator(dir)) s.insert(e.path().filename().string());
        return s;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

const char* kSmall = R"({
  "name": "small",
  "system": {
    "omega_m_over_2pi_khz": 46.0, "kappa_over_2pi_khz": 260.0, "detuning_over_2pi_khz": -75.0,
    "omega_d_over_2pi_khz": 0.7, "omega_2_over_2omega_d": 0.2, "g_mod_per_s": 3000.0,
    "gamma_m_per_s": 200.0, "n_th": 1e4
  },
  "grid": {"points_per_side": 256, "span_omega_d": 6.0, "truncation": 8}
})";

const char* kShortSim = R"({
  "name": "short_sim",
  "system": {"kappa_over_2pi_khz": 260.0, "detuning_over_2pi_khz": -75.0, "gamma_m_per_s": 2000.0,
             "omega_d_over_2pi_khz": 0.7, "temperature_k": 1.0},
  "trap": {"well_depth_over_2pi_khz": 26.0, "mass_kg": 9.2e-18, "omega_t_rad_s": 3219.0,
           "well_index": 100, "photon_number": 6.4e8},
  "grid": {"points_per_side": 256, "truncation": 8},
  "simulation": {"dt_s": 1.5e-7, "modulation_periods": 60, "transient_periods": 5,
                 "sample_every": 16, "temperature_k": 1.0, "seeds": [3, 4], "welch_segment": 2048}
})";

void check_manifest(const fs::path& out) {
    const json m = json::parse(slurp(out / "manifest.json"));
    CHECK(m["tool"] == "splitband");
    CHECK(m.contains("config_hash"));
    CHECK(m.contains("started_utc"));
    CHECK(m.contains("finished_utc"));
    CHECK(m.contains("modules"));
    std::set<std::string> listed;
    for (const auto& f : m["files"]) {
        const std::string rel = f["path"];
        listed.insert(rel);
        REQUIRE(fs::exists(out / rel));
        CHECK(f["bytes"] == fs::file_size(out / rel));
        CHECK(f["fnv1a64"] == splitband::cli::hex64(splitband::cli::fnv1a(slurp(out / rel))));
    }
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), out).generic_string();
        if (rel != "manifest.json") CHECK_MESSAGE(listed.count(rel), rel << " missing from manifest");
    }
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == splitband::cli::kExitOk);
    CHECK(run({"analytic", "--help"}).code == splitband::cli::kExitOk);
    CHECK(run({}).code == splitband::cli::kExitConfig);
    CHECK(run({"analytic", "--out", "/tmp/x"}).code == splitband::cli::kExitConfig);
    CHECK(run({"frobnicate"}).code == splitband::cli::kExitConfig);
}

TEST_CASE("malformed or invalid configs exit 2 and leave nothing behind") {
    Scratch s("bad");
    const std::string broken = s.write("broken.json", "{\"system\": {");
    const std::string unknown = s.write("unknown.json", R"({"system": {"omega_m_rad_s": 1, "warp": 2}})");
    const auto before = s.entries();
    for (const auto& cfg : {broken, unknown, (s.dir / "missing.json").string()}) {
        const Result r = run({"analytic", "--config", cfg, "--out", (s.dir / "out").string()});
        CHECK(r.code == splitband::cli::kExitConfig);
        CHECK_FALSE(r.err.empty());
        CHECK(s.entries() == before);
    }
    const Result r = run({"analytic", "--config", unknown, "--out", (s.dir / "out").string()});
    CHECK(r.err.find("system.warp") != std::string::npos);
}

TEST_CASE("numerical failure exits 3 and leaves nothing behind") {
    Scratch s("singular");
    const std::string cfg = s.write("singular.json", R"({
      "system": {"omega_m_rad_s": 1000, "kappa_rad_s": 1e-300, "detuning_rad_s": -1000,
                 "omega_d_rad_s": 10, "gamma_m_per_s": 0, "g_mod_per_s": 0, "omega_2_rad_s": 0, "n_th": 1},
      "grid": {"points_per_side": 17, "span_omega_d": 4, "truncation": 2}})");
    const auto before = s.entries();
    const Result r = run({"analytic", "--config", cfg, "--out", (s.dir / "out").string()});
    CHECK(r.code == splitband::cli::kExitNumerical);
    CHECK(s.entries() == before);
}

TEST_CASE("analytic writes every spectrum, a report and a complete manifest") {
    Scratch s("analytic");
    const std::string cfg = s.write("small.json", kSmall);
    const fs::path out = s.dir / "out";
    const Result r = run({"analytic", "--config", cfg, "--out", out.string()});
    REQUIRE(r.code == 0);
    for (const char* stem : {"S_xx", "S_XpmXpm", "S_yy", "S_yout", "S_yout_motion", "S_yout_imprecision",
                             "S_yout_interference"}) {
        CHECK(fs::exists(out / (std::string(stem) + ".csv")));
        CHECK(fs::exists(out / (std::string(stem) + ".json")));
    }
    const json rep = json::parse(slurp(out / "peak_report.json"));
    CHECK(rep["ratio_prediction"].get<double>() == doctest::Approx(0.4444444));
    CHECK(rep["r"].get<double>() == doctest::Approx(0.4444).epsilon(0.1));
    check_manifest(out);

    SUBCASE("identical inputs give byte-identical CSVs") {
        const fs::path again = s.dir / "again";
        REQUIRE(run({"analytic", "--config", cfg, "--out", again.string()}).code == 0);
        for (const auto& e : fs::directory_iterator(out))
            if (e.path().extension() == ".csv")
                CHECK(slurp(e.path()) == slurp(again / e.path().filename()));
    }
    SUBCASE("grid flags override the config and are hashed") {
        const fs::path coarse = s.dir / "coarse";
        REQUIRE(run({"analytic", "--config", cfg, "--out", coarse.string(), "--grid-points", "128",
                     "--truncation", "6"})
                    .code == 0);
        const json m1 = json::parse(slurp(out / "manifest.json"));
        const json m2 = json::parse(slurp(coarse / "manifest.json"));
        CHECK(m1["config_hash"] != m2["config_hash"]);
        CHECK(m2["effective_config"]["grid"]["truncation"] == 6);
    }
}

TEST_CASE("sweep writes one row per value and rejects unknown parameters") {
    Scratch s("sweep");
    const std::string cfg = s.write("small.json", kSmall);
    const fs::path out = s.dir / "out";
    REQUIRE(run({"sweep", "--config", cfg, "--out", out.string(), "--sweep",
                 "omega_2_over_2omega_d=0,0.05,0.2"})
                .code == 0);
    std::ifstream is(out / "sweep.csv");
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(is, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].find("r_floor") != std::string::npos);
    CHECK(rows[0].find("occupancy") != std::string::npos);
    CHECK(rows[0].find("stokes_ratio") != std::string::npos);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",ok") != std::string::npos);
    check_manifest(out);

    const auto before = s.entries();
    CHECK(run({"sweep", "--config", cfg, "--out", (s.dir / "o2").string(), "--sweep", "bogus=1"}).code ==
          splitband::cli::kExitConfig);
    CHECK(run({"sweep", "--config", cfg, "--out", (s.dir / "o3").string(), "--sweep", "g_mod_per_s=1,x"})
              .code == splitband::cli::kExitConfig);
    CHECK(s.entries() == before);
}

TEST_CASE("simulate writes per-seed trajectories and reproduces them") {
    Scratch s("simulate");
    const std::string cfg = s.write("sim.json", kShortSim);
    const fs::path out = s.dir / "out";
    const Result r = run({"simulate", "--config", cfg, "--out", out.string()});
    REQUIRE(r.code == 0);
    for (int seed : {3, 4}) {
        CHECK(fs::exists(out / "trajectories" / ("seed_" + std::to_string(seed) + ".bin")));
        CHECK(fs::exists(out / "trajectories" / ("seed_" + std::to_string(seed) + ".json")));
    }
    CHECK(fs::exists(out / "sim_S_yy.csv"));
    CHECK(fs::exists(out / "sim_S_xx.csv"));
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["successful_seeds"] == 2);
    CHECK(rep.contains("ensemble_params"));
    check_manifest(out);

    const fs::path again = s.dir / "again";
    REQUIRE(run({"simulate", "--config", cfg, "--out", again.string()}).code == 0);
    CHECK(slurp(out / "sim_S_yy.csv") == slurp(again / "sim_S_yy.csv"));
    CHECK(slurp(out / "trajectories" / "seed_3.bin") == slurp(again / "trajectories" / "seed_3.bin"));

    const fs::path one = s.dir / "one";
    REQUIRE(run({"simulate", "--config", cfg, "--out", one.string(), "--seed", "3"}).code == 0);
    CHECK(fs::exists(one / "trajectories" / "seed_3.bin"));
    CHECK_FALSE(fs::exists(one / "trajectories" / "seed_4.bin"));
}

TEST_CASE("simulate exits 3 when every seed diverges") {
    Scratch s("diverge");
    json doc = json::parse(kShortSim);
    doc["simulation"]["initial_x_m"] = 0.45 * 1064e-9;
    doc["simulation"]["transient_periods"] = 0;
    const std::string cfg = s.write("sim.json", doc.dump());
    const auto before = s.entries();
    const Result r = run({"simulate", "--config", cfg, "--out", (s.dir / "out").string()});
    CHECK(r.code == splitband::cli::kExitNumerical);
    CHECK(r.err.find("seed 3") != std::string::npos);
    CHECK(s.entries() == before);
}

TEST_CASE("fastcavity writes lines and the convolved spectrum") {
    Scratch s("fast");
    const fs::path out = s.dir / "out";
    REQUIRE(run({"fastcavity", "--config", kConfigs + "/twin_peaks.json", "--out", out.string(),
                 "--grid-points", "512"})
                .code == 0);
    CHECK(fs::exists(out / "lines.csv"));
    CHECK(fs::exists(out / "S_cos2kx.csv"));
    const json rep = json::parse(slurp(out / "fastcavity_report.json"));
    CHECK(rep["line_ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    check_manifest(out);
}

TEST_CASE("writing into an existing directory keeps unrelated files") {
    Scratch s("existing");
    const std::string cfg = s.write("small.json", kSmall);
    const fs::path out = s.dir / "out";
    fs::create_directories(out);
    std::ofstream(out / "notes.txt") << "keep";
    REQUIRE(run({"analytic", "--config", cfg, "--out", out.string(), "--grid-points", "128"}).code == 0);
    CHECK(slurp(out / "notes.txt") == "keep");
    CHECK(fs::exists(out / "S_yy.csv"));
}
