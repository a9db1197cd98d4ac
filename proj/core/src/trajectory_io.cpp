#include <bit>
#include <cstring>
#include <fstream>

#include "splitband/errors.hpp"
#include "splitband/langevin.hpp"

namespace splitband {

namespace {

constexpr char kMagic[8] = {'S', 'B', 'T', 'R', 'A', 'J', '0', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ConfigError("trajectory file is truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

}  // namespace

void write_trajectory(const Trajectory& tr, const SimConfig& config,
                      const std::filesystem::path& stem) {
    std::filesystem::path bin = stem;
    bin += ".bin";
    std::filesystem::path side = stem;
    side += ".json";
    {
        std::ofstream os(bin, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + bin.string());
        os.write(kMagic, sizeof kMagic);
        put_le(os, tr.config_hash);
        put_le(os, tr.seed);
        put_le(os, tr.dt);
        put_le(os, tr.sample_interval);
        put_le(os, tr.t0);
        put_le(os, static_cast<std::uint64_t>(tr.size()));
        for (std::size_t i = 0; i < tr.size(); ++i) {
            put_le(os, tr.x[i]);
            put_le(os, tr.p[i]);
            put_le(os, tr.a[i].real());
            put_le(os, tr.a[i].imag());
        }
        if (!os) throw ConfigError("write failed for " + bin.string());
    }
    nlohmann::json j;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(tr.config_hash));
    j["config_hash"] = hash;
    j["seed"] = tr.seed;
    j["dt_s"] = tr.dt;
    j["sample_interval_s"] = tr.sample_interval;
    j["t0_s"] = tr.t0;
    j["samples"] = tr.size();
    j["payload"] = "little-endian float64, interleaved x_m, p_kg_m_s, re_a, im_a";
    j["binary"] = bin.filename().string();
    j["config"] = to_json(config);
    std::ofstream os(side, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + side.string());
    os << j.dump(1) << '\n';
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError(path.string() + " is not a trajectory record");
    Trajectory tr;
    tr.config_hash = get_le<std::uint64_t>(is);
    tr.seed = get_le<std::uint64_t>(is);
    tr.dt = get_le<double>(is);
    tr.sample_interval = get_le<double>(is);
    tr.t0 = get_le<double>(is);
    const auto n = get_le<std::uint64_t>(is);
    tr.x.resize(n);
    tr.p.resize(n);
    tr.a.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        tr.x[i] = get_le<double>(is);
        tr.p[i] = get_le<double>(is);
        const double re = get_le<double>(is);
        const double im = get_le<double>(is);
        tr.a[i] = cplx(re, im);
    }
    return tr;
}

void write_trajectory_csv(const Trajectory& tr, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << "t_s,x_m,p_kg_m_s,re_a,im_a\n";
    char buf[160];
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.t0 + static_cast<double>(i) * tr.sample_interval;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, tr.x[i], tr.p[i],
                      tr.a[i].real(), tr.a[i].imag());
        os << buf;
    }
}

}  // namespace splitband
