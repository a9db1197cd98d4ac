#include "artifacts.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>

#include <unistd.h>

#include "splitband/errors.hpp"
#include "splitband/version.hpp"

namespace splitband::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Staging::Staging(fs::path out_dir) : out_(std::move(out_dir)) {
    if (out_.empty()) throw ConfigError("--out: an output directory is required");
    const fs::path abs = fs::absolute(out_).lexically_normal();
    fs::path parent = abs.parent_path();
    std::string leaf = abs.filename().string();
    if (leaf.empty()) {  // trailing slash
        leaf = parent.filename().string();
        parent = parent.parent_path();
        out_ = parent / leaf;
    }
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw ConfigError("--out: cannot create " + parent.string() + ": " + ec.message());
    tmp_ = parent / ("." + leaf + ".partial-" + std::to_string(::getpid()));
    fs::remove_all(tmp_, ec);
    fs::create_directories(tmp_, ec);
    if (ec) throw ConfigError("--out: cannot create " + tmp_.string() + ": " + ec.message());
}

Staging::~Staging() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(tmp_, ec);
    }
}

fs::path Staging::file(const std::string& relative) {
    const fs::path p = tmp_ / relative;
    fs::create_directories(p.parent_path());
    add(relative);
    return p;
}

void Staging::add(const std::string& relative) {
    if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
}

void Staging::commit(nlohmann::json manifest) {
    std::sort(files_.begin(), files_.end());
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : files_) {
        std::ifstream is(tmp_ / f, std::ios::binary);
        if (!is) throw NumericalError("artifact " + f + " was registered but not written");
        const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        list.push_back({{"path", f}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
    }
    manifest["files"] = list;
    manifest["finished_utc"] = utc_now();
    {
        std::ofstream os(tmp_ / "manifest.json", std::ios::binary);
        os << manifest.dump(2) << '\n';
        if (!os) throw NumericalError("cannot write manifest.json");
    }
    files_.push_back("manifest.json");

    std::error_code ec;
    if (!fs::exists(out_)) {
        fs::rename(tmp_, out_, ec);
        if (!ec) {
            committed_ = true;
            return;
        }
    }
    fs::create_directories(out_, ec);
    for (const auto& f : files_) {
        const fs::path dst = out_ / f;
        fs::create_directories(dst.parent_path());
        fs::rename(tmp_ / f, dst, ec);
        if (ec) throw NumericalError("cannot move " + f + " into " + out_.string() + ": " + ec.message());
    }
    fs::remove_all(tmp_, ec);
    committed_ = true;
}

nlohmann::json manifest_base(const std::string& command, const std::string& config_path,
                             const nlohmann::json& effective_config, const std::string& started) {
    nlohmann::json m;
    m["tool"] = "splitband";
    m["version"] = kVersion;
    m["command"] = command;
    m["config_path"] = config_path;
    m["config_hash"] = hex64(fnv1a(effective_config.dump()));
    m["effective_config"] = effective_config;
    m["started_utc"] = started;
    nlohmann::json modules;
    for (const char* name :
         {"core_model", "floquet_solver", "langevin_sim", "fast_cavity", "spectral_analysis", "cli"})
        modules[name] = kVersion;
    m["modules"] = modules;
    return m;
}

}  // namespace splitband::cli
