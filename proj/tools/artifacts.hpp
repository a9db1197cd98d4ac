#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace splitband::cli {

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string utc_now();

/// Collects a run's files in a hidden sibling directory and moves them into
/// place only on commit, so a failed run leaves nothing behind.
class Staging {
public:
    explicit Staging(std::filesystem::path out_dir);
    ~Staging();
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;

    /// Path for a new artifact, relative names only. Parent directories are
    /// created.
    std::filesystem::path file(const std::string& relative);
    /// Register a file that was written through some other path helper.
    void add(const std::string& relative);

    /// Writes manifest.json (with the file list filled in) and publishes.
    void commit(nlohmann::json manifest);

    const std::filesystem::path& staging_dir() const { return tmp_; }

private:
    std::filesystem::path out_;
    std::filesystem::path tmp_;
    std::vector<std::string> files_;
    bool committed_ = false;
};

/// Manifest skeleton shared by every subcommand.
nlohmann::json manifest_base(const std::string& command, const std::string& config_path,
                             const nlohmann::json& effective_config, const std::string& started);

}  // namespace splitband::cli
