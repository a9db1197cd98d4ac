#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "splitband/core_model.hpp"
#include "splitband/fast_cavity.hpp"
#include "splitband/langevin.hpp"
#include "splitband/spectral_analysis.hpp"

namespace splitband {

struct GridConfig {
    int points_per_side = 4096;
    double span = 8.0;  // in units of omega_d around omega_m
    int truncation = 32;
    bool two_sided = true;
};

struct SimulationSection {
    SimConfig base;  // seed is replaced per run
    std::vector<std::uint64_t> seeds{1};
    WelchOptions welch;
    double homodyne_phase = 0.0;
};

struct FastCavitySection {
    double thermal_amplitude = 0.05;
    double drive_amplitude = 0.0;  // X_d; 0 means take it from the trap or omega_2
    double line_width = 0.0;  // 0 means use gamma_m
    PhaseIndex phase_index = PhaseIndex::integrated;
    int max_harmonic = 0;
};

/// A validated run description. All quantities SI and rad/s.
struct RunConfig {
    std::string name;
    SystemParams system;
    std::optional<TrapParams> trap;
    double drive_amplitude = 0.0;  // X_d used for trap-derived quantities
    GridConfig grid;
    std::optional<SimulationSection> simulation;
    FastCavitySection fast_cavity;
    std::vector<std::string> warnings;
    std::vector<std::string> derived_fields;  // filled from the trap, not the file
    nlohmann::json source;                    // the document as read
};

/// Parses and validates. Field-level ConfigError messages name the path,
/// e.g. "system.kappa_over_2pi_khz: must be > 0".
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Sets `field` (either "section.key" or a bare key looked up in system,
/// trap, simulation, fast_cavity, grid in that order) to `value` in a copy of
/// the document. Throws ConfigError for unknown fields.
nlohmann::json with_override(const nlohmann::json& doc, const std::string& field, double value);

/// Canonical name of a sweep field, "section.key".
std::string resolve_field(const nlohmann::json& doc, const std::string& field);

AnsatzParams ansatz_from(const RunConfig& config);

nlohmann::json to_json(const SystemParams& params);

}  // namespace splitband
