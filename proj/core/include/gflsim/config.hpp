#pragma once

#include "gflsim/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gflsim {

struct ParsedConfig {
    Scenario scenario;
    SimConfig config;
};

/// Override applied before validation: {"frequency_support.kf", "40"}.
using ConfigOverride = std::pair<std::string, std::string>;

/// Parses a TOML-style document (sections of key = value plus [[events]]
/// tables), fills defaults, applies overrides and validates. Unknown keys
/// and sections are rejected. Required keys: grid.vm, grid.f, simulation.dt,
/// simulation.t_end.
ParsedConfig parse_config(std::string_view text,
                          const std::vector<ConfigOverride>& overrides = {});

ParsedConfig load_config_file(const std::filesystem::path& path,
                              const std::vector<ConfigOverride>& overrides = {});

/// Canonical echo of a resolved configuration: every key explicit, fixed
/// order, shortest round-trip number formatting. Re-parsing the result
/// reproduces the same scenario exactly.
std::string serialize_config(const Scenario& scenario, const SimConfig& config);

/// FNV-1a 64-bit over raw bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

struct RunManifest {
    std::string tool_version;
    std::string input_name;
    std::uint64_t input_hash = 0;
    std::string resolved_config;

    std::string to_text() const;
};

RunManifest make_manifest(const Scenario& scenario, const SimConfig& config,
                          std::string_view input_bytes, std::string_view input_name);

}  // namespace gflsim
