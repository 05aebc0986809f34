#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "etadrc/simulator.hpp"

namespace etadrc {

/// A complete experiment: one closed-loop configuration plus the ensemble
/// and sweep settings the mc/sweep commands use.
struct ExperimentConfig {
    std::string preset;  // base the overrides were applied to
    SimConfig sim;
    bool auto_stride = true;  // record_stride derived from the step count
    std::size_t mc_paths = 10;
    double window_fraction = 0.75;
    std::vector<double> r_values;
};

std::vector<std::string> preset_names();

/// Throws ConfigError for an unknown name.
ExperimentConfig preset_config(const std::string& name);

/// Strict reader: every key must be known, every value must have the right
/// type. Errors carry the field path, and parse errors the line and column.
/// A run manifest is accepted too; its embedded config is used.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& source = "<config>");

/// `spec` is either a preset name or a path to a JSON file.
ExperimentConfig load_config(const std::string& spec);

/// Fully resolved form; config_from_json(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Re-derives the stride for the current step and horizon when auto_stride.
void resolve_stride(ExperimentConfig& config);

}  // namespace etadrc
