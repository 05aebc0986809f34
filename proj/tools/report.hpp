#pragma once

#include <iosfwd>

#include <nlohmann/json.hpp>

namespace etadrc::cli {

void print_validation(std::ostream& out, const nlohmann::json& report);
void print_mc_summary(std::ostream& out, const nlohmann::json& summary);
void print_scaling_report(std::ostream& out, const nlohmann::json& report);
void print_manifest(std::ostream& out, const nlohmann::json& manifest);

/// Dispatches on the "kind" field (manifests have "tool" instead).
/// Returns false for an unrecognized document.
bool print_any(std::ostream& out, const nlohmann::json& doc);

}  // namespace etadrc::cli
