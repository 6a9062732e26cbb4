#pragma once

#include <string>

#include "json.hpp"
#include "reparam/mapspace.hpp"
#include "reparam/properness.hpp"

namespace reparam {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// Maps travel as {mesh_level, target{tag, dim}, values}. Values round-trip
// exactly: doubles are emitted in shortest form that parses back bitwise.
ordered_json map_to_json(const DiscreteMap& f);
DiscreteMap map_from_json(const ordered_json& j);

std::string target_tag_string(const TargetManifold& t);

ordered_json element_to_json(const MobiusElement& g);
MobiusElement element_from_json(const ordered_json& j);

ordered_json report_to_json(const ExperimentReport& report);

// Flat per-step table for external plotting.
std::string report_to_csv(const ExperimentReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace reparam
