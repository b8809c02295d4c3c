#pragma once

// JSON forms of scenarios and attack specs.
//
// Scenario files carry "schema": "downgrade-scenario/1"; attack files carry
// "schema": "downgrade-attack/1" and embed two scenarios. Malformed input of
// any kind raises ConfigError.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "downgrade/attacks.hpp"
#include "downgrade/harness.hpp"

namespace downgrade {

inline constexpr std::string_view kScenarioSchema = "downgrade-scenario/1";
inline constexpr std::string_view kAttackSchema = "downgrade-attack/1";

nlohmann::ordered_json endpoint_to_json(const EndpointConfig& c);
EndpointConfig endpoint_from_json(const nlohmann::json& j);

nlohmann::ordered_json script_to_json(const AdversaryScript& s);
AdversaryScript script_from_json(const nlohmann::json& j);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::ordered_json attack_to_json(const AttackSpec& a);
AttackSpec attack_from_json(const nlohmann::json& j);

Scenario load_scenario(const std::filesystem::path& path);
AttackSpec load_attack(const std::filesystem::path& path);
/// Every *.json file in `dir`, sorted by id.
std::vector<AttackSpec> load_attack_dir(const std::filesystem::path& dir);

/// Data directory compiled into the build.
std::filesystem::path default_data_dir();

}  // namespace downgrade
