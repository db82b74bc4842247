#pragma once

// JSON form of the campaign configuration.

#include <string>

#include <json.hpp>

#include "mcal/orchestrator.hpp"

namespace mcal {

/// Reads a config object. `learners` is required; every other top-level key
/// falls back to the MCALConfig default. Throws ConfigError naming the
/// offending key.
MCALConfig config_from_json(const nlohmann::json& doc);

/// Throws IoError when unreadable, ConfigError when malformed.
MCALConfig load_config(const std::string& path);

/// Inverse of config_from_json; money values are 6-decimal strings.
nlohmann::json config_to_json(const MCALConfig& config);

/// Accepts a JSON number of dollars or a decimal string such as "0.040000".
Money parse_money(const nlohmann::json& value, const std::string& key);

}  // namespace mcal
