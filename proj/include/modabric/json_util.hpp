#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "modabric/error.hpp"

namespace modabric {

// Strict-config rule: every key must be known; unknown keys abort with the
// offending key named.
inline void json_check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                            const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": object expected");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(context + ": unknown key '" + key + "'");
}

template <typename T>
T json_get(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

}  // namespace modabric
