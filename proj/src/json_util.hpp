#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mortem/error.hpp"
#include "mortem/models.hpp"
#include "mortem/text.hpp"

// JSON helpers shared by model persistence and report serialization.
namespace mortem::detail {

nlohmann::json to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TextConfig& c);
TextConfig text_config_from_json(const nlohmann::json& j);

template <typename T>
T require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(std::string("field \"") + key + "\" has the wrong type");
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return require<T>(j, key);
}

}  // namespace mortem::detail
