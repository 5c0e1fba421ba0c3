#pragma once

#include <string>

#include <json.hpp>

#include "gblobs/genbench.hpp"

namespace gblobs {

/// JSON (de)serialization for the config types. Parsers fill missing fields
/// from the defaults, validate the result, and throw InvalidArgument on
/// semantic problems; the file loaders throw IoError/MalformedFile for
/// unreadable or syntactically invalid files.

nlohmann::json grid_spec_json(const GridSpec& g);
GridSpec grid_spec_from_json(const nlohmann::json& j);

nlohmann::json scene_spec_json(const SceneSpec& s);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

nlohmann::json domain_spec_json(const DomainSpec& d);
DomainSpec domain_spec_from_json(const nlohmann::json& j);

nlohmann::json train_config_json(const TrainConfig& t);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json experiment_config_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// FNV-1a hash of the canonical (sorted-key) config serialization.
uint64_t experiment_config_hash(const ExperimentConfig& c);

nlohmann::json parse_json_file(const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);
SceneSpec load_scene_spec(const std::string& path);

/// Accepts either a domain preset name or a path to a JSON file.
DomainSpec load_domain_spec(const std::string& path_or_preset);

}  // namespace gblobs
