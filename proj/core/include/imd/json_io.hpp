#pragma once

#include <filesystem>
#include <string>

#include "imd/pipeline.hpp"
#include "imd/scene_simulator.hpp"

namespace imd {

/// Pipeline configuration as JSON. Parsing starts from the defaults and
/// overrides the keys present; unknown keys are a ConfigError.
std::string pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Scenario JSON: either {"preset": ..., "variant": ...} or a full
/// {"scene": ..., "trajectory": ..., "duration_s": ...} description. Both
/// accept "duration_s" and "object_pauses" overrides.
std::string scenario_to_json(const ScenarioVariant& scenario);
ScenarioVariant scenario_from_json(const std::string& text);
ScenarioVariant load_scenario(const std::filesystem::path& path);

/// "preset[:variant]" or a path to a scenario JSON file.
ScenarioVariant resolve_scenario(const std::string& spec);

}  // namespace imd
