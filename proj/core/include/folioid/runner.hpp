#pragma once

#include <string>
#include <vector>

#include "folioid/params.hpp"
#include "folioid/report.hpp"

namespace folioid {

/// Parsed scenario config. `params` stays as JSON and is interpreted by the
/// family constructor.
struct ScenarioConfig {
  std::string family;
  Json params = Json::object();
  NumericParams numeric;
  std::vector<std::string> pipeline;
};

/// Throws ConfigError on unknown keys, wrong types, non-positive tolerances,
/// samples < 1 or a pipeline entry that does not apply to the family.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);

/// Numeric params as a JSON object with every field present.
Json to_json(const NumericParams& p);

struct RunResult {
  Json report;
  /// 0 when every check passes, 1 otherwise.
  int exit_code = 0;
};

/// Builds the family instance and runs the pipeline in order. A RankDrift or
/// a failed condition (6) stops the pipeline; the partial report is returned.
/// Family parameters that do not fit the constructor raise ConfigError.
RunResult run_scenario(const ScenarioConfig& config);

struct CheckInfo {
  std::string name;
  std::vector<std::string> families;
  std::string description;
};

const std::vector<CheckInfo>& check_catalog();
const std::vector<std::string>& family_names();
/// Throws ConfigError for an unknown family.
std::string describe_family(const std::string& name);
/// The pipeline used when a config does not declare one.
std::vector<std::string> default_pipeline(const std::string& family);

/// Report with the wall_times member removed, for reproducibility checks.
Json without_wall_times(Json report);

}  // namespace folioid
