// Copyright 2026 The abisim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abisim/scenario.hpp"

namespace abisim {

inline constexpr const char *kEnvPrefix = "ABISIM_";

/// Parses YAML text. Keys missing from the text keep the defaults of the
/// scenario kind; unknown keys are rejected. Does not validate.
ScenarioConfig parse_config(std::string_view yaml_text);

/// Reads a config file (ConfigError if unreadable or malformed),
/// then applies environment overrides.
ScenarioConfig load_config(const std::filesystem::path &path);

/// YAML for a config; reading it back yields an identical config.
std::string emit_config(const ScenarioConfig &cfg, bool with_comments = false);

/// Dotted config paths, e.g. "chop.duty", in emission order.
std::vector<std::string> config_paths();

/// Sets one field from a YAML scalar. Throws ConfigError for an unknown path
/// or an unparsable value.
void set_config_value(ScenarioConfig &cfg, std::string_view path, std::string_view value);

/// Numeric value of a field (enums and booleans as their index).
double get_config_number(const ScenarioConfig &cfg, std::string_view path);

/// Applies ABISIM_SECTION__KEY=value variables: the part after the prefix is
/// lower-cased and "__" becomes ".". Returns the applied paths.
std::vector<std::string> apply_env_overrides(ScenarioConfig &cfg,
                                             const std::map<std::string, std::string> &env);

/// The ABISIM_* subset of the process environment.
std::map<std::string, std::string> process_env_overrides();

}  // namespace abisim
