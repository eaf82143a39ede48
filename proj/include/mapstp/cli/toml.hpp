// Copyright 2026 The MapsTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPSTP__CLI__TOML_HPP_
#define MAPSTP__CLI__TOML_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mapstp::cli
{

/**
 * The TOML subset accepted by config files:
 *   - `# comment` lines and trailing comments
 *   - `[table]` headers (one level, bare keys)
 *   - `key = value` with value an integer, a float, true/false,
 *     a basic "string" (escapes \\ \" \n \t), or a one-line array of numbers
 * Keys are returned fully qualified ("table.key").
 */
using TomlArray = std::vector<double>;
using TomlValue = std::variant<std::int64_t, double, bool, std::string, TomlArray>;
using TomlTable = std::map<std::string, TomlValue>;

/// Throws ConfigError naming the line on malformed input or duplicate keys.
TomlTable parse_toml(std::string_view text, std::string_view source = "config");

}  // namespace mapstp::cli

#endif  // MAPSTP__CLI__TOML_HPP_
