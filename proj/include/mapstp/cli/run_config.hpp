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

#ifndef MAPSTP__CLI__RUN_CONFIG_HPP_
#define MAPSTP__CLI__RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mapstp/cli/toml.hpp"
#include "mapstp/dataset.hpp"
#include "mapstp/model.hpp"

namespace mapstp::cli
{

struct EvalSettings
{
  std::string split = "val";
  std::vector<std::size_t> k_list{1, 5, 10};
  std::vector<double> d_list{2.0};
};

struct PredictSettings
{
  std::string split = "test";
  std::size_t sample_index = 0;
};

/// Every knob of every command. Defaults are the documented configuration.
struct RunConfig
{
  std::uint64_t seed = 42;
  scenegen::DatasetGenConfig data;
  model::ModelConfig model;
  model::TrainConfig train;
  EvalSettings eval;
  PredictSettings predict;
};

/// Overwrites fields named in `table`. Unknown keys and wrong types throw ConfigError.
void apply_toml(RunConfig & config, const TomlTable & table);

/// Defaults overlaid with the file's values.
RunConfig load_run_config(const std::filesystem::path & path);

/// The full schema with default values as a TOML document.
std::string default_config_toml();

}  // namespace mapstp::cli

#endif  // MAPSTP__CLI__RUN_CONFIG_HPP_
