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

#ifndef MAPSTP__CLI__COMMANDS_HPP_
#define MAPSTP__CLI__COMMANDS_HPP_

#include <filesystem>
#include <ostream>
#include <string>

#include "mapstp/cli/run_config.hpp"
#include "mapstp/metrics.hpp"
#include "mapstp/model.hpp"

namespace mapstp::cli
{

// File names inside an output directory.
inline constexpr const char * kCheckpointFile = "checkpoint.bin";
inline constexpr const char * kLossLogFile = "loss_log.csv";

std::filesystem::path split_path(const std::filesystem::path & dir, const std::string & split);

/// Writes train.bin, val.bin, test.bin (and .jsonl twins when requested) and prints counts.
scenegen::DatasetSplits cmd_gen_data(
  const RunConfig & config, const std::filesystem::path & out, bool jsonl, std::ostream & log);

/// Trains on <data>/train.bin, validates on <data>/val.bin; writes checkpoint.bin and loss_log.csv.
model::TrainResult cmd_train(
  const RunConfig & config, const std::filesystem::path & data, const std::filesystem::path & out, std::ostream & log);

/// Evaluates a split; writes report_<split>.txt and report_<split>.json and prints the table.
metrics::MetricsReport cmd_eval(
  const RunConfig & config, const std::filesystem::path & checkpoint, const std::filesystem::path & data,
  const std::filesystem::path & out, std::ostream & log);

/// Renders one sample's prediction to predict_<split>_<index>.svg; returns the file path.
std::filesystem::path cmd_predict(
  const RunConfig & config, const std::filesystem::path & checkpoint, const std::filesystem::path & data,
  const std::filesystem::path & out, std::ostream & log);

/// Loss log CSV text with header "epoch,train_loss,val_minade5".
std::string format_loss_log(const std::vector<model::EpochLog> & log);

/**
 * Entry point of the `mapstp` tool. Returns the process exit code:
 * 0 success, 1 usage or configuration error, 2 data/parse/I/O error,
 * 3 numeric fault or failed self-check.
 */
int run_cli(int argc, char ** argv);

}  // namespace mapstp::cli

#endif  // MAPSTP__CLI__COMMANDS_HPP_
