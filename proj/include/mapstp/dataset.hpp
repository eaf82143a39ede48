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

#ifndef MAPSTP__DATASET_HPP_
#define MAPSTP__DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mapstp/scenegen.hpp"

namespace mapstp::scenegen
{

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// A list of samples plus what is needed to regenerate their scenes.
struct Dataset
{
  SceneGenConfig scene_config;
  std::vector<Sample> samples;
};

/**
 * Canonical little-endian binary file:
 *
 *   "MAPSTPDS"            8 bytes magic
 *   u32 format_version    (1)
 *   u32 T_f               (12)
 *   f64 dt                (0.5, waypoint period)
 *   u64 count
 *   u32 n, n bytes        scene-config block (see README)
 *   count records, each:  u32 payload bytes, then
 *     u64 scene_seed, f64 t0, u8 maneuver,
 *     u32 H, H x (f64 t, x, y, heading, speed),
 *     u32 F, F x (f64 x, y)
 */
void write_dataset(const Dataset & dataset, const std::filesystem::path & path);
/// The bytes write_dataset() stores.
std::vector<std::uint8_t> serialize_dataset(const Dataset & dataset);

/// JSON-lines debug form: a header object line then one object per sample.
/// Doubles are printed with 17 significant digits, so the text round-trips.
void write_dataset_jsonl(const Dataset & dataset, const std::filesystem::path & path);

/// Reads either encoding (detected from the first bytes). Throws ParseError
/// naming the failing record on malformed input, IoError if unreadable.
Dataset read_dataset(const std::filesystem::path & path);

struct DatasetGenConfig
{
  std::uint64_t num_scenes = 220;
  double track_duration = 20.0;
  double sim_dt = 0.05;
  double stride = 1.0;
  SceneGenConfig scene;
  ManeuverMix mix = kDefaultManeuverMix;
  double train_fraction = 0.70;
  double val_fraction = 0.15;

  void validate() const;
};

struct DatasetSplits
{
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::uint64_t> train_scenes;
  std::vector<std::uint64_t> val_scenes;
  std::vector<std::uint64_t> test_scenes;
};

/// Scene seeds derived from the master seed by a SplitMix64 stream.
std::vector<std::uint64_t> scene_seeds(std::uint64_t master_seed, std::uint64_t count);

/**
 * Whole scenes are assigned to splits: seeds are ordered by hash64(seed)
 * and the first round(0.70 n) go to train, the next round(0.15 n) to val,
 * the rest to test. Samples inside each split are ordered by (scene seed, t0).
 */
DatasetSplits generate_splits(std::uint64_t master_seed, const DatasetGenConfig & config = {});

/// All samples of one scene: generate, simulate one track, slice.
std::vector<Sample> scene_samples(std::uint64_t scene_seed, const DatasetGenConfig & config);

}  // namespace mapstp::scenegen

#endif  // MAPSTP__DATASET_HPP_
