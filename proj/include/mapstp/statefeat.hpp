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

#ifndef MAPSTP__STATEFEAT_HPP_
#define MAPSTP__STATEFEAT_HPP_

#include <array>
#include <span>

#include "mapstp/nn/tensor.hpp"
#include "mapstp/scenegen.hpp"

namespace mapstp::statefeat
{

inline constexpr std::size_t kStateDims = 3;

struct StateVector
{
  double speed = 0.0;         // m/s
  double acceleration = 0.0;  // m/s^2
  double yaw_rate = 0.0;      // rad/s
};

/// Instantaneous state at the newest pose from single-step backward differences.
/// Throws DataError with fewer than 3 poses or a non-positive dt.
StateVector compute_state(const scenegen::EgoTrack & history);

/// Per-field z-score statistics in (speed, acceleration, yaw_rate) order.
struct NormStats
{
  std::array<double, kStateDims> mean{0.0, 0.0, 0.0};
  std::array<double, kStateDims> stddev{1.0, 1.0, 1.0};
};

/// (value - mean) / std per field as a (3,) tensor. Throws ConfigError if any std <= 0.
nn::Tensor normalize_state(const StateVector & s, const NormStats & stats);

/// Population mean and standard deviation over the given samples.
/// Fields with zero spread get std 1 so that normalization stays defined.
NormStats compute_norm_stats(std::span<const scenegen::Sample> samples);

}  // namespace mapstp::statefeat

#endif  // MAPSTP__STATEFEAT_HPP_
