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

#include "mapstp/statefeat.hpp"

#include <cmath>
#include <string>

#include "mapstp/errors.hpp"
#include "mapstp/geometry.hpp"

namespace mapstp::statefeat
{

StateVector compute_state(const scenegen::EgoTrack & history)
{
  const auto & p = history.poses;
  if (p.size() < 3) {
    throw DataError(
      "compute_state: insufficient history (" + std::to_string(p.size()) + " poses, need at least 3)");
  }
  if (!(history.dt > 0.0)) {
    throw DataError("compute_state: history dt must be positive");
  }
  const auto & now = p[p.size() - 1];
  const auto & prev = p[p.size() - 2];
  StateVector s;
  s.speed = now.speed;
  s.acceleration = (now.speed - prev.speed) / history.dt;
  s.yaw_rate = wrap_angle(now.heading - prev.heading) / history.dt;
  if (!std::isfinite(s.speed) || !std::isfinite(s.acceleration) || !std::isfinite(s.yaw_rate)) {
    throw DataError("compute_state: non-finite state");
  }
  return s;
}

nn::Tensor normalize_state(const StateVector & s, const NormStats & stats)
{
  const std::array<double, kStateDims> v{s.speed, s.acceleration, s.yaw_rate};
  nn::Tensor out({kStateDims});
  for (std::size_t i = 0; i < kStateDims; ++i) {
    if (!(stats.stddev[i] > 0.0)) {
      throw ConfigError("normalize_state: std of field " + std::to_string(i) + " must be positive");
    }
    out[i] = (v[i] - stats.mean[i]) / stats.stddev[i];
  }
  return out;
}

NormStats compute_norm_stats(std::span<const scenegen::Sample> samples)
{
  NormStats stats;
  if (samples.empty()) {
    return stats;
  }
  std::array<double, kStateDims> sum{};
  std::vector<std::array<double, kStateDims>> values;
  values.reserve(samples.size());
  for (const auto & sample : samples) {
    const StateVector s = compute_state(sample.history);
    values.push_back({s.speed, s.acceleration, s.yaw_rate});
    for (std::size_t i = 0; i < kStateDims; ++i) {
      sum[i] += values.back()[i];
    }
  }
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < kStateDims; ++i) {
    stats.mean[i] = sum[i] / n;
    double sq = 0.0;
    for (const auto & v : values) {
      sq += (v[i] - stats.mean[i]) * (v[i] - stats.mean[i]);
    }
    const double sd = std::sqrt(sq / n);
    stats.stddev[i] = sd > 0.0 ? sd : 1.0;
  }
  return stats;
}

}  // namespace mapstp::statefeat
