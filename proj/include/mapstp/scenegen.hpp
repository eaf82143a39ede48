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

#ifndef MAPSTP__SCENEGEN_HPP_
#define MAPSTP__SCENEGEN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mapstp/geometry.hpp"

namespace mapstp::scenegen
{

/// Waypoint spacing of ground-truth futures and stored histories (2 Hz).
inline constexpr double kFramePeriod = 0.5;
/// Future horizon in frames: 6 s at 2 Hz.
inline constexpr std::size_t kFutureSteps = 12;
/// History window length in seconds.
inline constexpr double kHistorySeconds = 2.0;
inline constexpr double kFutureSeconds = 6.0;
inline constexpr double kWheelbase = 2.7;
inline constexpr double kMaxSpeed = 15.0;

struct LanePolyline
{
  std::vector<Vec2> points;
  double lane_width = 3.5;
  std::vector<std::size_t> successors;
};

struct MapScene
{
  std::vector<LanePolyline> lanes;
  std::vector<std::vector<Vec2>> drivable;
  std::uint64_t seed = 0;
};

/// Knobs of the synthetic map distribution. Defaults are the documented dataset.
struct SceneGenConfig
{
  double extent = 200.0;  // square side, meters
  double intersection_probability = 0.5;
  std::uint32_t min_lanes_per_direction = 1;
  std::uint32_t max_lanes_per_direction = 2;
  double min_lane_width = 3.0;
  double max_lane_width = 4.0;
  /// Share of intersection-free scenes whose road is straight rather than curved.
  double straight_road_probability = 0.4;
  double min_curve_radius = 80.0;
  double max_curve_radius = 250.0;
  /// Distance from the outermost lane edge to the intersection box boundary.
  double intersection_margin = 8.0;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
};

enum class Maneuver : std::uint8_t { keep_lane = 0, turn_left = 1, turn_right = 2, stop = 3 };

std::string_view to_string(Maneuver m) noexcept;

/// Sampling weights in enum order; default 50/20/20/10.
using ManeuverMix = std::array<double, 4>;
inline constexpr ManeuverMix kDefaultManeuverMix = {0.5, 0.2, 0.2, 0.1};

struct Pose
{
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  Vec2 position() const noexcept { return {x, y}; }
};

struct EgoTrack
{
  std::vector<Pose> poses;
  double dt = 0.05;
  Maneuver maneuver = Maneuver::keep_lane;
  /// Lane indices the vehicle was routed along, in driving order.
  std::vector<std::size_t> route;
};

/// Optional overrides of the randomized driving plan; unset fields are drawn from the seed.
struct TrackOptions
{
  std::optional<Maneuver> maneuver;
  std::optional<std::size_t> start_lane;
  std::optional<double> start_offset;  // arc length along the route, meters
  std::optional<double> initial_speed;
  std::optional<double> cruise_speed;
  /// Open-loop longitudinal command; speed control is skipped when set.
  std::optional<double> fixed_acceleration;
  ManeuverMix mix = kDefaultManeuverMix;
};

struct Sample
{
  std::uint64_t scene_seed = 0;
  double t0 = 0.0;
  /// World-frame poses at 2 Hz covering [t0 - 2 s, t0]; back() is the pose at t0.
  EgoTrack history;
  /// Ego-frame waypoints at t0 + 0.5 s, ..., t0 + 6 s.
  std::vector<Vec2> future;
  Maneuver maneuver = Maneuver::keep_lane;
};

MapScene generate_scene(std::uint64_t seed, const SceneGenConfig & config = {});

/// Heading change from the first to the last segment, wrapped.
double lane_turn_angle(const LanePolyline & lane) noexcept;

/**
 * Integrates the kinematic bicycle model (rear-axle reference, wheelbase
 * 2.7 m) along a randomly routed lane sequence with pure-pursuit steering.
 *
 * Throws DataError for a scene without lanes and ConfigError when
 * dt is outside (0, 0.1] or duration < 8 s.
 */
EgoTrack simulate_track(
  const MapScene & scene, std::uint64_t seed, double duration, double dt,
  const TrackOptions & options = {});

/// Windows with 2 s of history and 6 s of future, t0 = 2, 2 + stride, ...
std::vector<Sample> slice_samples(const MapScene & scene, const EgoTrack & track, double stride);

/// World-frame pose of the ego at a sample's t0.
EgoFrame ego_frame(const Sample & sample);

/// Route polyline (concatenated lane points) of a track, duplicate joints removed.
std::vector<Vec2> route_polyline(const MapScene & scene, std::span<const std::size_t> route);

}  // namespace mapstp::scenegen

#endif  // MAPSTP__SCENEGEN_HPP_
