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

#include "mapstp/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mapstp/errors.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::scenegen
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kLaneSpacing = 2.0;  // meters between lane polyline vertices
constexpr double kLateralAccel = 2.5;
constexpr double kComfortDecel = 2.0;
constexpr double kMaxDecel = 4.0;
constexpr double kMaxAccel = 1.5;
constexpr double kSpeedGain = 1.5;
constexpr double kMaxSteer = 0.6;
constexpr double kTurnThreshold = kPi / 4.0;

// Stream separation so scene layout and driving plan never share draws.
constexpr std::uint64_t kTrackSalt = 0x7472616B5EEDULL;

Vec2 right_of(Vec2 v) noexcept { return {v.y, -v.x}; }

std::vector<Vec2> sample_segment(Vec2 a, Vec2 b)
{
  const double len = distance(a, b);
  const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / kLaneSpacing)));
  std::vector<Vec2> pts;
  pts.reserve(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(segments);
    pts.push_back(a + t * (b - a));
  }
  return pts;
}

std::vector<Vec2> sample_arc(Vec2 center, double radius, double start_angle, double sweep)
{
  const double len = radius * std::abs(sweep);
  const auto segments = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(len / 1.0)));
  std::vector<Vec2> pts;
  pts.reserve(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i) {
    const double a = start_angle + sweep * static_cast<double>(i) / static_cast<double>(segments);
    pts.push_back(center + radius * direction(a));
  }
  return pts;
}

std::vector<Vec2> rectangle(Vec2 a, Vec2 b, double half_width)
{
  const Vec2 u = (1.0 / distance(a, b)) * (b - a);
  const Vec2 n = right_of(u);
  return {a + half_width * n, b + half_width * n, b - half_width * n, a - half_width * n};
}

// Four-way junction of two perpendicular two-way roads, centered at the origin.
void build_intersection(MapScene & scene, std::size_t lanes_per_dir, double lw, const SceneGenConfig & cfg)
{
  const double outer = cfg.extent / 2.0;
  const double box = static_cast<double>(lanes_per_dir) * lw + cfg.intersection_margin;
  const double road_half = static_cast<double>(lanes_per_dir) * lw;

  auto offset_of = [lw](std::size_t j) { return (static_cast<double>(j) + 0.5) * lw; };

  // inbound[arm][j], outbound[arm][j] lane indices
  std::vector<std::vector<std::size_t>> inbound(4), outbound(4);
  for (std::size_t arm = 0; arm < 4; ++arm) {
    const Vec2 out_dir = direction(static_cast<double>(arm) * kPi / 2.0);
    const Vec2 in_dir = -1.0 * out_dir;
    for (std::size_t j = 0; j < lanes_per_dir; ++j) {
      const double o = offset_of(j);
      LanePolyline in_lane;
      in_lane.lane_width = lw;
      in_lane.points =
        sample_segment(outer * out_dir + o * right_of(in_dir), box * out_dir + o * right_of(in_dir));
      inbound[arm].push_back(scene.lanes.size());
      scene.lanes.push_back(std::move(in_lane));

      LanePolyline out_lane;
      out_lane.lane_width = lw;
      out_lane.points =
        sample_segment(box * out_dir + o * right_of(out_dir), outer * out_dir + o * right_of(out_dir));
      outbound[arm].push_back(scene.lanes.size());
      scene.lanes.push_back(std::move(out_lane));
    }
    scene.drivable.push_back(rectangle({0.0, 0.0}, outer * out_dir, road_half));
  }
  scene.drivable.push_back({{-box, -box}, {box, -box}, {box, box}, {-box, box}});

  auto add_connector = [&](std::size_t from, std::size_t to, std::vector<Vec2> pts) {
    LanePolyline c;
    c.lane_width = lw;
    c.points = std::move(pts);
    c.successors = {to};
    scene.lanes[from].successors.push_back(scene.lanes.size());
    scene.lanes.push_back(std::move(c));
  };

  for (std::size_t arm = 0; arm < 4; ++arm) {
    const Vec2 u = -1.0 * direction(static_cast<double>(arm) * kPi / 2.0);  // travel direction
    const Vec2 r = right_of(u);
    for (std::size_t j = 0; j < lanes_per_dir; ++j) {
      const double o = offset_of(j);
      const Vec2 entry = -box * u + o * r;
      const std::size_t from = inbound[arm][j];

      add_connector(from, outbound[(arm + 2) % 4][j], sample_segment(entry, box * u + o * r));

      if (j + 1 == lanes_per_dir) {
        const Vec2 corner = -box * u + box * r;
        const Vec2 rel = entry - corner;
        add_connector(
          from, outbound[(arm + 1) % 4][j],
          sample_arc(corner, box - o, std::atan2(rel.y, rel.x), -kPi / 2.0));
      }
      if (j == 0) {
        const Vec2 corner = -box * u - box * r;
        const Vec2 rel = entry - corner;
        add_connector(
          from, outbound[(arm + 3) % 4][j],
          sample_arc(corner, box + o, std::atan2(rel.y, rel.x), kPi / 2.0));
      }
    }
  }
}

// One two-way road through the origin along +x; straight when curvature == 0.
void build_road(MapScene & scene, std::size_t lanes_per_dir, double lw, double curvature, const SceneGenConfig & cfg)
{
  const double half_len = cfg.extent / 2.0;
  const auto segments = static_cast<std::size_t>(std::ceil(2.0 * half_len / kLaneSpacing));
  std::vector<Vec2> axis;
  std::vector<Vec2> left;
  for (std::size_t i = 0; i <= segments; ++i) {
    const double s = -half_len + 2.0 * half_len * static_cast<double>(i) / static_cast<double>(segments);
    if (curvature == 0.0) {
      axis.push_back({s, 0.0});
      left.push_back({0.0, 1.0});
    } else {
      const double psi = curvature * s;
      axis.push_back({std::sin(psi) / curvature, (1.0 - std::cos(psi)) / curvature});
      left.push_back({-std::sin(psi), std::cos(psi)});
    }
  }
  for (std::size_t j = 0; j < lanes_per_dir; ++j) {
    const double o = (static_cast<double>(j) + 0.5) * lw;
    LanePolyline fwd;
    LanePolyline bwd;
    fwd.lane_width = lw;
    bwd.lane_width = lw;
    for (std::size_t i = 0; i <= segments; ++i) {
      fwd.points.push_back(axis[i] - o * left[i]);
      bwd.points.push_back(axis[segments - i] + o * left[segments - i]);
    }
    scene.lanes.push_back(std::move(fwd));
    scene.lanes.push_back(std::move(bwd));
  }
  const double half_width = static_cast<double>(lanes_per_dir) * lw;
  std::vector<Vec2> poly;
  for (std::size_t i = 0; i <= segments; ++i) {
    poly.push_back(axis[i] + half_width * left[i]);
  }
  for (std::size_t i = segments + 1; i-- > 0;) {
    poly.push_back(axis[i] - half_width * left[i]);
  }
  scene.drivable.push_back(std::move(poly));
}

struct RouteGeometry
{
  std::vector<Vec2> points;
  std::vector<double> s;  // cumulative arc length at each point

  double length() const { return s.back(); }

  Vec2 at(double arc) const
  {
    if (arc <= 0.0) {
      const Vec2 d = points[1] - points[0];
      return points[0] + (arc / distance(points[0], points[1])) * d;
    }
    if (arc >= s.back()) {
      const std::size_t n = points.size();
      const Vec2 d = points[n - 1] - points[n - 2];
      return points[n - 1] + ((arc - s.back()) / norm(d)) * d;
    }
    const auto it = std::upper_bound(s.begin(), s.end(), arc);
    const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double t = (arc - s[i]) / (s[i + 1] - s[i]);
    return points[i] + t * (points[i + 1] - points[i]);
  }

  double heading_at(double arc) const
  {
    std::size_t i = 0;
    if (arc >= s.back()) {
      i = points.size() - 2;
    } else if (arc > 0.0) {
      i = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), arc) - s.begin()) - 1;
    }
    const Vec2 d = points[i + 1] - points[i];
    return std::atan2(d.y, d.x);
  }

  // Nearest arc length, searching segments around `hint` only.
  double project(Vec2 p, std::size_t & hint) const
  {
    const std::size_t lo = hint > 4 ? hint - 4 : 0;
    const std::size_t hi = std::min(points.size() - 1, hint + 40);
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = s[lo];
    std::size_t best_i = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec2 a = points[i];
      const Vec2 ab = points[i + 1] - a;
      const double len2 = dot(ab, ab);
      const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
      const double d = distance(p, a + t * ab);
      if (d < best_d) {
        best_d = d;
        best_s = s[i] + t * (s[i + 1] - s[i]);
        best_i = i;
      }
    }
    hint = best_i;
    return best_s;
  }
};

RouteGeometry make_route(std::vector<Vec2> pts)
{
  RouteGeometry r;
  r.points = std::move(pts);
  r.s.assign(r.points.size(), 0.0);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    r.s[i] = r.s[i - 1] + distance(r.points[i - 1], r.points[i]);
  }
  return r;
}

double interpolate(const std::vector<double> & xs, const std::vector<double> & ys, double x)
{
  if (x <= xs.front()) {
    return ys.front();
  }
  if (x >= xs.back()) {
    return ys.back();
  }
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + t * (ys[i + 1] - ys[i]);
}

std::size_t pick_successor(const MapScene & scene, const LanePolyline & lane, Maneuver m)
{
  std::size_t best = lane.successors.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (const std::size_t s : lane.successors) {
    const double turn = lane_turn_angle(scene.lanes[s]);
    double score = std::abs(turn);
    if (m == Maneuver::turn_left) {
      score = -turn;
    } else if (m == Maneuver::turn_right) {
      score = turn;
    }
    if (score < best_score) {
      best_score = score;
      best = s;
    }
  }
  return best;
}

}  // namespace

void SceneGenConfig::validate() const
{
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw ConfigError("scene config: extent must be positive");
  }
  if (!(intersection_probability >= 0.0 && intersection_probability <= 1.0)) {
    throw ConfigError("scene config: intersection_probability must lie in [0, 1]");
  }
  if (!(straight_road_probability >= 0.0 && straight_road_probability <= 1.0)) {
    throw ConfigError("scene config: straight_road_probability must lie in [0, 1]");
  }
  if (min_lanes_per_direction < 1 || min_lanes_per_direction > max_lanes_per_direction || max_lanes_per_direction > 3) {
    throw ConfigError("scene config: lanes per direction must satisfy 1 <= min <= max <= 3");
  }
  if (!(min_lane_width >= 2.5 && max_lane_width <= 4.5 && min_lane_width <= max_lane_width)) {
    throw ConfigError("scene config: lane widths must satisfy 2.5 <= min <= max <= 4.5");
  }
  if (!(min_curve_radius > 0.0 && min_curve_radius <= max_curve_radius)) {
    throw ConfigError("scene config: curve radii must satisfy 0 < min <= max");
  }
  if (!(intersection_margin >= 0.0)) {
    throw ConfigError("scene config: intersection_margin must be non-negative");
  }
  const double box = static_cast<double>(max_lanes_per_direction) * max_lane_width + intersection_margin;
  if (extent / 2.0 <= box + kLaneSpacing) {
    throw ConfigError("scene config: extent too small for the intersection box");
  }
  if (min_curve_radius <= static_cast<double>(max_lanes_per_direction) * max_lane_width * 2.0) {
    throw ConfigError("scene config: min_curve_radius too tight for the road width");
  }
}

std::string_view to_string(Maneuver m) noexcept
{
  switch (m) {
    case Maneuver::keep_lane:
      return "keep_lane";
    case Maneuver::turn_left:
      return "turn_left";
    case Maneuver::turn_right:
      return "turn_right";
    case Maneuver::stop:
      return "stop";
  }
  return "unknown";
}

double lane_turn_angle(const LanePolyline & lane) noexcept
{
  const auto & p = lane.points;
  if (p.size() < 2) {
    return 0.0;
  }
  const Vec2 a = p[1] - p[0];
  const Vec2 b = p[p.size() - 1] - p[p.size() - 2];
  return wrap_angle(std::atan2(b.y, b.x) - std::atan2(a.y, a.x));
}

MapScene generate_scene(std::uint64_t seed, const SceneGenConfig & config)
{
  config.validate();
  Rng rng(seed);
  MapScene scene;
  scene.seed = seed;

  const std::uint64_t lane_choices = config.max_lanes_per_direction - config.min_lanes_per_direction + 1;
  const std::size_t lanes_per_dir = config.min_lanes_per_direction + rng.uniform_int(lane_choices);
  const double lw = rng.uniform(config.min_lane_width, config.max_lane_width);
  const double rotation = rng.uniform(-kPi, kPi);
  const Vec2 offset{rng.uniform(-0.1, 0.1) * config.extent, rng.uniform(-0.1, 0.1) * config.extent};

  if (rng.bernoulli(config.intersection_probability)) {
    build_intersection(scene, lanes_per_dir, lw, config);
  } else {
    double curvature = 0.0;
    if (!rng.bernoulli(config.straight_road_probability)) {
      const double radius = rng.uniform(config.min_curve_radius, config.max_curve_radius);
      curvature = (rng.bernoulli(0.5) ? 1.0 : -1.0) / radius;
    }
    build_road(scene, lanes_per_dir, lw, curvature, config);
  }

  auto place = [&](Vec2 p) { return offset + rotate(p, rotation); };
  for (auto & lane : scene.lanes) {
    for (auto & p : lane.points) {
      p = place(p);
    }
  }
  for (auto & poly : scene.drivable) {
    for (auto & p : poly) {
      p = place(p);
    }
  }
  return scene;
}

std::vector<Vec2> route_polyline(const MapScene & scene, std::span<const std::size_t> route)
{
  std::vector<Vec2> pts;
  for (const std::size_t li : route) {
    for (const Vec2 p : scene.lanes.at(li).points) {
      if (!pts.empty() && distance(pts.back(), p) < 0.05) {
        continue;
      }
      pts.push_back(p);
    }
  }
  return pts;
}

EgoTrack simulate_track(
  const MapScene & scene, std::uint64_t seed, double duration, double dt, const TrackOptions & options)
{
  if (scene.lanes.empty()) {
    throw DataError("simulate_track: scene has no lanes");
  }
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw ConfigError("simulate_track: dt must lie in (0, 0.1] s");
  }
  if (!(duration >= kHistorySeconds + kFutureSeconds)) {
    throw ConfigError("simulate_track: duration must be at least 8 s");
  }

  Rng rng(hash64(seed ^ kTrackSalt));
  EgoTrack track;
  track.dt = dt;

  std::vector<bool> has_pred(scene.lanes.size(), false);
  for (const auto & lane : scene.lanes) {
    for (const std::size_t s : lane.successors) {
      has_pred.at(s) = true;
    }
  }
  std::vector<std::size_t> entries;
  for (std::size_t i = 0; i < scene.lanes.size(); ++i) {
    if (!has_pred[i]) {
      entries.push_back(i);
    }
  }
  if (entries.empty()) {
    entries.push_back(0);
  }

  Maneuver maneuver = options.maneuver.value_or(
    static_cast<Maneuver>(rng.categorical(std::span<const double>(options.mix))));

  auto can_turn = [&](std::size_t lane, double sign) {
    for (const std::size_t s : scene.lanes[lane].successors) {
      if (sign * lane_turn_angle(scene.lanes[s]) > kTurnThreshold) {
        return true;
      }
    }
    return false;
  };

  std::size_t start = 0;
  if (options.start_lane) {
    start = *options.start_lane;
    if (start >= scene.lanes.size()) {
      throw ConfigError("simulate_track: start_lane out of range");
    }
  } else {
    std::vector<std::size_t> candidates;
    for (const std::size_t e : entries) {
      if (
        (maneuver == Maneuver::turn_left && can_turn(e, 1.0)) ||
        (maneuver == Maneuver::turn_right && can_turn(e, -1.0)) ||
        maneuver == Maneuver::keep_lane || maneuver == Maneuver::stop) {
        candidates.push_back(e);
      }
    }
    if (candidates.empty()) {
      maneuver = Maneuver::keep_lane;
      candidates = entries;
    }
    start = candidates[rng.uniform_int(candidates.size())];
  }
  if (maneuver == Maneuver::turn_left && !can_turn(start, 1.0)) {
    maneuver = Maneuver::keep_lane;
  }
  if (maneuver == Maneuver::turn_right && !can_turn(start, -1.0)) {
    maneuver = Maneuver::keep_lane;
  }
  track.maneuver = maneuver;

  track.route.push_back(start);
  while (!scene.lanes[track.route.back()].successors.empty() && track.route.size() < 16) {
    track.route.push_back(pick_successor(scene, scene.lanes[track.route.back()], maneuver));
  }
  const RouteGeometry route = make_route(route_polyline(scene, track.route));
  if (route.points.size() < 2) {
    throw DataError("simulate_track: route polyline is degenerate");
  }

  const double v0 = options.initial_speed.value_or(rng.uniform(5.0, 11.0));
  const double cruise = std::min(kMaxSpeed, options.cruise_speed.value_or(v0));
  const double first_lane_len = make_route(scene.lanes[start].points).length();
  const bool has_junction = track.route.size() > 1;

  double s0 = 0.0;
  if (options.start_offset) {
    s0 = *options.start_offset;
  } else if (has_junction) {
    s0 = std::max(0.0, first_lane_len - v0 * rng.uniform(3.0, 12.0));
  } else {
    s0 = rng.uniform(0.0, 0.25 * route.length());
  }

  double stop_at = std::numeric_limits<double>::infinity();
  if (maneuver == Maneuver::stop) {
    stop_at = has_junction ? first_lane_len - 2.0 : s0 + rng.uniform(25.0, 70.0);
    stop_at = std::clamp(stop_at, s0, route.length());
  }

  // Speed limit per vertex: curvature, stop point and route end, then a
  // backward pass so every limit is reachable at comfortable deceleration.
  const std::size_t n = route.points.size();
  std::vector<double> limit(n, cruise);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec2 a = route.points[i - 1];
    const Vec2 b = route.points[i];
    const Vec2 c = route.points[i + 1];
    const double k = 2.0 * std::abs(cross(b - a, c - b)) / (distance(a, b) * distance(b, c) * distance(a, c));
    if (k > 1e-9) {
      limit[i] = std::min(limit[i], std::sqrt(kLateralAccel / k));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (route.s[i] >= stop_at) {
      limit[i] = 0.0;
    }
  }
  limit[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double ds = route.s[i + 1] - route.s[i];
    limit[i] = std::min(limit[i], std::sqrt(limit[i + 1] * limit[i + 1] + 2.0 * kComfortDecel * ds));
  }

  const Vec2 p0 = route.at(s0);
  double x = p0.x;
  double y = p0.y;
  double heading = route.heading_at(s0);
  double v = std::clamp(v0, 0.0, kMaxSpeed);
  std::size_t hint = 0;
  {
    const auto it = std::upper_bound(route.s.begin(), route.s.end(), s0);
    hint = it == route.s.begin() ? 0 : static_cast<std::size_t>(it - route.s.begin()) - 1;
  }

  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  track.poses.reserve(steps + 1);
  for (std::size_t step = 0; step <= steps; ++step) {
    track.poses.push_back({static_cast<double>(step) * dt, x, y, heading, v});
    if (step == steps) {
      break;
    }
    const double s = route.project({x, y}, hint);
    double accel = 0.0;
    if (options.fixed_acceleration) {
      accel = *options.fixed_acceleration;
    } else {
      const double target = interpolate(route.s, limit, s + 0.5 * v);
      accel = std::clamp(kSpeedGain * (target - v), -kMaxDecel, kMaxAccel);
    }
    const double lookahead = std::clamp(0.4 * v + 1.0, 2.5, 8.0);
    const Vec2 goal = route.at(s + lookahead);
    const double alpha = wrap_angle(std::atan2(goal.y - y, goal.x - x) - heading);
    const double steer = std::clamp(std::atan2(2.0 * kWheelbase * std::sin(alpha), lookahead), -kMaxSteer, kMaxSteer);

    x += v * std::cos(heading) * dt;
    y += v * std::sin(heading) * dt;
    heading = wrap_angle(heading + v / kWheelbase * std::tan(steer) * dt);
    v = std::clamp(v + accel * dt, 0.0, kMaxSpeed);
    if (v < 1e-9) {
      v = 0.0;
    }
  }
  return track;
}

std::vector<Sample> slice_samples(const MapScene & scene, const EgoTrack & track, double stride)
{
  if (!(track.dt > 0.0)) {
    throw ConfigError("slice_samples: track dt must be positive");
  }
  const double frame_ratio = kFramePeriod / track.dt;
  const auto frame_steps = static_cast<std::size_t>(std::llround(frame_ratio));
  if (frame_steps == 0 || std::abs(frame_ratio - static_cast<double>(frame_steps)) > 1e-9) {
    throw ConfigError("slice_samples: track dt must divide 0.5 s");
  }
  const double stride_ratio = stride / track.dt;
  const auto stride_steps = static_cast<std::size_t>(std::llround(stride_ratio));
  if (!(stride > 0.0) || stride_steps == 0 || std::abs(stride_ratio - static_cast<double>(stride_steps)) > 1e-9) {
    throw ConfigError("slice_samples: stride must be a positive multiple of the track dt");
  }

  const std::size_t history_frames = static_cast<std::size_t>(std::llround(kHistorySeconds / kFramePeriod));
  const std::size_t history_steps = history_frames * frame_steps;
  const std::size_t future_steps = kFutureSteps * frame_steps;

  std::vector<Sample> out;
  if (track.poses.empty()) {
    return out;
  }
  const std::size_t last = track.poses.size() - 1;
  for (std::size_t i0 = history_steps; i0 + future_steps <= last; i0 += stride_steps) {
    Sample s;
    s.scene_seed = scene.seed;
    s.t0 = track.poses[i0].t;
    s.maneuver = track.maneuver;
    s.history.dt = kFramePeriod;
    s.history.maneuver = track.maneuver;
    for (std::size_t f = 0; f <= history_frames; ++f) {
      s.history.poses.push_back(track.poses[i0 - history_steps + f * frame_steps]);
    }
    const EgoFrame frame{track.poses[i0].position(), track.poses[i0].heading};
    for (std::size_t f = 1; f <= kFutureSteps; ++f) {
      s.future.push_back(frame.to_ego(track.poses[i0 + f * frame_steps].position()));
    }
    out.push_back(std::move(s));
  }
  return out;
}

EgoFrame ego_frame(const Sample & sample)
{
  if (sample.history.poses.empty()) {
    throw DataError("sample has an empty history");
  }
  const Pose & p = sample.history.poses.back();
  return EgoFrame{p.position(), p.heading};
}

}  // namespace mapstp::scenegen
