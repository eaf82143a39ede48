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

#ifndef MAPSTP__GEOMETRY_HPP_
#define MAPSTP__GEOMETRY_HPP_

#include <cmath>
#include <span>
#include <vector>

namespace mapstp
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 direction(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 rotate(Vec2 v, double angle) noexcept
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Maps any angle to (-pi, pi].
double wrap_angle(double angle) noexcept;

/// Even-odd rule. Points exactly on an edge may land on either side.
bool point_in_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept;

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;
double distance_to_polyline(std::span<const Vec2> line, Vec2 p) noexcept;
/// Distance to the polygon boundary, 0 when inside.
double distance_to_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept;

/**
 * Ego-centric frame: origin at the ego position, +y along the heading,
 * +x to the ego's right.
 */
struct EgoFrame
{
  Vec2 origin;
  double heading = 0.0;

  Vec2 to_ego(Vec2 world) const noexcept
  {
    const Vec2 d = world - origin;
    const Vec2 fwd = direction(heading);
    const Vec2 right{fwd.y, -fwd.x};
    return {dot(d, right), dot(d, fwd)};
  }

  Vec2 to_world(Vec2 ego) const noexcept
  {
    const Vec2 fwd = direction(heading);
    const Vec2 right{fwd.y, -fwd.x};
    return origin + ego.x * right + ego.y * fwd;
  }
};

}  // namespace mapstp

#endif  // MAPSTP__GEOMETRY_HPP_
