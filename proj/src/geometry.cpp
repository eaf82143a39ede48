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

#include "mapstp/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace mapstp
{

double wrap_angle(double angle) noexcept
{
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) {
    r += 2.0 * std::numbers::pi;
  }
  return r;
}

bool point_in_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept
{
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept
{
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) {
    return distance(p, a);
  }
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double distance_to_polyline(std::span<const Vec2> line, Vec2 p) noexcept
{
  if (line.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  if (line.size() == 1) {
    return distance(p, line[0]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, distance_to_segment(p, line[i], line[i + 1]));
  }
  return best;
}

double distance_to_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept
{
  if (point_in_polygon(polygon, p)) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    best = std::min(best, distance_to_segment(p, polygon[j], polygon[i]));
  }
  return best;
}

}  // namespace mapstp
