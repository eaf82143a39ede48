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

#ifndef MAPSTP__RASTER_HPP_
#define MAPSTP__RASTER_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mapstp/geometry.hpp"
#include "mapstp/nn/tensor.hpp"
#include "mapstp/scenegen.hpp"

namespace mapstp::raster
{

enum Channel : std::size_t { kDrivable = 0, kLaneCenterlines = 1, kEgoHistory = 2, kChannelCount = 3 };

/// Ego-centric bird's-eye-view geometry. The ego heading points up (towards row 0).
struct RasterConfig
{
  std::size_t height = 128;
  std::size_t width = 128;
  double resolution = 0.5;  // meters per pixel
  std::size_t ego_row = 96;
  std::size_t ego_col = 64;

  void validate() const;

  /// Continuous pixel coordinates (col, row) of an ego-frame point; integers are pixel centers.
  Vec2 to_pixel(Vec2 ego) const noexcept
  {
    return {static_cast<double>(ego_col) + ego.x / resolution, static_cast<double>(ego_row) - ego.y / resolution};
  }
  /// Ego-frame point at pixel-space position (col, row).
  Vec2 to_ego(Vec2 pixel) const noexcept
  {
    return {(pixel.x - static_cast<double>(ego_col)) * resolution, (static_cast<double>(ego_row) - pixel.y) * resolution};
  }
};

struct RasterImage
{
  RasterConfig config;
  /// kChannelCount x height x width, row-major, values in [0, 1].
  std::vector<double> data;

  double at(std::size_t channel, std::size_t row, std::size_t col) const
  {
    return data[(channel * config.height + row) * config.width + col];
  }
};

/**
 * Renders [drivable, lane centerlines, ego history] around `ego`.
 *
 * Drivable polygons are filled (pixel centers inside by the even-odd rule),
 * centerlines are 1-px integer midpoint lines between rounded endpoints, and
 * the history polyline fades linearly from 1.0 at the newest pose to 0.25 at
 * the oldest. Geometry outside the view is clipped.
 */
RasterImage rasterize(
  const scenegen::MapScene & scene, const EgoFrame & ego, std::span<const scenegen::Pose> history,
  const RasterConfig & config = {});

/// Raster of a sample in its own ego frame at t0.
RasterImage rasterize(
  const scenegen::MapScene & scene, const scenegen::Sample & sample, const RasterConfig & config = {});

/// Lossless copy to a (3, H, W) tensor.
nn::Tensor raster_to_tensor(const RasterImage & image);

/**
 * One channel as plain-text PGM ("P2"):
 *   "P2\n<width> <height>\n255\n", then one line per row with the values
 *   round(255 * v) separated by single spaces.
 */
std::string to_pgm(const RasterImage & image, std::size_t channel);

/// All channels as plain-text PPM ("P3"): R = drivable, G = lanes, B = history.
std::string to_ppm(const RasterImage & image);

}  // namespace mapstp::raster

#endif  // MAPSTP__RASTER_HPP_
