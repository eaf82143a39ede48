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

#ifndef MAPSTP__CLI__SVG_HPP_
#define MAPSTP__CLI__SVG_HPP_

#include <string>

#include "mapstp/model.hpp"
#include "mapstp/raster.hpp"

namespace mapstp::cli
{

inline constexpr int kSvgPixelSize = 4;
inline constexpr int kSvgLegendWidth = 220;

/**
 * Raster background (drivable gray, lanes white), every mode as a red
 * polyline with opacity p / max(p), the selected mode drawn bold, the ground
 * truth in green, an ego marker at the ego pixel, and a legend listing every
 * mode's probability. Output bytes depend only on the inputs.
 */
std::string render_prediction_svg(
  const raster::RasterImage & image, const model::TrajectoryPrediction & pred, const nn::Tensor & ground_truth,
  const std::string & title);

}  // namespace mapstp::cli

#endif  // MAPSTP__CLI__SVG_HPP_
