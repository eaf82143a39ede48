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

#include "mapstp/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "mapstp/errors.hpp"

namespace mapstp::raster
{

namespace
{

struct Canvas
{
  const RasterConfig & cfg;
  std::vector<double> & data;

  void put_max(std::size_t channel, std::int64_t row, std::int64_t col, double value)
  {
    if (row < 0 || col < 0 || row >= static_cast<std::int64_t>(cfg.height) || col >= static_cast<std::int64_t>(cfg.width)) {
      return;
    }
    double & v = data[(channel * cfg.height + static_cast<std::size_t>(row)) * cfg.width + static_cast<std::size_t>(col)];
    v = std::max(v, value);
  }
};

std::int64_t round_px(double v) { return static_cast<std::int64_t>(std::floor(v + 0.5)); }

void fill_polygon(Canvas & canvas, const std::vector<Vec2> & px)
{
  if (px.size() < 3) {
    return;
  }
  double min_y = px[0].y;
  double max_y = px[0].y;
  for (const Vec2 p : px) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const auto h = static_cast<std::int64_t>(canvas.cfg.height);
  const auto w = static_cast<std::int64_t>(canvas.cfg.width);
  const std::int64_t r0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(min_y)));
  const std::int64_t r1 = std::min<std::int64_t>(h - 1, static_cast<std::int64_t>(std::floor(max_y)));
  std::vector<double> xs;
  for (std::int64_t r = r0; r <= r1; ++r) {
    const double y = static_cast<double>(r);
    xs.clear();
    for (std::size_t i = 0, j = px.size() - 1; i < px.size(); j = i++) {
      const Vec2 a = px[i];
      const Vec2 b = px[j];
      if ((a.y > y) != (b.y > y)) {
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers c with xs[k] <= c < xs[k+1] have an odd number of crossings to their right.
      const std::int64_t c0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(xs[k])));
      const std::int64_t c1 = std::min<std::int64_t>(w, static_cast<std::int64_t>(std::ceil(xs[k + 1])));
      for (std::int64_t c = c0; c < c1; ++c) {
        canvas.put_max(kDrivable, r, c, 1.0);
      }
    }
  }
}

bool outside_same_side(std::int64_t c0, std::int64_t r0, std::int64_t c1, std::int64_t r1, const RasterConfig & cfg)
{
  const auto w = static_cast<std::int64_t>(cfg.width);
  const auto h = static_cast<std::int64_t>(cfg.height);
  return (c0 < 0 && c1 < 0) || (r0 < 0 && r1 < 0) || (c0 >= w && c1 >= w) || (r0 >= h && r1 >= h);
}

// Integer midpoint (Bresenham) line; value(k, steps) gives the intensity of the k-th pixel.
template <typename ValueFn>
void draw_line(Canvas & canvas, std::size_t channel, Vec2 a, Vec2 b, ValueFn value)
{
  std::int64_t c0 = round_px(a.x);
  std::int64_t r0 = round_px(a.y);
  const std::int64_t c1 = round_px(b.x);
  const std::int64_t r1 = round_px(b.y);
  if (outside_same_side(c0, r0, c1, r1, canvas.cfg)) {
    return;
  }
  const std::int64_t dc = std::abs(c1 - c0);
  const std::int64_t dr = -std::abs(r1 - r0);
  const std::int64_t sc = c0 < c1 ? 1 : -1;
  const std::int64_t sr = r0 < r1 ? 1 : -1;
  const std::int64_t steps = std::max(dc, -dr);
  std::int64_t err = dc + dr;
  for (std::int64_t k = 0;; ++k) {
    canvas.put_max(channel, r0, c0, value(k, steps));
    if (c0 == c1 && r0 == r1) {
      break;
    }
    const std::int64_t e2 = 2 * err;
    if (e2 >= dr) {
      err += dr;
      c0 += sc;
    }
    if (e2 <= dc) {
      err += dc;
      r0 += sr;
    }
  }
}

}  // namespace

void RasterConfig::validate() const
{
  if (height == 0 || width == 0) {
    throw ConfigError("raster config: height and width must be positive");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ConfigError("raster config: resolution must be positive");
  }
  if (ego_row >= height || ego_col >= width) {
    throw ConfigError("raster config: ego pixel lies outside the image");
  }
}

RasterImage rasterize(
  const scenegen::MapScene & scene, const EgoFrame & ego, std::span<const scenegen::Pose> history,
  const RasterConfig & config)
{
  config.validate();
  if (!std::isfinite(ego.origin.x) || !std::isfinite(ego.origin.y) || !std::isfinite(ego.heading)) {
    throw ConfigError("rasterize: ego pose must be finite");
  }
  if (history.empty()) {
    throw DataError("rasterize: history must be nonempty");
  }
  RasterImage img;
  img.config = config;
  img.data.assign(kChannelCount * config.height * config.width, 0.0);
  Canvas canvas{img.config, img.data};

  auto project = [&](Vec2 world) { return config.to_pixel(ego.to_ego(world)); };

  std::vector<Vec2> px;
  for (const auto & poly : scene.drivable) {
    px.clear();
    for (const Vec2 p : poly) {
      px.push_back(project(p));
    }
    fill_polygon(canvas, px);
  }

  for (const auto & lane : scene.lanes) {
    for (std::size_t i = 0; i + 1 < lane.points.size(); ++i) {
      draw_line(canvas, kLaneCenterlines, project(lane.points[i]), project(lane.points[i + 1]),
                [](std::int64_t, std::int64_t) { return 1.0; });
    }
  }

  const std::size_t n = history.size();
  auto intensity = [n](std::size_t i) {
    return n == 1 ? 1.0 : 0.25 + 0.75 * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  if (n == 1) {
    const Vec2 p = project(history[0].position());
    canvas.put_max(kEgoHistory, round_px(p.y), round_px(p.x), 1.0);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lo = intensity(i);
    const double hi = intensity(i + 1);
    draw_line(canvas, kEgoHistory, project(history[i].position()), project(history[i + 1].position()),
              [lo, hi](std::int64_t k, std::int64_t steps) {
                return steps == 0 ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
              });
  }
  return img;
}

RasterImage rasterize(const scenegen::MapScene & scene, const scenegen::Sample & sample, const RasterConfig & config)
{
  return rasterize(scene, scenegen::ego_frame(sample), sample.history.poses, config);
}

nn::Tensor raster_to_tensor(const RasterImage & image)
{
  return nn::Tensor({kChannelCount, image.config.height, image.config.width}, image.data);
}

std::string to_pgm(const RasterImage & image, std::size_t channel)
{
  if (channel >= kChannelCount) {
    throw ConfigError("to_pgm: channel index out of range");
  }
  const auto & c = image.config;
  std::string out = "P2\n" + std::to_string(c.width) + " " + std::to_string(c.height) + "\n255\n";
  for (std::size_t r = 0; r < c.height; ++r) {
    for (std::size_t col = 0; col < c.width; ++col) {
      if (col > 0) {
        out += ' ';
      }
      out += std::to_string(static_cast<int>(std::lround(255.0 * image.at(channel, r, col))));
    }
    out += '\n';
  }
  return out;
}

std::string to_ppm(const RasterImage & image)
{
  const auto & c = image.config;
  std::string out = "P3\n" + std::to_string(c.width) + " " + std::to_string(c.height) + "\n255\n";
  for (std::size_t r = 0; r < c.height; ++r) {
    for (std::size_t col = 0; col < c.width; ++col) {
      for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
        if (col > 0 || ch > 0) {
          out += ' ';
        }
        out += std::to_string(static_cast<int>(std::lround(255.0 * image.at(ch, r, col))));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace mapstp::raster
