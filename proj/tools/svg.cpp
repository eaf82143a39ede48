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

#include "mapstp/cli/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

namespace mapstp::cli
{

namespace
{

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string & s)
{
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 0 background, 1 drivable, 2 lane centerline.
int pixel_class(const raster::RasterImage & img, std::size_t r, std::size_t c)
{
  if (img.at(raster::kLaneCenterlines, r, c) > 0.0) {
    return 2;
  }
  return img.at(raster::kDrivable, r, c) > 0.0 ? 1 : 0;
}

std::string points_of(const raster::RasterConfig & cfg, const nn::Tensor & traj, std::size_t offset, std::size_t steps)
{
  auto to_svg = [&](Vec2 ego) {
    const Vec2 px = cfg.to_pixel(ego);
    return num((px.x + 0.5) * kSvgPixelSize) + "," + num((px.y + 0.5) * kSvgPixelSize);
  };
  std::string s = to_svg({0.0, 0.0});
  for (std::size_t t = 0; t < steps; ++t) {
    s += " " + to_svg({traj[offset + t * 2], traj[offset + t * 2 + 1]});
  }
  return s;
}

}  // namespace

std::string render_prediction_svg(
  const raster::RasterImage & image, const model::TrajectoryPrediction & pred, const nn::Tensor & ground_truth,
  const std::string & title)
{
  const auto & cfg = image.config;
  const int map_w = static_cast<int>(cfg.width) * kSvgPixelSize;
  const int map_h = static_cast<int>(cfg.height) * kSvgPixelSize;
  const std::size_t k = pred.modes.dim(0);
  const std::size_t steps = pred.modes.dim(1);
  const model::Selection sel = model::select_trajectory(pred);
  const double p_max = sel.probability;
  const int height = std::max(map_h, 90 + 18 * static_cast<int>(k));

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(map_w + kSvgLegendWidth) + "\" height=\"" +
       std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(map_w + kSvgLegendWidth) + " " +
       std::to_string(height) + "\">\n";
  s += "<title>" + escape(title) + "</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(map_w + kSvgLegendWidth) + "\" height=\"" +
       std::to_string(height) + "\" fill=\"#ffffff\"/>\n";

  // Background as horizontal runs of equal class.
  static const char * kFill[3] = {"#202020", "#808080", "#ffffff"};
  s += "<g id=\"raster\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t r = 0; r < cfg.height; ++r) {
    std::size_t c = 0;
    while (c < cfg.width) {
      const int cls = pixel_class(image, r, c);
      std::size_t e = c + 1;
      while (e < cfg.width && pixel_class(image, r, e) == cls) {
        ++e;
      }
      s += "<rect x=\"" + std::to_string(c * kSvgPixelSize) + "\" y=\"" + std::to_string(r * kSvgPixelSize) +
           "\" width=\"" + std::to_string((e - c) * kSvgPixelSize) + "\" height=\"" + std::to_string(kSvgPixelSize) +
           "\" fill=\"" + kFill[cls] + "\"/>\n";
      c = e;
    }
  }
  s += "</g>\n";

  s += "<g id=\"modes\" fill=\"none\" stroke-linejoin=\"round\" stroke-linecap=\"round\">\n";
  for (std::size_t i = 0; i < k; ++i) {
    const bool selected = i == sel.index;
    const double opacity = pred.probabilities[i] / p_max;
    s += "<polyline class=\"mode" + std::string(selected ? " selected" : "") + "\" data-mode=\"" + std::to_string(i) +
         "\" stroke=\"#ff0000\" stroke-width=\"" + (selected ? "5" : "2") + "\" stroke-opacity=\"" + num(opacity) +
         "\" points=\"" + points_of(cfg, pred.modes, i * steps * 2, steps) + "\"/>\n";
  }
  s += "</g>\n";
  s += "<polyline class=\"ground-truth\" fill=\"none\" stroke=\"#00c000\" stroke-width=\"3\" points=\"" +
       points_of(cfg, ground_truth, 0, ground_truth.dim(0)) + "\"/>\n";

  const double ex = (static_cast<double>(cfg.ego_col) + 0.5) * kSvgPixelSize;
  const double ey = (static_cast<double>(cfg.ego_row) + 0.5) * kSvgPixelSize;
  s += "<circle id=\"ego\" cx=\"" + num(ex) + "\" cy=\"" + num(ey) + "\" r=\"6\" fill=\"#2060ff\" stroke=\"#000000\"/>\n";

  const int lx = map_w + 12;
  s += "<g id=\"legend\" font-family=\"monospace\" font-size=\"12\" fill=\"#000000\">\n";
  s += "<text x=\"" + std::to_string(lx) + "\" y=\"20\">" + escape(title) + "</text>\n";
  s += "<line x1=\"" + std::to_string(lx) + "\" y1=\"36\" x2=\"" + std::to_string(lx + 24) +
       "\" y2=\"36\" stroke=\"#ff0000\" stroke-width=\"2\"/>\n";
  s += "<text x=\"" + std::to_string(lx + 30) + "\" y=\"40\">predicted modes</text>\n";
  s += "<line x1=\"" + std::to_string(lx) + "\" y1=\"54\" x2=\"" + std::to_string(lx + 24) +
       "\" y2=\"54\" stroke=\"#00c000\" stroke-width=\"3\"/>\n";
  s += "<text x=\"" + std::to_string(lx + 30) + "\" y=\"58\">ground truth</text>\n";
  for (std::size_t i = 0; i < k; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "mode %zu: p=%.4f%s", i, pred.probabilities[i], i == sel.index ? " (selected)" : "");
    s += "<text x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(84 + 18 * static_cast<int>(i)) + "\">" + buf +
         "</text>\n";
  }
  s += "</g>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace mapstp::cli
