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

#include "mapstp/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "mapstp/errors.hpp"

namespace mapstp::cli
{

namespace
{

struct Binding
{
  std::function<void(RunConfig &, const TomlValue &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> show;
};

double as_double(const TomlValue & v, const std::string & key)
{
  if (const auto * i = std::get_if<std::int64_t>(&v)) {
    return static_cast<double>(*i);
  }
  if (const auto * d = std::get_if<double>(&v)) {
    return *d;
  }
  throw ConfigError("config key '" + key + "' must be a number");
}

std::uint64_t as_uint(const TomlValue & v, const std::string & key)
{
  const auto * i = std::get_if<std::int64_t>(&v);
  if (i == nullptr || *i < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(*i);
}

std::string show_double(double v)
{
  // Shortest representation that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) {
    s += ".0";
  }
  return s;
}

template <typename T>
Binding real(T RunConfig::*section, double T::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) { (c.*section).*field = as_double(v, k); },
          [=](const RunConfig & c) { return show_double((c.*section).*field); }};
}

template <typename T, typename U>
Binding integer(T RunConfig::*section, U T::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) {
            const std::uint64_t x = as_uint(v, k);
            if (x > std::numeric_limits<U>::max()) {
              throw ConfigError("config key '" + k + "' is out of range");
            }
            (c.*section).*field = static_cast<U>(x);
          },
          [=](const RunConfig & c) { return std::to_string((c.*section).*field); }};
}

Binding mix_entry(std::size_t i)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) { c.data.mix[i] = as_double(v, k); },
          [=](const RunConfig & c) { return show_double(c.data.mix[i]); }};
}

Binding scene_real(double scenegen::SceneGenConfig::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) { c.data.scene.*field = as_double(v, k); },
          [=](const RunConfig & c) { return show_double(c.data.scene.*field); }};
}

Binding scene_uint(std::uint32_t scenegen::SceneGenConfig::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) {
            const std::uint64_t x = as_uint(v, k);
            if (x > 0xFFFFFFFFULL) {
              throw ConfigError("config key '" + k + "' is out of range");
            }
            c.data.scene.*field = static_cast<std::uint32_t>(x);
          },
          [=](const RunConfig & c) { return std::to_string(c.data.scene.*field); }};
}

Binding raster_real(double raster::RasterConfig::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) { c.model.raster.*field = as_double(v, k); },
          [=](const RunConfig & c) { return show_double(c.model.raster.*field); }};
}

Binding raster_size(std::size_t raster::RasterConfig::*field)
{
  return {[=](RunConfig & c, const TomlValue & v, const std::string & k) { c.model.raster.*field = as_uint(v, k); },
          [=](const RunConfig & c) { return std::to_string(c.model.raster.*field); }};
}

std::string string_of(const TomlValue & v, const std::string & key)
{
  const auto * s = std::get_if<std::string>(&v);
  if (s == nullptr) {
    throw ConfigError("config key '" + key + "' must be a string");
  }
  return *s;
}

const TomlArray & array_of(const TomlValue & v, const std::string & key)
{
  const auto * a = std::get_if<TomlArray>(&v);
  if (a == nullptr) {
    throw ConfigError("config key '" + key + "' must be an array of numbers");
  }
  return *a;
}

std::vector<std::size_t> size_list(const TomlValue & v, const std::string & key)
{
  std::vector<std::size_t> out;
  for (const double x : array_of(v, key)) {
    if (!(x >= 1.0) || x != std::floor(x) || x > 1e9) {
      throw ConfigError("config key '" + key + "' must hold positive integers");
    }
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

template <typename T>
std::string show_list(const std::vector<T> & v)
{
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) {
      s += ", ";
    }
    if constexpr (std::is_floating_point_v<T>) {
      s += show_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s + "]";
}

std::string quote(const std::string & s)
{
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
    }
    out += c;
  }
  return out + "\"";
}

// Ordered so that default_config_toml() groups keys by table.
const std::vector<std::pair<std::string, Binding>> & bindings()
{
  using scenegen::SceneGenConfig;
  using scenegen::DatasetGenConfig;
  static const std::vector<std::pair<std::string, Binding>> table = {
    {"seed",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.seed = as_uint(v, k); },
      [](const RunConfig & c) { return std::to_string(c.seed); }}},
    {"data.num_scenes", integer(&RunConfig::data, &DatasetGenConfig::num_scenes)},
    {"data.track_duration", real(&RunConfig::data, &DatasetGenConfig::track_duration)},
    {"data.sim_dt", real(&RunConfig::data, &DatasetGenConfig::sim_dt)},
    {"data.stride", real(&RunConfig::data, &DatasetGenConfig::stride)},
    {"data.train_fraction", real(&RunConfig::data, &DatasetGenConfig::train_fraction)},
    {"data.val_fraction", real(&RunConfig::data, &DatasetGenConfig::val_fraction)},
    {"scene.extent", scene_real(&SceneGenConfig::extent)},
    {"scene.intersection_probability", scene_real(&SceneGenConfig::intersection_probability)},
    {"scene.min_lanes_per_direction", scene_uint(&SceneGenConfig::min_lanes_per_direction)},
    {"scene.max_lanes_per_direction", scene_uint(&SceneGenConfig::max_lanes_per_direction)},
    {"scene.min_lane_width", scene_real(&SceneGenConfig::min_lane_width)},
    {"scene.max_lane_width", scene_real(&SceneGenConfig::max_lane_width)},
    {"scene.straight_road_probability", scene_real(&SceneGenConfig::straight_road_probability)},
    {"scene.min_curve_radius", scene_real(&SceneGenConfig::min_curve_radius)},
    {"scene.max_curve_radius", scene_real(&SceneGenConfig::max_curve_radius)},
    {"scene.intersection_margin", scene_real(&SceneGenConfig::intersection_margin)},
    {"maneuver.keep_lane", mix_entry(0)},
    {"maneuver.turn_left", mix_entry(1)},
    {"maneuver.turn_right", mix_entry(2)},
    {"maneuver.stop", mix_entry(3)},
    {"raster.height", raster_size(&raster::RasterConfig::height)},
    {"raster.width", raster_size(&raster::RasterConfig::width)},
    {"raster.resolution", raster_real(&raster::RasterConfig::resolution)},
    {"raster.ego_row", raster_size(&raster::RasterConfig::ego_row)},
    {"raster.ego_col", raster_size(&raster::RasterConfig::ego_col)},
    {"model.num_modes", integer(&RunConfig::model, &model::ModelConfig::num_modes)},
    {"model.backbone_channels",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.model.backbone_channels = size_list(v, k); },
      [](const RunConfig & c) { return show_list(c.model.backbone_channels); }}},
    {"model.head_hidden", integer(&RunConfig::model, &model::ModelConfig::head_hidden)},
    {"model.loss_alpha", real(&RunConfig::model, &model::ModelConfig::loss_alpha)},
    {"model.trajectory_scale", real(&RunConfig::model, &model::ModelConfig::trajectory_scale)},
    {"train.epochs", integer(&RunConfig::train, &model::TrainConfig::epochs)},
    {"train.batch_size", integer(&RunConfig::train, &model::TrainConfig::batch_size)},
    {"train.learning_rate", real(&RunConfig::train, &model::TrainConfig::learning_rate)},
    {"eval.split",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.eval.split = string_of(v, k); },
      [](const RunConfig & c) { return quote(c.eval.split); }}},
    {"eval.k_list",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.eval.k_list = size_list(v, k); },
      [](const RunConfig & c) { return show_list(c.eval.k_list); }}},
    {"eval.d_list",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.eval.d_list = array_of(v, k); },
      [](const RunConfig & c) { return show_list(c.eval.d_list); }}},
    {"predict.split",
     {[](RunConfig & c, const TomlValue & v, const std::string & k) { c.predict.split = string_of(v, k); },
      [](const RunConfig & c) { return quote(c.predict.split); }}},
    {"predict.sample_index", integer(&RunConfig::predict, &PredictSettings::sample_index)},
  };
  return table;
}

}  // namespace

void apply_toml(RunConfig & config, const TomlTable & table)
{
  std::map<std::string, const Binding *> index;
  for (const auto & [key, b] : bindings()) {
    index.emplace(key, &b);
  }
  for (const auto & [key, value] : table) {
    const auto it = index.find(key);
    if (it == index.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    it->second->set(config, value, key);
  }
}

RunConfig load_run_config(const std::filesystem::path & path)
{
  const auto bytes = detail::read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  RunConfig config;
  apply_toml(config, parse_toml(text, path.string()));
  return config;
}

std::string default_config_toml()
{
  const RunConfig defaults;
  std::ostringstream out;
  std::string section;
  for (const auto & [key, b] : bindings()) {
    const auto dot = key.find('.');
    const std::string table = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (table != section) {
      out << "\n[" << table << "]\n";
      section = table;
    }
    out << name << " = " << b.show(defaults) << "\n";
  }
  return out.str();
}

}  // namespace mapstp::cli
