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

#include "mapstp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "binary_io.hpp"
#include "mapstp/errors.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::scenegen
{

namespace
{

constexpr std::string_view kMagic = "MAPSTPDS";

void encode_scene_config(detail::ByteWriter & w, const SceneGenConfig & c)
{
  detail::ByteWriter block;
  block.f64(c.extent);
  block.f64(c.intersection_probability);
  block.u32(c.min_lanes_per_direction);
  block.u32(c.max_lanes_per_direction);
  block.f64(c.min_lane_width);
  block.f64(c.max_lane_width);
  block.f64(c.straight_road_probability);
  block.f64(c.min_curve_radius);
  block.f64(c.max_curve_radius);
  block.f64(c.intersection_margin);
  w.u32(static_cast<std::uint32_t>(block.size()));
  w.append(block);
}

SceneGenConfig decode_scene_config(detail::ByteReader & r)
{
  const std::uint32_t n = r.u32();
  detail::ByteReader b = r.sub(n, "dataset header scene-config block");
  SceneGenConfig c;
  c.extent = b.f64();
  c.intersection_probability = b.f64();
  c.min_lanes_per_direction = b.u32();
  c.max_lanes_per_direction = b.u32();
  c.min_lane_width = b.f64();
  c.max_lane_width = b.f64();
  c.straight_road_probability = b.f64();
  c.min_curve_radius = b.f64();
  c.max_curve_radius = b.f64();
  c.intersection_margin = b.f64();
  return c;
}

Maneuver decode_maneuver(std::uint64_t raw, const std::string & where)
{
  if (raw > static_cast<std::uint64_t>(Maneuver::stop)) {
    throw ParseError(where + ": invalid maneuver code " + std::to_string(raw));
  }
  return static_cast<Maneuver>(raw);
}

void check_sample(const Sample & s, const std::string & where)
{
  if (s.future.size() != kFutureSteps) {
    throw ParseError(
      where + ": future has " + std::to_string(s.future.size()) + " waypoints, expected " +
      std::to_string(kFutureSteps));
  }
  if (s.history.poses.empty()) {
    throw ParseError(where + ": empty history");
  }
}

Dataset read_binary(const std::vector<std::uint8_t> & bytes, const std::string & name)
{
  detail::ByteReader r(bytes.data(), bytes.size(), name + ": header");
  if (r.raw(kMagic.size()) != kMagic) {
    r.fail("bad magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kDatasetFormatVersion) {
    r.fail("unsupported format_version " + std::to_string(version));
  }
  const std::uint32_t tf = r.u32();
  if (tf != kFutureSteps) {
    r.fail("T_f " + std::to_string(tf) + " does not match " + std::to_string(kFutureSteps));
  }
  const double dt = r.f64();
  if (dt != kFramePeriod) {
    r.fail("dt " + std::to_string(dt) + " does not match 0.5");
  }
  const std::uint64_t count = r.u64();
  Dataset ds;
  ds.scene_config = decode_scene_config(r);
  ds.samples.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1U << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string where = name + ": record " + std::to_string(i);
    r.set_context(where);
    const std::uint32_t len = r.u32();
    detail::ByteReader rec = r.sub(len, where);
    Sample s;
    s.scene_seed = rec.u64();
    s.t0 = rec.f64();
    s.maneuver = decode_maneuver(rec.u8(), where);
    s.history.maneuver = s.maneuver;
    s.history.dt = kFramePeriod;
    const std::uint32_t nh = rec.u32();
    if (nh > rec.remaining() / 40) {
      rec.fail("history length " + std::to_string(nh) + " exceeds record size");
    }
    for (std::uint32_t k = 0; k < nh; ++k) {
      Pose p;
      p.t = rec.f64();
      p.x = rec.f64();
      p.y = rec.f64();
      p.heading = rec.f64();
      p.speed = rec.f64();
      s.history.poses.push_back(p);
    }
    const std::uint32_t nf = rec.u32();
    if (nf > rec.remaining() / 16) {
      rec.fail("future length " + std::to_string(nf) + " exceeds record size");
    }
    for (std::uint32_t k = 0; k < nf; ++k) {
      const double x = rec.f64();
      const double y = rec.f64();
      s.future.push_back({x, y});
    }
    if (!rec.done()) {
      rec.fail("trailing bytes in record");
    }
    check_sample(s, where);
    ds.samples.push_back(std::move(s));
  }
  if (!r.done()) {
    throw ParseError(name + ": trailing bytes after record " + std::to_string(count));
  }
  return ds;
}

nlohmann::json scene_config_json(const SceneGenConfig & c)
{
  return {
    {"extent", c.extent},
    {"intersection_probability", c.intersection_probability},
    {"min_lanes_per_direction", c.min_lanes_per_direction},
    {"max_lanes_per_direction", c.max_lanes_per_direction},
    {"min_lane_width", c.min_lane_width},
    {"max_lane_width", c.max_lane_width},
    {"straight_road_probability", c.straight_road_probability},
    {"min_curve_radius", c.min_curve_radius},
    {"max_curve_radius", c.max_curve_radius},
    {"intersection_margin", c.intersection_margin}};
}

Dataset read_jsonl(const std::vector<std::uint8_t> & bytes, const std::string & name)
{
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  Dataset ds;
  std::uint64_t count = 0;
  bool have_header = false;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const std::string where =
      have_header ? name + ": record " + std::to_string(index) : name + ": header";
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.at("format_version").get<std::uint32_t>() != kDatasetFormatVersion) {
          throw ParseError(where + ": unsupported format_version");
        }
        if (j.at("T_f").get<std::uint32_t>() != kFutureSteps) {
          throw ParseError(where + ": T_f mismatch");
        }
        count = j.at("count").get<std::uint64_t>();
        const auto & c = j.at("scene_config");
        auto & sc = ds.scene_config;
        sc.extent = c.at("extent").get<double>();
        sc.intersection_probability = c.at("intersection_probability").get<double>();
        sc.min_lanes_per_direction = c.at("min_lanes_per_direction").get<std::uint32_t>();
        sc.max_lanes_per_direction = c.at("max_lanes_per_direction").get<std::uint32_t>();
        sc.min_lane_width = c.at("min_lane_width").get<double>();
        sc.max_lane_width = c.at("max_lane_width").get<double>();
        sc.straight_road_probability = c.at("straight_road_probability").get<double>();
        sc.min_curve_radius = c.at("min_curve_radius").get<double>();
        sc.max_curve_radius = c.at("max_curve_radius").get<double>();
        sc.intersection_margin = c.at("intersection_margin").get<double>();
        have_header = true;
        continue;
      }
      Sample s;
      s.scene_seed = j.at("scene_seed").get<std::uint64_t>();
      s.t0 = j.at("t0").get<double>();
      s.maneuver = decode_maneuver(j.at("maneuver").get<std::uint64_t>(), where);
      s.history.maneuver = s.maneuver;
      s.history.dt = kFramePeriod;
      for (const auto & p : j.at("history")) {
        s.history.poses.push_back(
          {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(), p.at(3).get<double>(),
           p.at(4).get<double>()});
      }
      for (const auto & p : j.at("future")) {
        s.future.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      check_sample(s, where);
      ds.samples.push_back(std::move(s));
      ++index;
    } catch (const nlohmann::json::exception & e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (!have_header) {
    throw ParseError(name + ": missing header line");
  }
  if (index != count) {
    throw ParseError(
      name + ": record " + std::to_string(index) + ": truncated (header announces " +
      std::to_string(count) + " records)");
  }
  return ds;
}

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const Dataset & dataset)
{
  detail::ByteWriter w;
  w.raw(kMagic);
  w.u32(kDatasetFormatVersion);
  w.u32(static_cast<std::uint32_t>(kFutureSteps));
  w.f64(kFramePeriod);
  w.u64(dataset.samples.size());
  encode_scene_config(w, dataset.scene_config);
  for (const Sample & s : dataset.samples) {
    detail::ByteWriter rec;
    rec.u64(s.scene_seed);
    rec.f64(s.t0);
    rec.u8(static_cast<std::uint8_t>(s.maneuver));
    rec.u32(static_cast<std::uint32_t>(s.history.poses.size()));
    for (const Pose & p : s.history.poses) {
      rec.f64(p.t);
      rec.f64(p.x);
      rec.f64(p.y);
      rec.f64(p.heading);
      rec.f64(p.speed);
    }
    rec.u32(static_cast<std::uint32_t>(s.future.size()));
    for (const Vec2 & p : s.future) {
      rec.f64(p.x);
      rec.f64(p.y);
    }
    w.u32(static_cast<std::uint32_t>(rec.size()));
    w.append(rec);
  }
  return w.bytes();
}

void write_dataset(const Dataset & dataset, const std::filesystem::path & path)
{
  detail::write_file(path, serialize_dataset(dataset));
}

void write_dataset_jsonl(const Dataset & dataset, const std::filesystem::path & path)
{
  std::string out;
  nlohmann::json header = {
    {"format_version", kDatasetFormatVersion},
    {"T_f", kFutureSteps},
    {"dt", kFramePeriod},
    {"count", dataset.samples.size()},
    {"scene_config", scene_config_json(dataset.scene_config)}};
  out += header.dump() + "\n";
  for (const Sample & s : dataset.samples) {
    nlohmann::json hist = nlohmann::json::array();
    for (const Pose & p : s.history.poses) {
      hist.push_back({p.t, p.x, p.y, p.heading, p.speed});
    }
    nlohmann::json fut = nlohmann::json::array();
    for (const Vec2 & p : s.future) {
      fut.push_back({p.x, p.y});
    }
    nlohmann::json rec = {
      {"scene_seed", s.scene_seed},
      {"t0", s.t0},
      {"maneuver", static_cast<int>(s.maneuver)},
      {"maneuver_label", std::string(to_string(s.maneuver))},
      {"history", std::move(hist)},
      {"future", std::move(fut)}};
    out += rec.dump() + "\n";
  }
  detail::write_text_file(path, out);
}

Dataset read_dataset(const std::filesystem::path & path)
{
  const auto bytes = detail::read_file(path);
  const std::string name = path.filename().string();
  if (bytes.size() >= kMagic.size() && std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    return read_binary(bytes, name);
  }
  if (!bytes.empty() && bytes.front() == '{') {
    return read_jsonl(bytes, name);
  }
  throw ParseError(name + ": header: unrecognized dataset encoding");
}

void DatasetGenConfig::validate() const
{
  scene.validate();
  if (num_scenes == 0) {
    throw ConfigError("dataset config: num_scenes must be positive");
  }
  if (!(train_fraction >= 0.0 && val_fraction >= 0.0 && train_fraction + val_fraction <= 1.0)) {
    throw ConfigError("dataset config: split fractions must be non-negative and sum to at most 1");
  }
  if (!(track_duration >= kHistorySeconds + kFutureSeconds)) {
    throw ConfigError("dataset config: track_duration must be at least 8 s");
  }
}

std::vector<std::uint64_t> scene_seeds(std::uint64_t master_seed, std::uint64_t count)
{
  std::vector<std::uint64_t> seeds;
  seeds.reserve(count);
  std::uint64_t state = master_seed;
  for (std::uint64_t i = 0; i < count; ++i) {
    seeds.push_back(splitmix64(state));
  }
  return seeds;
}

std::vector<Sample> scene_samples(std::uint64_t scene_seed, const DatasetGenConfig & config)
{
  const MapScene scene = generate_scene(scene_seed, config.scene);
  TrackOptions opts;
  opts.mix = config.mix;
  const EgoTrack track = simulate_track(scene, scene_seed, config.track_duration, config.sim_dt, opts);
  return slice_samples(scene, track, config.stride);
}

DatasetSplits generate_splits(std::uint64_t master_seed, const DatasetGenConfig & config)
{
  config.validate();
  std::vector<std::uint64_t> seeds = scene_seeds(master_seed, config.num_scenes);
  std::sort(seeds.begin(), seeds.end(), [](std::uint64_t a, std::uint64_t b) {
    const std::uint64_t ha = hash64(a);
    const std::uint64_t hb = hash64(b);
    return ha != hb ? ha < hb : a < b;
  });
  const auto n = static_cast<double>(seeds.size());
  const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * n));
  const auto n_val = std::min(seeds.size() - n_train, static_cast<std::size_t>(std::llround(config.val_fraction * n)));

  DatasetSplits out;
  out.train_scenes.assign(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val_scenes.assign(
    seeds.begin() + static_cast<std::ptrdiff_t>(n_train),
    seeds.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test_scenes.assign(seeds.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), seeds.end());

  auto build = [&](std::vector<std::uint64_t> & scene_list, Dataset & ds) {
    std::sort(scene_list.begin(), scene_list.end());
    ds.scene_config = config.scene;
    std::vector<std::vector<Sample>> per_scene(scene_list.size());
    std::vector<std::exception_ptr> errors(scene_list.size());
    const auto count = static_cast<std::int64_t>(scene_list.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        per_scene[k] = scene_samples(scene_list[k], config);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (const auto & e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    for (auto & samples : per_scene) {
      for (auto & s : samples) {
        ds.samples.push_back(std::move(s));
      }
    }
  };
  build(out.train_scenes, out.train);
  build(out.val_scenes, out.val);
  build(out.test_scenes, out.test);
  return out;
}

}  // namespace mapstp::scenegen
