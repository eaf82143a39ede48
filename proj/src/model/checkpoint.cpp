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

#include <cstring>
#include <string>

#include "binary_io.hpp"
#include "mapstp/errors.hpp"
#include "mapstp/model.hpp"

namespace mapstp::model
{

namespace
{

constexpr char kMagic[7] = {'M', 'A', 'P', 'S', 'T', 'P', '\0'};

std::uint32_t checked_u32(std::size_t v, const char * what)
{
  if (v > 0xFFFFFFFFULL) {
    throw ConfigError(std::string("checkpoint: ") + what + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint & ckpt)
{
  ckpt.config.validate();
  detail::ByteWriter w;
  w.raw(std::string_view(kMagic, sizeof(kMagic)));
  w.u32(kCheckpointFormatVersion);
  w.u64(ckpt.seed);
  const auto & c = ckpt.config;
  w.u32(checked_u32(c.num_modes, "K"));
  w.u32(checked_u32(c.horizon, "T_f"));
  w.u32(checked_u32(c.backbone_channels.size(), "channel count"));
  for (const auto ch : c.backbone_channels) {
    w.u32(checked_u32(ch, "channels"));
  }
  w.u32(checked_u32(c.head_hidden, "head_hidden"));
  w.f64(c.loss_alpha);
  w.f64(c.trajectory_scale);
  w.u32(checked_u32(c.raster.height, "raster height"));
  w.u32(checked_u32(c.raster.width, "raster width"));
  w.f64(c.raster.resolution);
  w.u32(checked_u32(c.raster.ego_row, "ego_row"));
  w.u32(checked_u32(c.raster.ego_col, "ego_col"));
  for (const double m : ckpt.norm.mean) {
    w.f64(m);
  }
  for (const double s : ckpt.norm.stddev) {
    w.f64(s);
  }
  w.u32(checked_u32(ckpt.parameters.size(), "tensor count"));
  for (const auto & p : ckpt.parameters) {
    w.str(p.name);
    w.u32(checked_u32(p.value.rank(), "rank"));
    for (const auto e : p.value.shape()) {
      w.u32(checked_u32(e, "extent"));
    }
    for (const double v : p.value.data()) {
      w.f64(v);
    }
  }
  return w.bytes();
}

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path)
{
  detail::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes, const std::string & context)
{
  detail::ByteReader r(bytes.data(), bytes.size(), context);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    r.fail("not a checkpoint (bad magic bytes)");
  }
  r.raw(sizeof(kMagic));
  const std::uint32_t version = r.u32();
  if (version != kCheckpointFormatVersion) {
    r.fail(
      "unsupported checkpoint version " + std::to_string(version) + " (expected " +
      std::to_string(kCheckpointFormatVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.seed = r.u64();
  auto & c = ckpt.config;
  r.set_context(context + ": config");
  c.num_modes = r.u32();
  c.horizon = r.u32();
  const std::uint32_t n_channels = r.u32();
  if (n_channels > r.remaining() / 4) {
    r.fail("channel count " + std::to_string(n_channels) + " exceeds file size");
  }
  c.backbone_channels.assign(n_channels, 0);
  for (auto & ch : c.backbone_channels) {
    ch = r.u32();
  }
  c.head_hidden = r.u32();
  c.loss_alpha = r.f64();
  c.trajectory_scale = r.f64();
  c.raster.height = r.u32();
  c.raster.width = r.u32();
  c.raster.resolution = r.f64();
  c.raster.ego_row = r.u32();
  c.raster.ego_col = r.u32();
  try {
    c.validate();
  } catch (const ConfigError & e) {
    r.fail(e.what());
  }
  r.set_context(context + ": normalization stats");
  for (auto & m : ckpt.norm.mean) {
    m = r.f64();
  }
  for (auto & s : ckpt.norm.stddev) {
    s = r.f64();
  }
  r.set_context(context + ": tensor table");
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    r.set_context(context + ": tensor " + std::to_string(i));
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) {
      r.fail("invalid rank " + std::to_string(rank));
    }
    nn::Shape shape(rank);
    std::size_t count = 1;
    for (auto & e : shape) {
      e = r.u32();
      if (e == 0) {
        r.fail("zero extent");
      }
      count *= e;
      if (count > r.remaining() / 8) {
        r.fail("tensor '" + name + "' larger than the remaining file");
      }
    }
    std::vector<double> data(count);
    for (auto & v : data) {
      v = r.f64();
    }
    nn::Parameter p;
    p.name = std::move(name);
    p.value = nn::Tensor(shape, std::move(data));
    p.grad = nn::Tensor(shape);
    ckpt.parameters.push_back(std::move(p));
  }
  if (!r.done()) {
    r.fail(std::to_string(r.remaining()) + " trailing bytes");
  }
  // Confirms the tensor table matches the architecture.
  try {
    (void)ckpt.network();
  } catch (const ShapeError & e) {
    throw ParseError(context + ": " + e.what());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  const auto bytes = detail::read_file(path);
  return parse_checkpoint(bytes, path.string());
}

}  // namespace mapstp::model
