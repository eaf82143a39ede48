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

#ifndef MAPSTP__MODEL_HPP_
#define MAPSTP__MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mapstp/dataset.hpp"
#include "mapstp/nn/graph.hpp"
#include "mapstp/nn/tensor.hpp"
#include "mapstp/raster.hpp"
#include "mapstp/statefeat.hpp"

namespace mapstp::model
{

struct ModelConfig
{
  std::size_t num_modes = 10;  // K
  std::size_t horizon = scenegen::kFutureSteps;  // T_f
  std::vector<std::size_t> backbone_channels{16, 32, 64, 128};
  std::size_t head_hidden = 256;
  double loss_alpha = 1.0;
  /// Raw regression outputs are multiplied by this many meters.
  double trajectory_scale = 10.0;
  raster::RasterConfig raster;

  void validate() const;
  std::size_t feature_size() const { return backbone_channels.back() + statefeat::kStateDims; }
  std::size_t regression_size() const { return num_modes * horizon * 2; }
};

struct TrajectoryPrediction
{
  nn::Tensor modes;          // (K, T_f, 2), ego-frame meters
  nn::Tensor logits;         // (K,)
  nn::Tensor probabilities;  // (K,), softmax of logits
};

/// Graph handles of one forward pass.
struct ForwardVars
{
  nn::Var features;  // (C + 3,)
  nn::Var modes;     // (K * T_f * 2,)
  nn::Var logits;    // (K,)
};

/**
 * Backbone of stride-2 3x3 conv + ReLU blocks, global average pool,
 * concatenation with the normalized state, then a two-layer MLP whose output
 * holds K * T_f * 2 regression values (mode-major, then time, then x/y)
 * followed by K logits.
 */
class Network
{
public:
  Network() = default;
  /// Kaiming-uniform weights and U(+-1/sqrt(fan_in)) biases drawn from `seed`.
  Network(const ModelConfig & config, std::uint64_t seed);

  const ModelConfig & config() const noexcept { return config_; }
  std::vector<nn::Parameter> & parameters() noexcept { return params_; }
  const std::vector<nn::Parameter> & parameters() const noexcept { return params_; }
  nn::Parameter & parameter(const std::string & name);

  /// Builds the forward pass on `g` with externally supplied parameter vars (same order as parameters()).
  ForwardVars forward_with(nn::Graph & g, std::span<const nn::Var> params, nn::Var raster, nn::Var state) const;
  ForwardVars forward(nn::Graph & g, nn::Var raster, nn::Var state) const;

  /// Shapes: raster (3, H, W), state (3,). Throws ShapeError on mismatch.
  TrajectoryPrediction predict(const nn::Tensor & raster, const nn::Tensor & state) const;

private:
  ModelConfig config_;
  std::vector<nn::Parameter> params_;
};

/// Softmax probabilities from logits with max subtraction.
nn::Tensor softmax_probabilities(const nn::Tensor & logits);

struct WtaLoss
{
  std::size_t best_mode = 0;
  double regression = 0.0;      // mean over t of |best mode_t - gt_t|^2
  double classification = 0.0;  // -log p(best mode)
  double total = 0.0;           // regression + alpha * classification
};

/// Index of the mode with the smallest average displacement from gt; ties go to the lowest index.
std::size_t best_mode_by_ade(const nn::Tensor & modes, const nn::Tensor & gt);

/// Value-level winner-takes-all loss. modes (K, T_f, 2), gt (T_f, 2).
WtaLoss wta_loss(const TrajectoryPrediction & pred, const nn::Tensor & gt, double alpha);

/// Differentiable WTA loss on graph handles; best mode chosen from the current values.
nn::Var wta_loss(const ForwardVars & out, const nn::Tensor & gt, const ModelConfig & config, std::size_t * best = nullptr);

struct Selection
{
  std::size_t index = 0;
  nn::Tensor trajectory;  // (T_f, 2)
  double probability = 0.0;
};

/// Mode with maximal probability; ties go to the lowest index.
Selection select_trajectory(const TrajectoryPrediction & pred);

/// Network inputs of one sample.
struct PreparedSample
{
  nn::Tensor raster;  // (3, H, W)
  statefeat::StateVector state;
  nn::Tensor future;  // (T_f, 2)
};

/// Regenerates each sample's scene from the dataset's scene config and rasterizes it.
std::vector<PreparedSample> prepare_samples(const scenegen::Dataset & dataset, const raster::RasterConfig & config);

struct Checkpoint
{
  ModelConfig config;
  std::vector<nn::Parameter> parameters;
  statefeat::NormStats norm;
  std::uint64_t seed = 0;

  Network network() const;
};

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

/**
 * Binary layout (little-endian):
 *   "MAPSTP\0" (7 bytes), u32 version, u64 seed,
 *   u32 K, u32 T_f, u32 n_channels, n x u32 channels, u32 head_hidden,
 *   f64 loss_alpha, f64 trajectory_scale,
 *   u32 height, u32 width, f64 resolution, u32 ego_row, u32 ego_col,
 *   3 x f64 mean, 3 x f64 std,
 *   u32 n_tensors, then per tensor: u32 name length, name bytes,
 *     u32 rank, rank x u32 extents, prod(extents) x f64.
 */
void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path);
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint & ckpt);
/// Throws ParseError for a bad magic, a version mismatch, or a malformed body.
Checkpoint load_checkpoint(const std::filesystem::path & path);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes, const std::string & context);

struct TrainConfig
{
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochLog
{
  std::size_t epoch = 0;      // 0 is the state before any update
  double train_loss = 0.0;    // epoch 0: loss of the initial weights; otherwise mean over the epoch's batches
  double val_minade5 = 0.0;   // NaN without a validation set
};

struct TrainResult
{
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog &)>;

/// Mean WTA loss of the network over the given samples.
double mean_loss(const Network & net, const statefeat::NormStats & norm, std::span<const PreparedSample> samples);

/// Mean MinADE over the top-k modes.
double mean_min_ade(
  const Network & net, const statefeat::NormStats & norm, std::span<const PreparedSample> samples, std::size_t k);

/**
 * Mini-batch Adam with a fixed learning rate. The seed determines the
 * initialization and the per-epoch Fisher-Yates shuffle. Samples of a batch run
 * on separate graphs in parallel; their gradients are summed in batch order.
 * A learning rate of 0 leaves the initialization untouched.
 * Throws DataError for an empty training set.
 */
TrainResult train(
  std::span<const PreparedSample> train_set, std::span<const PreparedSample> val_set,
  const statefeat::NormStats & norm, const ModelConfig & config, const TrainConfig & train_config,
  const EpochCallback & on_epoch = {});

}  // namespace mapstp::model

#endif  // MAPSTP__MODEL_HPP_
