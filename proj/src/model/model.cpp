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

#include "mapstp/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>

#include "mapstp/errors.hpp"
#include "mapstp/metrics.hpp"
#include "mapstp/nn/optim.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::model
{

namespace
{

constexpr std::size_t kKernel = 3;
constexpr std::size_t kStride = 2;
constexpr std::size_t kPadding = 1;
constexpr std::uint64_t kShuffleSalt = 0x53485546464C45ULL;

void rethrow_first(const std::vector<std::exception_ptr> & errors)
{
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace

void ModelConfig::validate() const
{
  if (num_modes == 0) {
    throw ConfigError("model config: K must be at least 1");
  }
  if (horizon == 0) {
    throw ConfigError("model config: T_f must be at least 1");
  }
  if (backbone_channels.empty()) {
    throw ConfigError("model config: backbone channels must be nonempty");
  }
  for (const auto c : backbone_channels) {
    if (c == 0) {
      throw ConfigError("model config: channel counts must be positive");
    }
  }
  if (head_hidden == 0) {
    throw ConfigError("model config: head_hidden must be positive");
  }
  if (!(loss_alpha >= 0.0) || !std::isfinite(loss_alpha)) {
    throw ConfigError("model config: loss_alpha must be finite and non-negative");
  }
  if (!(trajectory_scale > 0.0) || !std::isfinite(trajectory_scale)) {
    throw ConfigError("model config: trajectory_scale must be positive");
  }
  raster.validate();
}

Network::Network(const ModelConfig & config, std::uint64_t seed) : config_(config)
{
  config_.validate();
  Rng rng(seed);
  auto add_layer = [&](const std::string & name, nn::Shape weight_shape, std::size_t fan_in) {
    const std::size_t out = weight_shape.front();
    nn::Parameter w(name + ".weight", nn::Tensor(std::move(weight_shape)));
    nn::kaiming_uniform(w.value, fan_in, rng);
    nn::Parameter b(name + ".bias", nn::Tensor({out}));
    nn::fan_in_uniform(b.value, fan_in, rng);
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  };
  std::size_t in = raster::kChannelCount;
  for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) {
    const std::size_t out = config_.backbone_channels[i];
    add_layer("conv" + std::to_string(i), {out, in, kKernel, kKernel}, in * kKernel * kKernel);
    in = out;
  }
  add_layer("fc1", {config_.head_hidden, config_.feature_size()}, config_.feature_size());
  add_layer("fc2", {config_.regression_size() + config_.num_modes, config_.head_hidden}, config_.head_hidden);
}

nn::Parameter & Network::parameter(const std::string & name)
{
  for (auto & p : params_) {
    if (p.name == name) {
      return p;
    }
  }
  throw ConfigError("no parameter named '" + name + "'");
}

ForwardVars Network::forward_with(
  nn::Graph & g, std::span<const nn::Var> params, nn::Var raster, nn::Var state) const
{
  if (params.size() != params_.size()) {
    throw ShapeError(
      "forward: expected " + std::to_string(params_.size()) + " parameter vars, got " +
      std::to_string(params.size()));
  }
  const nn::Shape want_raster{raster::kChannelCount, config_.raster.height, config_.raster.width};
  nn::require_same_shape(g.value(raster).shape(), want_raster, "forward raster");
  nn::require_same_shape(g.value(state).shape(), nn::Shape{statefeat::kStateDims}, "forward state");

  nn::Var x = raster;
  std::size_t p = 0;
  for (std::size_t i = 0; i < config_.backbone_channels.size(); ++i) {
    g.set_label("conv" + std::to_string(i));
    x = nn::relu(nn::conv2d(x, params[p], params[p + 1], kStride, kPadding));
    p += 2;
  }
  g.set_label("pool");
  ForwardVars out;
  out.features = nn::concat(nn::global_avg_pool(x), state);
  g.set_label("fc1");
  nn::Var h = nn::relu(nn::linear(out.features, params[p], params[p + 1]));
  g.set_label("fc2");
  nn::Var o = nn::linear(h, params[p + 2], params[p + 3]);
  g.set_label("head");
  const std::size_t r = config_.regression_size();
  out.modes = nn::scale(nn::slice(o, 0, r), config_.trajectory_scale);
  out.logits = nn::slice(o, r, config_.num_modes);
  g.set_label("");
  return out;
}

ForwardVars Network::forward(nn::Graph & g, nn::Var raster, nn::Var state) const
{
  std::vector<nn::Var> vars;
  vars.reserve(params_.size());
  for (const auto & prm : params_) {
    vars.push_back(g.param(prm));
  }
  return forward_with(g, vars, raster, state);
}

TrajectoryPrediction Network::predict(const nn::Tensor & raster, const nn::Tensor & state) const
{
  nn::Graph g;
  const ForwardVars out = forward(g, g.constant(raster), g.constant(state));
  TrajectoryPrediction pred;
  pred.modes = g.value(out.modes).reshaped({config_.num_modes, config_.horizon, 2});
  pred.logits = g.value(out.logits);
  pred.probabilities = softmax_probabilities(pred.logits);
  return pred;
}

nn::Tensor softmax_probabilities(const nn::Tensor & logits)
{
  nn::Graph g;
  return g.value(nn::softmax(g.constant(logits)));
}

std::size_t best_mode_by_ade(const nn::Tensor & modes, const nn::Tensor & gt)
{
  if (modes.rank() != 3 || gt.rank() != 2 || modes.dim(1) != gt.dim(0) || modes.dim(2) != 2 || gt.dim(1) != 2) {
    throw ShapeError("best_mode_by_ade: modes " + nn::to_string(modes.shape()) + " vs gt " + nn::to_string(gt.shape()));
  }
  const std::size_t k = modes.dim(0);
  const std::size_t t = gt.dim(0);
  std::size_t best = 0;
  double best_ade = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      s += std::hypot(modes[(i * t + j) * 2] - gt[j * 2], modes[(i * t + j) * 2 + 1] - gt[j * 2 + 1]);
    }
    const double ade = s / static_cast<double>(t);
    if (ade < best_ade) {
      best_ade = ade;
      best = i;
    }
  }
  return best;
}

WtaLoss wta_loss(const TrajectoryPrediction & pred, const nn::Tensor & gt, double alpha)
{
  WtaLoss loss;
  loss.best_mode = best_mode_by_ade(pred.modes, gt);
  const std::size_t n = gt.size();
  double sq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = pred.modes[loss.best_mode * n + j] - gt[j];
    sq += e * e;
  }
  loss.regression = sq / static_cast<double>(n / 2);
  loss.classification = -std::log(pred.probabilities[loss.best_mode]);
  loss.total = loss.regression + alpha * loss.classification;
  return loss;
}

nn::Var wta_loss(const ForwardVars & out, const nn::Tensor & gt, const ModelConfig & config, std::size_t * best)
{
  nn::Graph & g = *out.modes.graph;
  const nn::Tensor modes = g.value(out.modes).reshaped({config.num_modes, config.horizon, 2});
  const std::size_t i = best_mode_by_ade(modes, gt);
  if (best != nullptr) {
    *best = i;
  }
  const std::size_t n = config.horizon * 2;
  g.set_label("wta_loss");
  // Per-waypoint squared displacement averaged over time: twice the per-coordinate MSE.
  nn::Var reg = nn::scale(nn::mse(nn::slice(out.modes, i * n, n), gt.reshaped({n})), 2.0);
  nn::Var ce = nn::scale(nn::pick(nn::log_softmax(out.logits), i), -config.loss_alpha);
  nn::Var total = nn::add(reg, ce);
  g.set_label("");
  return total;
}

Selection select_trajectory(const TrajectoryPrediction & pred)
{
  const auto p = pred.probabilities.data();
  if (p.empty()) {
    throw ShapeError("select_trajectory: empty prediction");
  }
  Selection s;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[s.index]) {
      s.index = i;
    }
  }
  s.probability = p[s.index];
  const std::size_t t = pred.modes.dim(1);
  std::vector<double> traj(pred.modes.values().begin() + static_cast<std::ptrdiff_t>(s.index * t * 2),
                           pred.modes.values().begin() + static_cast<std::ptrdiff_t>((s.index + 1) * t * 2));
  s.trajectory = nn::Tensor({t, 2}, std::move(traj));
  return s;
}

std::vector<PreparedSample> prepare_samples(const scenegen::Dataset & dataset, const raster::RasterConfig & config)
{
  config.validate();
  std::map<std::uint64_t, std::size_t> scene_index;
  std::vector<std::uint64_t> seeds;
  for (const auto & s : dataset.samples) {
    if (scene_index.emplace(s.scene_seed, seeds.size()).second) {
      seeds.push_back(s.scene_seed);
    }
  }
  std::vector<scenegen::MapScene> scenes(seeds.size());
  std::vector<std::exception_ptr> errors(std::max<std::size_t>(seeds.size(), dataset.samples.size()));
  const auto n_scenes = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n_scenes; ++i) {
    try {
      scenes[static_cast<std::size_t>(i)] = scenegen::generate_scene(seeds[static_cast<std::size_t>(i)], dataset.scene_config);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  rethrow_first(errors);

  std::vector<PreparedSample> out(dataset.samples.size());
  const auto n = static_cast<std::ptrdiff_t>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto & s = dataset.samples[idx];
      auto & p = out[idx];
      p.raster = raster::raster_to_tensor(raster::rasterize(scenes[scene_index.at(s.scene_seed)], s, config));
      p.state = statefeat::compute_state(s.history);
      std::vector<double> fut;
      fut.reserve(s.future.size() * 2);
      for (const Vec2 w : s.future) {
        fut.push_back(w.x);
        fut.push_back(w.y);
      }
      if (fut.empty()) {
        throw DataError("sample " + std::to_string(idx) + " has no future waypoints");
      }
      p.future = nn::Tensor({s.future.size(), 2}, std::move(fut));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

Network Checkpoint::network() const
{
  Network net(config, seed);
  auto & dst = net.parameters();
  if (dst.size() != parameters.size()) {
    throw ParseError(
      "checkpoint holds " + std::to_string(parameters.size()) + " tensors, model expects " +
      std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].name != parameters[i].name) {
      throw ParseError("checkpoint tensor " + std::to_string(i) + " is '" + parameters[i].name + "', expected '" + dst[i].name + "'");
    }
    nn::require_same_shape(parameters[i].value.shape(), dst[i].value.shape(), "checkpoint tensor");
    dst[i].value = parameters[i].value;
  }
  return net;
}

void TrainConfig::validate() const
{
  if (batch_size == 0) {
    throw ConfigError("train config: batch_size must be positive");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train config: learning rate must be finite and non-negative");
  }
}

namespace
{

/// Per-sample losses (and gradients when requested) on independent graphs.
struct BatchResult
{
  std::vector<double> losses;
  std::vector<std::vector<nn::Tensor>> grads;
};

BatchResult run_batch(
  const Network & net, const statefeat::NormStats & norm, std::span<const PreparedSample> samples,
  std::span<const std::size_t> indices, bool with_grad)
{
  const std::size_t b = indices.size();
  BatchResult r;
  r.losses.assign(b, 0.0);
  if (with_grad) {
    r.grads.resize(b);
  }
  std::vector<std::exception_ptr> errors(b);
  const auto nb = static_cast<std::ptrdiff_t>(b);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < nb; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    try {
      const PreparedSample & s = samples[indices[j]];
      nn::Graph g;
      std::vector<nn::Var> vars;
      for (const auto & p : net.parameters()) {
        vars.push_back(g.param(p));
      }
      const nn::Var raster = g.constant(s.raster);
      const nn::Var state = g.constant(statefeat::normalize_state(s.state, norm));
      const ForwardVars out = net.forward_with(g, vars, raster, state);
      const nn::Var loss = wta_loss(out, s.future, net.config());
      r.losses[j] = g.value(loss)[0];
      if (with_grad) {
        g.backward(loss);
        r.grads[j].reserve(vars.size());
        for (const auto v : vars) {
          r.grads[j].push_back(g.grad(v));
        }
      }
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return r;
}

std::vector<std::size_t> iota_indices(std::size_t n)
{
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

double mean_loss(const Network & net, const statefeat::NormStats & norm, std::span<const PreparedSample> samples)
{
  if (samples.empty()) {
    throw DataError("mean_loss: no samples");
  }
  const auto idx = iota_indices(samples.size());
  const BatchResult r = run_batch(net, norm, samples, idx, false);
  double s = 0.0;
  for (const double l : r.losses) {
    s += l;
  }
  return s / static_cast<double>(samples.size());
}

double mean_min_ade(
  const Network & net, const statefeat::NormStats & norm, std::span<const PreparedSample> samples, std::size_t k)
{
  if (samples.empty()) {
    throw DataError("mean_min_ade: no samples");
  }
  std::vector<double> ade(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const TrajectoryPrediction pred =
        net.predict(samples[i].raster, statefeat::normalize_state(samples[i].state, norm));
      const auto top = metrics::top_k(pred.probabilities, k);
      ade[i] = metrics::min_ade(samples[i].future, metrics::gather_modes(pred.modes, top));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  double s = 0.0;
  for (const double a : ade) {
    s += a;
  }
  return s / static_cast<double>(samples.size());
}

TrainResult train(
  std::span<const PreparedSample> train_set, std::span<const PreparedSample> val_set,
  const statefeat::NormStats & norm, const ModelConfig & config, const TrainConfig & train_config,
  const EpochCallback & on_epoch)
{
  train_config.validate();
  if (train_set.empty()) {
    throw DataError("train: empty training set");
  }
  Network net(config, train_config.seed);
  auto & params = net.parameters();
  nn::AdamState adam(params);
  Rng shuffle_rng(hash64(train_config.seed ^ kShuffleSalt));
  std::vector<std::size_t> order = iota_indices(train_set.size());
  const std::size_t val_k = std::min<std::size_t>(5, config.num_modes);

  TrainResult result;
  auto log_epoch = [&](std::size_t epoch, double train_loss) {
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = train_loss;
    e.val_minade5 = val_set.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : mean_min_ade(net, norm, val_set, val_k);
    result.log.push_back(e);
    if (on_epoch) {
      on_epoch(e);
    }
  };
  log_epoch(0, mean_loss(net, norm, train_set));

  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
      const std::size_t b = std::min(train_config.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, b);
      const BatchResult r = run_batch(net, norm, train_set, batch, train_config.learning_rate > 0.0);
      for (const double l : r.losses) {
        loss_sum += l;
      }
      if (!(train_config.learning_rate > 0.0)) {
        continue;
      }
      const double inv = 1.0 / static_cast<double>(b);
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto dst = params[p].grad.data();
        std::fill(dst.begin(), dst.end(), 0.0);
        for (std::size_t j = 0; j < b; ++j) {
          const auto src = r.grads[j][p].data();
          for (std::size_t e = 0; e < dst.size(); ++e) {
            dst[e] += src[e];
          }
        }
        for (auto & v : dst) {
          v *= inv;
        }
      }
      nn::adam_step(params, adam, train_config.learning_rate);
    }
    log_epoch(epoch, loss_sum / static_cast<double>(train_set.size()));
  }

  result.checkpoint.config = net.config();
  result.checkpoint.parameters = net.parameters();
  result.checkpoint.norm = norm;
  result.checkpoint.seed = train_config.seed;
  return result;
}

}  // namespace mapstp::model
