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

#include "mapstp/cli/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>

#include "mapstp/dataset.hpp"
#include "mapstp/errors.hpp"
#include "mapstp/metrics.hpp"
#include "mapstp/model.hpp"
#include "mapstp/nn/gradcheck.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::cli
{

namespace
{

using nn::Graph;
using nn::Tensor;
using nn::Var;

Tensor random_tensor(nn::Shape shape, Rng & rng, double lo = -1.0, double hi = 1.0)
{
  Tensor t(std::move(shape));
  for (auto & v : t.data()) {
    v = rng.uniform(lo, hi);
  }
  return t;
}

/// Entries in +-[0.1, 1] so that ReLU kinks are far from the probe points.
Tensor away_from_zero(nn::Shape shape, Rng & rng)
{
  Tensor t(std::move(shape));
  for (auto & v : t.data()) {
    v = rng.uniform(0.1, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }
  return t;
}

/// Scalar <w, x> with a fixed random w, so every output coordinate matters.
Var project(Graph & g, Var x, std::uint64_t seed)
{
  const std::size_t n = g.value(x).size();
  Rng rng(seed);
  return nn::linear(nn::reshape(x, {n}), g.constant(random_tensor({1, n}, rng)), g.constant(Tensor({1})));
}

struct OpCase
{
  std::string name;
  nn::Fragment fragment;
  std::vector<Tensor> inputs;
};

std::vector<OpCase> op_cases()
{
  Rng rng(0x5E1FC4EC);
  std::vector<OpCase> cases;
  cases.push_back({"conv2d (stride 1, pad 1)",
                   [](Graph & g, std::span<const Var> in) { return project(g, nn::conv2d(in[0], in[1], in[2], 1, 1), 1); },
                   {random_tensor({2, 5, 5}, rng), random_tensor({3, 2, 3, 3}, rng), random_tensor({3}, rng)}});
  cases.push_back({"conv2d (stride 2, pad 1)",
                   [](Graph & g, std::span<const Var> in) { return project(g, nn::conv2d(in[0], in[1], in[2], 2, 1), 2); },
                   {random_tensor({2, 6, 7}, rng), random_tensor({4, 2, 3, 3}, rng), random_tensor({4}, rng)}});
  cases.push_back({"relu", [](Graph & g, std::span<const Var> in) { return project(g, nn::relu(in[0]), 3); },
                   {away_from_zero({3, 4}, rng)}});
  cases.push_back({"global_avg_pool",
                   [](Graph & g, std::span<const Var> in) { return project(g, nn::global_avg_pool(in[0]), 4); },
                   {random_tensor({3, 4, 5}, rng)}});
  cases.push_back({"linear", [](Graph & g, std::span<const Var> in) { return project(g, nn::linear(in[0], in[1], in[2]), 5); },
                   {random_tensor({6}, rng), random_tensor({4, 6}, rng), random_tensor({4}, rng)}});
  cases.push_back({"concat", [](Graph & g, std::span<const Var> in) { return project(g, nn::concat(in[0], in[1]), 6); },
                   {random_tensor({4}, rng), random_tensor({3}, rng)}});
  cases.push_back({"softmax", [](Graph & g, std::span<const Var> in) { return project(g, nn::softmax(in[0]), 7); },
                   {random_tensor({6}, rng, -3.0, 3.0)}});
  cases.push_back({"log_softmax", [](Graph & g, std::span<const Var> in) { return project(g, nn::log_softmax(in[0]), 8); },
                   {random_tensor({6}, rng, -3.0, 3.0)}});
  cases.push_back({"slice", [](Graph & g, std::span<const Var> in) { return project(g, nn::slice(in[0], 2, 5), 9); },
                   {random_tensor({9}, rng)}});
  cases.push_back({"reshape", [](Graph & g, std::span<const Var> in) { return project(g, nn::reshape(in[0], {3, 4}), 10); },
                   {random_tensor({12}, rng)}});
  cases.push_back({"scale", [](Graph & g, std::span<const Var> in) { return project(g, nn::scale(in[0], -1.7), 11); },
                   {random_tensor({5}, rng)}});
  cases.push_back({"add", [](Graph & g, std::span<const Var> in) { return project(g, nn::add(in[0], in[1]), 12); },
                   {random_tensor({5}, rng), random_tensor({5}, rng)}});
  {
    Tensor target = random_tensor({8}, rng);
    cases.push_back({"mse", [target](Graph &, std::span<const Var> in) { return nn::mse(in[0], target); },
                     {random_tensor({8}, rng)}});
  }
  cases.push_back({"pick", [](Graph &, std::span<const Var> in) { return nn::scale(nn::pick(in[0], 3), 2.5); },
                   {random_tensor({7}, rng)}});
  cases.push_back({"sum", [](Graph &, std::span<const Var> in) { return nn::sum(in[0]); }, {random_tensor({2, 3}, rng)}});
  return cases;
}

model::ModelConfig small_model_config()
{
  model::ModelConfig c;
  c.num_modes = 3;
  c.backbone_channels = {4, 8};
  c.head_hidden = 16;
  c.raster.height = 16;
  c.raster.width = 16;
  c.raster.ego_row = 12;
  c.raster.ego_col = 8;
  c.raster.resolution = 2.0;
  return c;
}

CheckResult check(std::string module, std::string name, double value, double tol, std::string detail = "")
{
  return {std::move(module), std::move(name), value <= tol, value, tol, std::move(detail)};
}

// Written without the library's metric code: full displacement matrix, then reductions.
struct BruteForce
{
  double ade;
  double fde;
  int miss;
};

BruteForce brute_force(const Tensor & gt, const Tensor & modes, double d)
{
  const std::size_t k = modes.dim(0);
  const std::size_t t = modes.dim(1);
  std::vector<std::vector<double>> dist(k, std::vector<double>(t));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      const double dx = modes.at({i, j, 0}) - gt.at({j, 0});
      const double dy = modes.at({i, j, 1}) - gt.at({j, 1});
      dist[i][j] = std::sqrt(dx * dx + dy * dy);
    }
  }
  BruteForce r{1e300, 1e300, 1};
  for (std::size_t i = 0; i < k; ++i) {
    double total = 0.0;
    for (const double v : dist[i]) {
      total += v;
    }
    r.ade = std::min(r.ade, total / static_cast<double>(t));
    r.fde = std::min(r.fde, dist[i][t - 1]);
    if (*std::max_element(dist[i].begin(), dist[i].end()) < d) {
      r.miss = 0;
    }
  }
  return r;
}

nn::BackwardFn g_original_conv_backward = nullptr;

void doubled_conv_backward(Graph & g, const nn::Node & n)
{
  g_original_conv_backward(g, n);
  g_original_conv_backward(g, n);
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions & options)
{
  std::unique_ptr<nn::ScopedBackwardOverride> fault;
  if (options.inject_conv_fault) {
    g_original_conv_backward = nn::find_op("conv2d")->backward;
    fault = std::make_unique<nn::ScopedBackwardOverride>("conv2d", &doubled_conv_backward);
  }
  std::vector<CheckResult> results;

  for (auto & c : op_cases()) {
    const auto r = nn::grad_check(c.fragment, c.inputs);
    results.push_back(check("tensornet", "grad_check " + c.name, r.max_relative_error, 1e-6));
  }

  {
    const model::ModelConfig cfg = small_model_config();
    const model::Network net(cfg, 7);
    Rng rng(11);
    const Tensor raster = random_tensor({3, cfg.raster.height, cfg.raster.width}, rng, 0.0, 1.0);
    const Tensor gt = random_tensor({cfg.horizon, 2}, rng, -20.0, 20.0);
    std::vector<Tensor> inputs;
    for (const auto & p : net.parameters()) {
      inputs.push_back(p.value);
    }
    inputs.push_back(random_tensor({3}, rng));
    const nn::Fragment f = [&](Graph & g, std::span<const Var> in) {
      const auto out = net.forward_with(g, in.first(in.size() - 1), g.constant(raster), in.back());
      return model::wta_loss(out, gt, cfg);
    };
    const auto r = nn::grad_check(f, inputs, {1e-6, 0, 0});
    results.push_back(check("model", "grad_check forward + wta_loss", r.max_relative_error, 1e-5));
  }

  {
    Rng rng(2024);
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
      const std::size_t k = 1 + rng.uniform_int(10);
      const Tensor gt = random_tensor({12, 2}, rng, -30.0, 30.0);
      Tensor modes = random_tensor({k, 12, 2}, rng, -30.0, 30.0);
      const double d = rng.uniform(0.5, 40.0);
      const BruteForce b = brute_force(gt, modes, d);
      worst = std::max(worst, std::abs(metrics::min_ade(gt, modes) - b.ade));
      worst = std::max(worst, std::abs(metrics::min_fde(gt, modes) - b.fde));
      worst = std::max(worst, std::abs(static_cast<double>(metrics::miss_indicator(gt, modes, d) - b.miss)));
    }
    results.push_back(check("metrics", "brute-force oracle, 100 cases", worst, 1e-9));
  }

  {
    Rng rng(99);
    double worst_sum = 0.0;
    double shift_mismatch = 0.0;
    double non_positive = 0.0;
    for (int c = 0; c < 1000; ++c) {
      const std::size_t k = 1 + rng.uniform_int(10);
      const Tensor logits = random_tensor({k}, rng, -30.0, 30.0);
      model::TrajectoryPrediction pred;
      pred.modes = Tensor({k, 12, 2});
      pred.logits = logits;
      pred.probabilities = model::softmax_probabilities(logits);
      double s = 0.0;
      for (const double p : pred.probabilities.data()) {
        s += p;
        non_positive += p > 0.0 ? 0.0 : 1.0;
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      Tensor shifted = logits;
      const double shift = rng.uniform(-100.0, 100.0);
      for (auto & v : shifted.data()) {
        v += shift;
      }
      model::TrajectoryPrediction moved = pred;
      moved.probabilities = model::softmax_probabilities(shifted);
      if (model::select_trajectory(moved).index != model::select_trajectory(pred).index) {
        shift_mismatch += 1.0;
      }
    }
    results.push_back(check("model", "softmax sums to 1, 1000 inputs", worst_sum, 1e-9));
    results.push_back(check("model", "softmax strictly positive", non_positive, 0.0));
    results.push_back(check("model", "selection invariant to logit shift", shift_mismatch, 0.0));
  }

  {
    scenegen::DatasetGenConfig gc;
    gc.num_scenes = 4;
    const auto a = scenegen::generate_splits(5, gc);
    const auto b = scenegen::generate_splits(5, gc);
    const auto bytes = [](const scenegen::Dataset & d) { return scenegen::serialize_dataset(d); };
    const bool same_data = bytes(a.train) == bytes(b.train) && bytes(a.test) == bytes(b.test);
    results.push_back(check("scenegen", "dataset generation deterministic", same_data ? 0.0 : 1.0, 0.0));

    model::ModelConfig cfg = small_model_config();
    auto prep = model::prepare_samples(a.train, cfg.raster);
    prep.resize(std::min<std::size_t>(prep.size(), 6));
    const auto norm = statefeat::compute_norm_stats(std::span(a.train.samples).first(prep.size()));
    model::TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    tc.learning_rate = 1e-3;
    tc.seed = 3;
    const auto r1 = model::train(prep, {}, norm, cfg, tc);
    const auto r2 = model::train(prep, {}, norm, cfg, tc);
    const bool same_ckpt = model::serialize_checkpoint(r1.checkpoint) == model::serialize_checkpoint(r2.checkpoint);
    results.push_back(check("model", "training deterministic", same_ckpt ? 0.0 : 1.0, 0.0));

    const auto net = r1.checkpoint.network();
    const auto state = statefeat::normalize_state(prep[0].state, norm);
    const auto p1 = net.predict(prep[0].raster, state);
    const auto p2 = net.predict(prep[0].raster, state);
    const bool same_pred = nn::bit_equal(p1.modes, p2.modes) && nn::bit_equal(p1.probabilities, p2.probabilities);
    results.push_back(check("model", "forward deterministic", same_pred ? 0.0 : 1.0, 0.0));
  }
  return results;
}

std::string format_check(const CheckResult & r)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "value=%.3e tol=%.1e", r.value, r.tolerance);
  std::string s = std::string(r.pass ? "PASS" : "FAIL") + "  [" + r.module + "] " + r.name + "  " + buf;
  if (!r.detail.empty()) {
    s += "  (" + r.detail + ")";
  }
  return s;
}

}  // namespace mapstp::cli
