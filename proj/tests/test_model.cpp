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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include "mapstp/errors.hpp"
#include "mapstp/model.hpp"
#include "mapstp/nn/gradcheck.hpp"
#include "mapstp/rng.hpp"

using namespace mapstp;
using namespace mapstp::model;
using nn::Tensor;

namespace
{

ModelConfig small_config(std::size_t k = 3)
{
  ModelConfig c;
  c.num_modes = k;
  c.backbone_channels = {4, 8};
  c.head_hidden = 16;
  c.raster.height = 16;
  c.raster.width = 16;
  c.raster.ego_row = 12;
  c.raster.ego_col = 8;
  return c;
}

Tensor random_tensor(nn::Shape s, Rng & rng, double lo, double hi)
{
  Tensor t(std::move(s));
  for (auto & v : t.data()) {
    v = rng.uniform(lo, hi);
  }
  return t;
}

std::vector<PreparedSample> synthetic_samples(const ModelConfig & c, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<PreparedSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    PreparedSample s;
    s.raster = random_tensor({3, c.raster.height, c.raster.width}, rng, 0.0, 1.0);
    s.state = {rng.uniform(0.0, 15.0), rng.uniform(-2.0, 2.0), rng.uniform(-0.3, 0.3)};
    s.future = Tensor({c.horizon, 2});
    const double speed = rng.uniform(2.0, 12.0);
    const double curve = rng.uniform(-0.05, 0.05);
    for (std::size_t t = 0; t < c.horizon; ++t) {
      const double d = speed * 0.5 * static_cast<double>(t + 1);
      s.future.at({t, 0}) = curve * d * d;
      s.future.at({t, 1}) = d;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Tensor straight_line(std::size_t t_f)
{
  Tensor gt({t_f, 2});
  for (std::size_t t = 0; t < t_f; ++t) {
    gt.at({t, 1}) = static_cast<double>(t + 1);
  }
  return gt;
}

bool same_parameters(const std::vector<nn::Parameter> & a, const std::vector<nn::Parameter> & b)
{
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !nn::bit_equal(a[i].value, b[i].value)) {
      return false;
    }
  }
  return true;
}

std::filesystem::path temp_path(const std::string & name)
{
  return std::filesystem::temp_directory_path() / ("mapstp_test_model_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("default network output shapes and probability normalization")
{
  const Network net(ModelConfig{}, 42);
  Rng rng(1);
  const Tensor raster = random_tensor({3, 128, 128}, rng, 0.0, 1.0);
  const Tensor state = random_tensor({3}, rng, -1.0, 1.0);
  const auto pred = net.predict(raster, state);
  CHECK(pred.modes.shape() == nn::Shape{10, 12, 2});
  CHECK(pred.logits.shape() == nn::Shape{10});
  CHECK(pred.probabilities.shape() == nn::Shape{10});
  double s = 0.0;
  for (const double p : pred.probabilities.data()) {
    CHECK(p > 0.0);
    s += p;
  }
  CHECK(std::abs(s - 1.0) <= 1e-9);
  const auto again = net.predict(raster, state);
  CHECK(nn::bit_equal(pred.modes, again.modes));
  CHECK(nn::bit_equal(pred.logits, again.logits));
  CHECK_THROWS_AS(net.predict(Tensor({3, 64, 64}), state), ShapeError);
  CHECK_THROWS_AS(net.predict(raster, Tensor({4})), ShapeError);
}

TEST_CASE("parameter naming and initialization")
{
  const Network a(small_config(), 7);
  const Network b(small_config(), 7);
  const Network c(small_config(), 8);
  CHECK(same_parameters(a.parameters(), b.parameters()));
  CHECK_FALSE(same_parameters(a.parameters(), c.parameters()));
  const std::vector<std::string> names{"conv0.weight", "conv0.bias", "conv1.weight", "conv1.bias",
                                       "fc1.weight",   "fc1.bias",   "fc2.weight",   "fc2.bias"};
  REQUIRE(a.parameters().size() == names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(a.parameters()[i].name == names[i]);
  }
  Network m(small_config(), 7);
  CHECK(m.parameter("fc1.weight").value.shape() == nn::Shape{16, 11});
  CHECK(m.parameter("fc2.weight").value.shape() == nn::Shape{3 * 12 * 2 + 3, 16});
  CHECK_THROWS_AS(m.parameter("nope"), ConfigError);
}

TEST_CASE("model config validation")
{
  ModelConfig c = small_config();
  c.num_modes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.backbone_channels.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.loss_alpha = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.trajectory_scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  TrainConfig t;
  t.batch_size = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.learning_rate = -1e-3;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("wta loss: two offset modes")
{
  const std::size_t t_f = 12;
  const Tensor gt = straight_line(t_f);
  TrajectoryPrediction pred;
  pred.modes = Tensor({2, t_f, 2});
  for (std::size_t t = 0; t < t_f; ++t) {
    pred.modes.at({0, t, 0}) = 1.0;
    pred.modes.at({0, t, 1}) = gt.at({t, 1});
    pred.modes.at({1, t, 0}) = 2.0;
    pred.modes.at({1, t, 1}) = gt.at({t, 1});
  }
  pred.logits = Tensor({2}, {0.3, -0.4});
  pred.probabilities = softmax_probabilities(pred.logits);
  const WtaLoss l = wta_loss(pred, gt, 1.0);
  CHECK(l.best_mode == 0);
  CHECK(l.regression == doctest::Approx(1.0).epsilon(1e-14));
  const double ce = -std::log(pred.probabilities[0]);
  CHECK(l.classification == doctest::Approx(ce).epsilon(1e-12));
  CHECK(l.total == doctest::Approx(l.regression + ce).epsilon(1e-12));
  CHECK(l.total >= 0.0);
}

TEST_CASE("wta loss: exact mode with a dominant logit")
{
  const std::size_t t_f = 12;
  const Tensor gt = straight_line(t_f);
  TrajectoryPrediction pred;
  pred.modes = Tensor({3, t_f, 2}, 5.0);
  for (std::size_t t = 0; t < t_f; ++t) {
    pred.modes.at({1, t, 0}) = gt.at({t, 0});
    pred.modes.at({1, t, 1}) = gt.at({t, 1});
  }
  pred.logits = Tensor({3}, {0.0, 25.0, 0.0});
  pred.probabilities = softmax_probabilities(pred.logits);
  const WtaLoss l = wta_loss(pred, gt, 1.0);
  CHECK(l.best_mode == 1);
  CHECK(l.regression == 0.0);
  CHECK(l.classification < 1e-6);
  CHECK(l.total < 1e-6);
}

TEST_CASE("best mode ties go to the lowest index")
{
  Tensor modes({3, 2, 2});
  for (std::size_t k = 0; k < 3; ++k) {
    modes.at({k, 0, 0}) = k == 0 ? 1.0 : -1.0;
    modes.at({k, 1, 0}) = k == 0 ? 1.0 : -1.0;
  }
  CHECK(best_mode_by_ade(modes, Tensor({2, 2})) == 0);
  modes.at({0, 0, 0}) = 2.0;
  CHECK(best_mode_by_ade(modes, Tensor({2, 2})) == 1);
  CHECK_THROWS_AS(best_mode_by_ade(modes, Tensor({3, 2})), ShapeError);
}

TEST_CASE("wta regression term equals hand arithmetic")
{
  // gt straight, mode 0 at +1 m in x, mode 1 at +2 m: the best mode errs by 1 m on every x.
  const std::size_t t_f = 12;
  const Tensor gt = straight_line(t_f);
  TrajectoryPrediction pred;
  pred.modes = Tensor({2, t_f, 2});
  for (std::size_t t = 0; t < t_f; ++t) {
    for (std::size_t k = 0; k < 2; ++k) {
      pred.modes.at({k, t, 0}) = static_cast<double>(k + 1);
      pred.modes.at({k, t, 1}) = gt.at({t, 1});
    }
  }
  pred.logits = Tensor({2});
  pred.probabilities = softmax_probabilities(pred.logits);
  const WtaLoss l = wta_loss(pred, gt, 0.0);
  CHECK(l.best_mode == 0);
  double sq = 0.0;
  for (std::size_t t = 0; t < t_f; ++t) {
    sq += 1.0 * 1.0;
  }
  CHECK(l.regression == doctest::Approx(sq / static_cast<double>(t_f)));
  CHECK(l.total == doctest::Approx(l.regression));
}

TEST_CASE("graph wta loss agrees with the value-level loss and passes a gradient check")
{
  const ModelConfig cfg = small_config();
  const Network net(cfg, 3);
  const auto samples = synthetic_samples(cfg, 1, 5);
  const Tensor state = statefeat::normalize_state(samples[0].state, {});
  nn::Graph g;
  const auto out = net.forward(g, g.constant(samples[0].raster), g.constant(state));
  std::size_t best = 99;
  const nn::Var loss = wta_loss(out, samples[0].future, cfg, &best);
  const auto pred = net.predict(samples[0].raster, state);
  const WtaLoss ref = wta_loss(pred, samples[0].future, cfg.loss_alpha);
  CHECK(best == ref.best_mode);
  CHECK(g.value(loss)[0] == doctest::Approx(ref.total).epsilon(1e-12));

  std::vector<Tensor> inputs;
  for (const auto & p : net.parameters()) {
    inputs.push_back(p.value);
  }
  const nn::Fragment f = [&](nn::Graph & gg, std::span<const nn::Var> params) {
    const auto o = net.forward_with(gg, params, gg.constant(samples[0].raster), gg.constant(state));
    return wta_loss(o, samples[0].future, cfg);
  };
  nn::GradCheckOptions opt;
  opt.max_coords_per_input = 20;
  opt.seed = 11;
  CHECK(nn::grad_check(f, inputs, opt).max_relative_error < 1e-5);
}

TEST_CASE("select_trajectory examples")
{
  TrajectoryPrediction pred;
  pred.modes = Tensor({3, 12, 2});
  for (std::size_t t = 0; t < 12; ++t) {
    pred.modes.at({1, t, 0}) = 7.0;
  }
  pred.probabilities = Tensor({3}, {0.1, 0.7, 0.2});
  pred.logits = Tensor({3}, {std::log(0.1), std::log(0.7), std::log(0.2)});
  const Selection s = select_trajectory(pred);
  CHECK(s.index == 1);
  CHECK(s.probability == 0.7);
  CHECK(s.trajectory.shape() == nn::Shape{12, 2});
  CHECK(s.trajectory.at({4, 0}) == 7.0);

  pred.modes = Tensor({2, 12, 2});
  pred.probabilities = Tensor({2}, {0.5, 0.5});
  CHECK(select_trajectory(pred).index == 0);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    TrajectoryPrediction p;
    p.modes = Tensor({5, 12, 2});
    p.logits = random_tensor({5}, rng, -10.0, 10.0);
    p.probabilities = softmax_probabilities(p.logits);
    const double shift = rng.uniform(-100.0, 100.0);
    TrajectoryPrediction q = p;
    for (auto & v : q.logits.data()) {
      v += shift;
    }
    q.probabilities = softmax_probabilities(q.logits);
    CHECK(select_trajectory(p).index == select_trajectory(q).index);
  }
}

TEST_CASE("permuting the head's modes permutes the outputs")
{
  const ModelConfig cfg = small_config(4);
  const Network net(cfg, 21);
  Network perm = net;
  const std::vector<std::size_t> sigma{2, 0, 3, 1};  // new mode j is old mode sigma[j]
  const std::size_t block = cfg.horizon * 2;
  const std::size_t reg = cfg.regression_size();
  const auto & w = net.parameters()[net.parameters().size() - 2].value;
  const auto & b = net.parameters().back().value;
  auto & pw = perm.parameter("fc2.weight").value;
  auto & pb = perm.parameter("fc2.bias").value;
  const std::size_t hidden = cfg.head_hidden;
  auto copy_row = [&](std::size_t dst, std::size_t src) {
    for (std::size_t h = 0; h < hidden; ++h) {
      pw[dst * hidden + h] = w[src * hidden + h];
    }
    pb[dst] = b[src];
  };
  for (std::size_t j = 0; j < cfg.num_modes; ++j) {
    for (std::size_t r = 0; r < block; ++r) {
      copy_row(j * block + r, sigma[j] * block + r);
    }
    copy_row(reg + j, reg + sigma[j]);
  }
  const auto samples = synthetic_samples(cfg, 3, 8);
  for (const auto & s : samples) {
    const Tensor state = statefeat::normalize_state(s.state, {});
    const auto a = net.predict(s.raster, state);
    const auto p = perm.predict(s.raster, state);
    for (std::size_t j = 0; j < cfg.num_modes; ++j) {
      CHECK(p.logits[j] == a.logits[sigma[j]]);
      CHECK(p.probabilities[j] == doctest::Approx(a.probabilities[sigma[j]]).epsilon(1e-14));
      for (std::size_t i = 0; i < block; ++i) {
        CHECK(p.modes[j * block + i] == a.modes[sigma[j] * block + i]);
      }
    }
  }
}

TEST_CASE("training: lr = 0 keeps the initialization")
{
  const ModelConfig cfg = small_config();
  const auto data = synthetic_samples(cfg, 6, 1);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 4;
  tc.learning_rate = 0.0;
  tc.seed = 9;
  const auto r = train(data, {}, {}, cfg, tc);
  CHECK(same_parameters(r.checkpoint.parameters, Network(cfg, 9).parameters()));
  CHECK(r.log.size() == 3);
  CHECK(std::isnan(r.log[0].val_minade5));
}

TEST_CASE("training: zero epochs returns the initialization and logs its loss")
{
  const ModelConfig cfg = small_config();
  const auto data = synthetic_samples(cfg, 5, 2);
  TrainConfig tc;
  tc.epochs = 0;
  tc.seed = 17;
  const auto r = train(data, data, {}, cfg, tc);
  CHECK(same_parameters(r.checkpoint.parameters, Network(cfg, 17).parameters()));
  REQUIRE(r.log.size() == 1);
  CHECK(r.log[0].epoch == 0);
  CHECK(r.log[0].train_loss == doctest::Approx(mean_loss(Network(cfg, 17), {}, data)).epsilon(1e-12));
  CHECK(r.log[0].val_minade5 == doctest::Approx(mean_min_ade(Network(cfg, 17), {}, data, 3)).epsilon(1e-12));
  CHECK(r.checkpoint.seed == 17);
}

TEST_CASE("training is bit-identical for equal seeds and reduces the loss")
{
  const ModelConfig cfg = small_config();
  const auto data = synthetic_samples(cfg, 10, 3);
  TrainConfig tc;
  tc.epochs = 25;
  tc.batch_size = 4;
  tc.learning_rate = 3e-3;
  tc.seed = 5;
  std::size_t calls = 0;
  const auto a = train(data, {}, {}, cfg, tc, [&](const EpochLog &) { ++calls; });
  const auto b = train(data, {}, {}, cfg, tc);
  CHECK(calls == 26);
  CHECK(serialize_checkpoint(a.checkpoint) == serialize_checkpoint(b.checkpoint));
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
  }
  CHECK(a.log.back().train_loss < a.log.front().train_loss);
  tc.seed = 6;
  const auto c = train(data, {}, {}, cfg, tc);
  CHECK(serialize_checkpoint(a.checkpoint) != serialize_checkpoint(c.checkpoint));
}

TEST_CASE("training rejects an empty dataset")
{
  CHECK_THROWS_AS(train({}, {}, {}, small_config(), TrainConfig{}), DataError);
}

TEST_CASE("checkpoint round trip is bit-exact")
{
  const ModelConfig cfg = small_config();
  Checkpoint ck;
  ck.config = cfg;
  ck.parameters = Network(cfg, 33).parameters();
  ck.norm.mean = {5.0, 0.1, -0.01};
  ck.norm.stddev = {3.0, 0.7, 0.2};
  ck.seed = 33;
  const auto path = temp_path("ckpt.bin");
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(same_parameters(back.parameters, ck.parameters));
  CHECK(back.norm.mean == ck.norm.mean);
  CHECK(back.norm.stddev == ck.norm.stddev);
  CHECK(back.seed == 33);
  CHECK(back.config.backbone_channels == cfg.backbone_channels);
  CHECK(back.config.raster.ego_row == 12);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(ck));

  const auto samples = synthetic_samples(cfg, 2, 4);
  const Network n1 = ck.network();
  const Network n2 = back.network();
  for (const auto & s : samples) {
    const Tensor st = statefeat::normalize_state(s.state, ck.norm);
    const auto p1 = n1.predict(s.raster, st);
    const auto p2 = n2.predict(s.raster, st);
    CHECK(nn::bit_equal(p1.modes, p2.modes));
    CHECK(nn::bit_equal(p1.probabilities, p2.probabilities));
  }
}

TEST_CASE("corrupt checkpoints are rejected")
{
  Checkpoint ck;
  ck.config = small_config();
  ck.parameters = Network(ck.config, 1).parameters();
  const auto good = serialize_checkpoint(ck);
  REQUIRE(std::string(good.begin(), good.begin() + 7) == std::string("MAPSTP\0", 7));

  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(bad, "ckpt"), ParseError);

  bad = good;
  bad[7] = 2;
  try {
    parse_checkpoint(bad, "ckpt");
    FAIL("expected ParseError");
  } catch (const ParseError & e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  bad = good;
  bad.push_back(0);
  CHECK_THROWS_AS(parse_checkpoint(bad, "ckpt"), ParseError);
  bad = good;
  bad.resize(bad.size() - 5);
  CHECK_THROWS_AS(parse_checkpoint(bad, "ckpt"), ParseError);
  CHECK_THROWS_AS(parse_checkpoint({}, "ckpt"), ParseError);
  CHECK_THROWS_AS(load_checkpoint(temp_path("missing.bin")), IoError);

  Checkpoint wrong = ck;
  wrong.parameters.pop_back();
  CHECK_THROWS_AS(wrong.network(), Error);
}

TEST_CASE("prepare_samples regenerates scenes and rasterizes in the ego frame")
{
  scenegen::DatasetGenConfig gen;
  scenegen::Dataset ds;
  ds.scene_config = gen.scene;
  ds.samples = scenegen::scene_samples(12345, gen);
  ds.samples.resize(3);
  const raster::RasterConfig rc;
  const auto prepared = prepare_samples(ds, rc);
  REQUIRE(prepared.size() == 3);
  const auto scene = scenegen::generate_scene(12345, gen.scene);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto img = raster::rasterize(scene, ds.samples[i], rc);
    CHECK(prepared[i].raster.values() == img.data);
    CHECK(prepared[i].future.shape() == nn::Shape{12, 2});
    CHECK(prepared[i].future.at({11, 1}) == ds.samples[i].future[11].y);
    CHECK(prepared[i].state.speed == statefeat::compute_state(ds.samples[i].history).speed);
  }
}
