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
#include <limits>
#include <set>

#include "mapstp/errors.hpp"
#include "mapstp/nn/gradcheck.hpp"
#include "mapstp/nn/graph.hpp"
#include "mapstp/nn/kernels.hpp"
#include "mapstp/nn/optim.hpp"
#include "mapstp/rng.hpp"

using namespace mapstp;
using namespace mapstp::nn;

namespace
{

Tensor random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
  Rng rng(seed);
  Tensor t(std::move(s));
  for (auto & v : t.data()) {
    v = rng.uniform(lo, hi);
  }
  return t;
}

Var weighted_sum(Graph & g, Var x, std::uint64_t seed)
{
  const std::size_t n = g.value(x).size();
  return linear(reshape(x, {n}), g.constant(random_tensor({1, n}, seed)), g.constant(Tensor({1})));
}

}  // namespace

TEST_CASE("tensor construction and shape errors")
{
  const Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.at({1, 2}) == 1.5);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_FALSE(bit_equal(Tensor({1}, {0.0}), Tensor({1}, {-0.0})));
}

TEST_CASE("conv2d: 1x1 identity kernel reproduces the input")
{
  Graph g;
  const Tensor x = random_tensor({3, 4, 5}, 1);
  Tensor w({3, 3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) {
    w.at({c, c, 0, 0}) = 1.0;
  }
  const Var y = conv2d(g.constant(x), g.constant(w), g.constant(Tensor({3})), 1, 0);
  CHECK(g.value(y).shape() == x.shape());
  CHECK(g.value(y).values() == x.values());
}

TEST_CASE("conv2d: all-ones 3x3 kernel on all-ones 3x3 input sums to 9")
{
  Graph g;
  const Var y = conv2d(g.constant(Tensor({1, 3, 3}, 1.0)), g.constant(Tensor({1, 1, 3, 3}, 1.0)), g.constant(Tensor({1})), 1, 0);
  CHECK(g.value(y).shape() == Shape{1, 1, 1});
  CHECK(g.value(y)[0] == 9.0);
}

TEST_CASE("conv2d output size and shape errors")
{
  Graph g;
  const Var x = g.constant(Tensor({3, 128, 128}));
  const Var y = conv2d(x, g.constant(Tensor({16, 3, 3, 3})), g.constant(Tensor({16})), 2, 1);
  CHECK(g.value(y).shape() == Shape{16, 64, 64});
  try {
    conv2d(x, g.constant(Tensor({16, 2, 3, 3})), g.constant(Tensor({16})), 1, 1);
    FAIL("expected ShapeError");
  } catch (const ShapeError & e) {
    const std::string msg = e.what();
    CHECK(msg.find("(3,128,128)") != std::string::npos);
    CHECK(msg.find("(16,2,3,3)") != std::string::npos);
  }
  CHECK_THROWS_AS(conv2d(x, g.constant(Tensor({4, 3, 2, 2})), g.constant(Tensor({4})), 1, 0), ConfigError);
  CHECK_THROWS_AS(conv2d(g.constant(Tensor({1, 2, 2})), g.constant(Tensor({1, 1, 3, 3})), g.constant(Tensor({1})), 1, 0), ConfigError);
}

TEST_CASE("conv2d gradient on a random 2x5x5 input")
{
  const Fragment f = [](Graph & g, std::span<const Var> in) {
    return weighted_sum(g, conv2d(in[0], in[1], in[2], 1, 1), 77);
  };
  const auto r = grad_check(f, {random_tensor({2, 5, 5}, 2), random_tensor({3, 2, 3, 3}, 3), random_tensor({3}, 4)}, {1e-6});
  CHECK(r.max_relative_error < 1e-6);
  CHECK(r.coords_checked == 50 + 54 + 3);
  const Fragment strided = [](Graph & g, std::span<const Var> in) {
    return weighted_sum(g, conv2d(in[0], in[1], in[2], 2, 1), 78);
  };
  const auto s = grad_check(strided, {random_tensor({2, 7, 6}, 5), random_tensor({4, 2, 3, 3}, 6), random_tensor({4}, 7)});
  CHECK(s.max_relative_error < 1e-6);
}

TEST_CASE("linear gradient is essentially exact")
{
  const Fragment f = [](Graph & g, std::span<const Var> in) { return weighted_sum(g, linear(in[0], in[1], in[2]), 9); };
  const auto r = grad_check(f, {random_tensor({5}, 10), random_tensor({4, 5}, 11), random_tensor({4}, 12)});
  CHECK(r.max_relative_error < 1e-8);
}

TEST_CASE("every registered op passes grad_check in isolation")
{
  std::set<std::string> covered;
  auto run = [&](const std::string & name, const Fragment & f, std::vector<Tensor> inputs) {
    const auto r = grad_check(f, std::move(inputs));
    INFO(name);
    CHECK(r.max_relative_error < 1e-6);
    covered.insert(name);
  };
  run("conv2d", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, conv2d(in[0], in[1], in[2], 2, 1), 1); },
      {random_tensor({2, 6, 6}, 1), random_tensor({3, 2, 3, 3}, 2), random_tensor({3}, 3)});
  run("relu", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, relu(in[0]), 2); },
      {Tensor({6}, {-0.9, 0.4, -0.3, 0.8, 0.2, -0.6})});
  run("global_avg_pool", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, global_avg_pool(in[0]), 3); },
      {random_tensor({3, 3, 4}, 4)});
  run("linear", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, linear(in[0], in[1], in[2]), 4); },
      {random_tensor({3}, 5), random_tensor({2, 3}, 6), random_tensor({2}, 7)});
  run("concat", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, concat(in[0], in[1]), 5); },
      {random_tensor({2}, 8), random_tensor({3}, 9)});
  run("softmax", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, softmax(in[0]), 6); },
      {random_tensor({5}, 10, -4, 4)});
  run("log_softmax", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, log_softmax(in[0]), 7); },
      {random_tensor({5}, 11, -4, 4)});
  run("slice", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, slice(in[0], 1, 3), 8); },
      {random_tensor({6}, 12)});
  run("reshape", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, reshape(in[0], {2, 3}), 9); },
      {random_tensor({6}, 13)});
  run("scale", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, scale(in[0], 3.5), 10); },
      {random_tensor({4}, 14)});
  run("add", [](Graph & g, std::span<const Var> in) { return weighted_sum(g, add(in[0], in[1]), 11); },
      {random_tensor({4}, 15), random_tensor({4}, 16)});
  const Tensor target = random_tensor({5}, 17);
  run("mse", [target](Graph &, std::span<const Var> in) { return mse(in[0], target); }, {random_tensor({5}, 18)});
  run("pick", [](Graph &, std::span<const Var> in) { return pick(in[0], 2); }, {random_tensor({4}, 19)});
  run("sum", [](Graph &, std::span<const Var> in) { return sum(in[0]); }, {random_tensor({3, 2}, 20)});
  for (const OpDef * op : op_registry()) {
    INFO(op->name);
    CHECK(covered.count(std::string(op->name)) == 1);
  }
}

TEST_CASE("softmax examples and invariants")
{
  Graph g;
  const Tensor p = g.value(softmax(g.constant(Tensor({3}))));
  for (int i = 0; i < 3; ++i) {
    CHECK(p[static_cast<std::size_t>(i)] == doctest::Approx(1.0 / 3.0));
  }
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(12);
    Tensor logits({n});
    for (auto & v : logits.data()) {
      v = rng.uniform(-50, 50);
    }
    const Tensor q = g.value(softmax(g.constant(logits)));
    double s = 0.0;
    for (const double v : q.data()) {
      CHECK(v > 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const Tensor big = g.value(softmax(g.constant(Tensor({2}, {1000.0, 1000.0}))));
  CHECK(big[0] == doctest::Approx(0.5));
}

TEST_CASE("global_avg_pool of a constant channel")
{
  Graph g;
  Tensor x({2, 3, 3}, 2.5);
  for (std::size_t i = 9; i < 18; ++i) {
    x[i] = -4.0;
  }
  const Tensor y = g.value(global_avg_pool(g.constant(x)));
  CHECK(y[0] == 2.5);
  CHECK(y[1] == -4.0);
}

TEST_CASE("concat, slice, pick and shape errors")
{
  Graph g;
  const Var a = g.constant(Tensor({2}, {1, 2}));
  const Var b = g.constant(Tensor({3}, {3, 4, 5}));
  const Var c = concat(a, b);
  CHECK(g.value(c).values() == std::vector<double>{1, 2, 3, 4, 5});
  CHECK(g.value(slice(c, 1, 3)).values() == std::vector<double>{2, 3, 4});
  CHECK(g.value(pick(c, 4))[0] == 5.0);
  CHECK_THROWS_AS(slice(c, 3, 3), ShapeError);
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(linear(a, g.constant(Tensor({2, 3})), g.constant(Tensor({2}))), ShapeError);
  CHECK_THROWS_AS(concat(g.constant(Tensor({2, 2})), b), ShapeError);
  CHECK_THROWS_AS(mse(a, Tensor({3})), ShapeError);
}

TEST_CASE("non-finite forward values raise a numeric fault naming the layer")
{
  Graph g;
  g.set_label("head.fc2");
  const Var x = g.variable(Tensor({2}, {1.0, std::numeric_limits<double>::infinity()}));
  try {
    scale(x, 2.0);
    FAIL("expected NumericFault");
  } catch (const NumericFault & e) {
    CHECK(std::string(e.what()).find("head.fc2") != std::string::npos);
  }
  const Fragment f = [](Graph & gg, std::span<const Var> in) {
    gg.set_label("exploding");
    return sum(scale(in[0], 1e308));
  };
  CHECK_THROWS_AS(grad_check(f, {Tensor({2}, {10.0, 10.0})}), NumericFault);
}

TEST_CASE("grad_check preconditions and reporting")
{
  const Fragment f = [](Graph &, std::span<const Var> in) { return sum(in[0]); };
  CHECK_THROWS_AS(grad_check(f, {Tensor({2})}, {0.0}), ConfigError);
  CHECK_THROWS_AS(grad_check(f, {Tensor({2})}, {-1e-6}), ConfigError);
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1.0, 3.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-12, 0.0) == doctest::Approx(1e-4));
  GradCheckOptions sampled;
  sampled.max_coords_per_input = 3;
  const auto r = grad_check(f, {Tensor({10})}, sampled);
  CHECK(r.coords_checked == 3);
}

TEST_CASE("wrong backward rule is caught by grad_check")
{
  static BackwardFn original = find_op("linear")->backward;
  const Fragment f = [](Graph & g, std::span<const Var> in) { return weighted_sum(g, linear(in[0], in[1], in[2]), 3); };
  const std::vector<Tensor> inputs{random_tensor({3}, 1), random_tensor({2, 3}, 2), random_tensor({2}, 3)};
  {
    ScopedBackwardOverride bad("linear", [](Graph & g, const Node & n) {
      original(g, n);
      original(g, n);
    });
    CHECK(grad_check(f, inputs).max_relative_error > 0.1);
  }
  CHECK(grad_check(f, inputs).max_relative_error < 1e-8);
  CHECK_THROWS_AS(ScopedBackwardOverride("no_such_op", original), ConfigError);
}

TEST_CASE("backward accumulates through shared inputs")
{
  Graph g;
  const Var x = g.variable(Tensor({3}, {1, 2, 3}));
  const Var y = add(x, x);
  const Var s = sum(scale(y, 2.0));
  g.backward(s);
  CHECK(g.grad(x).values() == std::vector<double>{4, 4, 4});
  const Var c = g.constant(Tensor({1}, {1}));
  CHECK_FALSE(g.requires_grad(c));
}

TEST_CASE("Adam: zero gradient leaves parameters unchanged")
{
  std::vector<Parameter> p{Parameter("w", random_tensor({4}, 1))};
  const Tensor before = p[0].value;
  AdamState st(p);
  for (int i = 0; i < 10; ++i) {
    p[0].zero_grad();
    adam_step(p, st, 0.1);
  }
  CHECK(bit_equal(p[0].value, before));
  CHECK(st.step == 10);
}

TEST_CASE("Adam: first bias-corrected step moves by lr")
{
  std::vector<Parameter> p{Parameter("w", Tensor({1}, {2.0}))};
  AdamState st(p);
  p[0].grad[0] = 1.0;
  adam_step(p, st, 0.1);
  // m_hat = 1, v_hat = 1, step = lr * 1 / (1 + 1e-8).
  CHECK(p[0].value[0] == doctest::Approx(2.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK_THROWS_AS(adam_step(p, st, 0.0), ConfigError);
  CHECK_THROWS_AS(adam_step(p, st, -1.0), ConfigError);
}

TEST_CASE("Adam: reruns are bit identical")
{
  auto run = [] {
    std::vector<Parameter> p{Parameter("a", random_tensor({5}, 3)), Parameter("b", random_tensor({2, 2}, 4))};
    AdamState st(p);
    Rng rng(8);
    for (int step = 0; step < 100; ++step) {
      for (auto & prm : p) {
        for (auto & gr : prm.grad.data()) {
          gr = rng.normal();
        }
      }
      adam_step(p, st, 1e-3);
    }
    return p;
  };
  const auto a = run();
  const auto b = run();
  CHECK(bit_equal(a[0].value, b[0].value));
  CHECK(bit_equal(a[1].value, b[1].value));
}

TEST_CASE("Kaiming-uniform bounds")
{
  Tensor w({64, 9});
  Rng rng(5);
  kaiming_uniform(w, 9, rng);
  const double bound = std::sqrt(6.0 / 9.0);
  double max_abs = 0.0;
  for (const double v : w.data()) {
    max_abs = std::max(max_abs, std::abs(v));
  }
  CHECK(max_abs <= bound);
  CHECK(max_abs > 0.9 * bound);
}

TEST_CASE("parallel kernels agree with the serial reference")
{
  const Conv2dGeometry geo{8, 33, 31, 16, 3, 2, 1};
  const Tensor x = random_tensor({8, 33, 31}, 1);
  const Tensor w = random_tensor({16, 8, 3, 3}, 2);
  const Tensor b = random_tensor({16}, 3);
  const std::size_t out = 16 * geo.out_height() * geo.out_width();
  std::vector<double> y1(out);
  std::vector<double> y2(out);
  kernels::conv2d_forward(geo, x.data(), w.data(), b.data(), y1);
  reference::conv2d_forward(geo, x.data(), w.data(), b.data(), y2);
  CHECK(y1 == y2);

  const Tensor gy = random_tensor({out}, 4);
  std::vector<double> gx1(x.size());
  std::vector<double> gx2(x.size());
  std::vector<double> gw1(w.size());
  std::vector<double> gw2(w.size());
  std::vector<double> gb1(16);
  std::vector<double> gb2(16);
  kernels::conv2d_backward(geo, x.data(), w.data(), gy.data(), gx1, gw1, gb1);
  reference::conv2d_backward(geo, x.data(), w.data(), gy.data(), gx2, gw2, gb2);
  for (std::size_t i = 0; i < gx1.size(); ++i) {
    CHECK(gx1[i] == doctest::Approx(gx2[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < gw1.size(); ++i) {
    CHECK(gw1[i] == doctest::Approx(gw2[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(gb1[i] == doctest::Approx(gb2[i]).epsilon(1e-12));
  }

  const Tensor lx = random_tensor({131}, 5);
  const Tensor lw = random_tensor({256, 131}, 6);
  const Tensor lb = random_tensor({256}, 7);
  std::vector<double> ly1(256);
  std::vector<double> ly2(256);
  kernels::linear_forward(131, 256, lx.data(), lw.data(), lb.data(), ly1);
  reference::linear_forward(131, 256, lx.data(), lw.data(), lb.data(), ly2);
  for (std::size_t i = 0; i < 256; ++i) {
    CHECK(ly1[i] == doctest::Approx(ly2[i]).epsilon(1e-12));
  }
}

TEST_CASE("kernels are bit-identical across repeated calls")
{
  const Conv2dGeometry geo{3, 64, 64, 16, 3, 2, 1};
  const Tensor x = random_tensor({3, 64, 64}, 9);
  const Tensor w = random_tensor({16, 3, 3, 3}, 10);
  const Tensor b = random_tensor({16}, 11);
  std::vector<double> y1(16 * 32 * 32);
  std::vector<double> y2(16 * 32 * 32);
  kernels::conv2d_forward(geo, x.data(), w.data(), b.data(), y1);
  kernels::conv2d_forward(geo, x.data(), w.data(), b.data(), y2);
  CHECK(Tensor({y1.size()}, y1).values() == y2);
  CHECK(bit_equal(Tensor({y1.size()}, y1), Tensor({y2.size()}, y2)));
}

TEST_CASE("dot uses a fixed lane order")
{
  std::vector<double> a(19);
  std::vector<double> b(19);
  for (std::size_t i = 0; i < 19; ++i) {
    a[i] = 1.0 / static_cast<double>(i + 1);
    b[i] = static_cast<double>(i) - 7.5;
  }
  const double d = kernels::dot(a, b);
  double naive = 0.0;
  for (std::size_t i = 0; i < 19; ++i) {
    naive += a[i] * b[i];
  }
  CHECK(d == doctest::Approx(naive).epsilon(1e-14));
}
