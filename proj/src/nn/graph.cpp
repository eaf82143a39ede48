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

#include "mapstp/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mapstp/errors.hpp"
#include "mapstp/nn/kernels.hpp"

namespace mapstp::nn
{

// ---- graph -----------------------------------------------------------------

Var Graph::constant(Tensor value)
{
  Node n;
  n.value = std::move(value);
  n.label = label_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::variable(Tensor value)
{
  Var v = constant(std::move(value));
  nodes_.back().requires_grad = true;
  return v;
}

Var Graph::param(const Parameter & p)
{
  Node n;
  n.external = &p.value;
  n.requires_grad = true;
  n.label = p.name;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor Graph::grad(Var v) const
{
  const Node & n = nodes_.at(v.id);
  if (n.grad.empty()) {
    return Tensor(n.val().shape());
  }
  return n.grad;
}

Var Graph::record(const OpDef & op, Tensor value, std::vector<Var> inputs, OpAttrs attrs)
{
  if (!value.all_finite()) {
    throw NumericFault(
      "numeric fault: non-finite output of op '" + std::string(op.name) + "'" +
      (label_.empty() ? std::string() : " in layer '" + label_ + "'"));
  }
  Node n;
  n.op = &op;
  n.value = std::move(value);
  n.attrs = std::move(attrs);
  n.label = label_;
  n.inputs.reserve(inputs.size());
  for (const Var & in : inputs) {
    if (in.graph != this) {
      throw ConfigError("op '" + std::string(op.name) + "' mixes vars from different graphs");
    }
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || nodes_.at(in.id).requires_grad;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor & Graph::input_grad(const Node & n, std::size_t i)
{
  Node & in = nodes_[n.inputs[i]];
  if (in.grad.empty()) {
    in.grad = Tensor(in.val().shape());
  }
  return in.grad;
}

void Graph::backward(Var scalar_output)
{
  Node & out = nodes_.at(scalar_output.id);
  if (out.val().size() != 1) {
    throw ShapeError("backward() needs a scalar output, got " + to_string(out.val().shape()));
  }
  out.grad = Tensor(out.val().shape(), 1.0);
  for (std::size_t i = scalar_output.id + 1; i-- > 0;) {
    const Node & n = nodes_[i];
    if (n.op != nullptr && n.requires_grad && !n.grad.empty()) {
      n.op->backward(*this, n);
    }
  }
}

// ---- op rules ----------------------------------------------------------------

namespace
{

Conv2dGeometry conv_geometry(const Shape & x, const Shape & w, std::size_t stride, std::size_t pad)
{
  Conv2dGeometry g;
  g.in_channels = x[0];
  g.in_height = x[1];
  g.in_width = x[2];
  g.out_channels = w[0];
  g.kernel = w[2];
  g.stride = stride;
  g.padding = pad;
  return g;
}

void conv2d_backward_rule(Graph & g, const Node & n)
{
  const Tensor & x = g.input_value(n, 0);
  const Tensor & w = g.input_value(n, 1);
  const Conv2dGeometry geom = conv_geometry(x.shape(), w.shape(), n.attrs.a, n.attrs.b);
  // Weight and bias gradients are always computed; they are cheap next to the input term.
  Tensor scratch_w;
  Tensor scratch_b;
  Tensor * gw = &scratch_w;
  Tensor * gb = &scratch_b;
  if (g.input_requires_grad(n, 1)) {
    gw = &g.input_grad(n, 1);
  } else {
    scratch_w = Tensor(w.shape());
  }
  if (g.input_requires_grad(n, 2)) {
    gb = &g.input_grad(n, 2);
  } else {
    scratch_b = Tensor(g.input_value(n, 2).shape());
  }
  std::span<double> gx;
  if (g.input_requires_grad(n, 0)) {
    gx = g.input_grad(n, 0).data();
  }
  kernels::conv2d_backward(geom, x.data(), w.data(), n.grad.data(), gx, gw->data(), gb->data());
}

void relu_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  const auto x = g.input_value(n, 0).data();
  auto gx = g.input_grad(n, 0).data();
  const auto gy = n.grad.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      gx[i] += gy[i];
    }
  }
}

void gap_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  const Shape & s = g.input_value(n, 0).shape();
  const std::size_t plane = s[1] * s[2];
  const double inv = 1.0 / static_cast<double>(plane);
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t c = 0; c < s[0]; ++c) {
    const double gc = n.grad[c] * inv;
    for (std::size_t p = 0; p < plane; ++p) {
      gx[c * plane + p] += gc;
    }
  }
}

void linear_backward_rule(Graph & g, const Node & n)
{
  const Tensor & x = g.input_value(n, 0);
  const Tensor & w = g.input_value(n, 1);
  const std::size_t in = w.dim(1);
  const std::size_t out = w.dim(0);
  Tensor scratch_w;
  Tensor scratch_b;
  Tensor * gw = &scratch_w;
  Tensor * gb = &scratch_b;
  if (g.input_requires_grad(n, 1)) {
    gw = &g.input_grad(n, 1);
  } else {
    scratch_w = Tensor(w.shape());
  }
  if (g.input_requires_grad(n, 2)) {
    gb = &g.input_grad(n, 2);
  } else {
    scratch_b = Tensor(g.input_value(n, 2).shape());
  }
  std::span<double> gx;
  if (g.input_requires_grad(n, 0)) {
    gx = g.input_grad(n, 0).data();
  }
  kernels::linear_backward(in, out, x.data(), w.data(), n.grad.data(), gx, gw->data(), gb->data());
}

void concat_backward_rule(Graph & g, const Node & n)
{
  const std::size_t na = g.input_value(n, 0).size();
  if (g.input_requires_grad(n, 0)) {
    auto ga = g.input_grad(n, 0).data();
    for (std::size_t i = 0; i < na; ++i) {
      ga[i] += n.grad[i];
    }
  }
  if (g.input_requires_grad(n, 1)) {
    auto gb = g.input_grad(n, 1).data();
    for (std::size_t i = 0; i < gb.size(); ++i) {
      gb[i] += n.grad[na + i];
    }
  }
}

void softmax_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  const auto y = n.value.data();
  const auto gy = n.grad.data();
  double inner = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    inner += gy[i] * y[i];
  }
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    gx[i] += y[i] * (gy[i] - inner);
  }
}

void log_softmax_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  const auto y = n.value.data();
  const auto gy = n.grad.data();
  double total = 0.0;
  for (const double v : gy) {
    total += v;
  }
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    gx[i] += gy[i] - std::exp(y[i]) * total;
  }
}

void slice_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < n.attrs.b; ++i) {
    gx[n.attrs.a + i] += n.grad[i];
  }
}

void passthrough_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < gx.size(); ++i) {
    gx[i] += n.grad[i];
  }
}

void scale_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < gx.size(); ++i) {
    gx[i] += n.grad[i] * n.attrs.c;
  }
}

void add_backward_rule(Graph & g, const Node & n)
{
  for (std::size_t k = 0; k < 2; ++k) {
    if (!g.input_requires_grad(n, k)) {
      continue;
    }
    auto gx = g.input_grad(n, k).data();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += n.grad[i];
    }
  }
}

void mse_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  const auto x = g.input_value(n, 0).data();
  const auto t = n.attrs.saved.data();
  const double k = 2.0 * n.grad[0] / static_cast<double>(x.size());
  auto gx = g.input_grad(n, 0).data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    gx[i] += k * (x[i] - t[i]);
  }
}

void pick_backward_rule(Graph & g, const Node & n)
{
  if (g.input_requires_grad(n, 0)) {
    g.input_grad(n, 0)[n.attrs.a] += n.grad[0];
  }
}

void sum_backward_rule(Graph & g, const Node & n)
{
  if (!g.input_requires_grad(n, 0)) {
    return;
  }
  auto gx = g.input_grad(n, 0).data();
  for (double & v : gx) {
    v += n.grad[0];
  }
}

OpDef op_conv2d{"conv2d", &conv2d_backward_rule};
OpDef op_relu{"relu", &relu_backward_rule};
OpDef op_gap{"global_avg_pool", &gap_backward_rule};
OpDef op_linear{"linear", &linear_backward_rule};
OpDef op_concat{"concat", &concat_backward_rule};
OpDef op_softmax{"softmax", &softmax_backward_rule};
OpDef op_log_softmax{"log_softmax", &log_softmax_backward_rule};
OpDef op_slice{"slice", &slice_backward_rule};
OpDef op_reshape{"reshape", &passthrough_backward_rule};
OpDef op_scale{"scale", &scale_backward_rule};
OpDef op_add{"add", &add_backward_rule};
OpDef op_mse{"mse", &mse_backward_rule};
OpDef op_pick{"pick", &pick_backward_rule};
OpDef op_sum{"sum", &sum_backward_rule};

std::vector<OpDef *> & mutable_registry()
{
  static std::vector<OpDef *> ops = {
    &op_conv2d, &op_relu,  &op_gap,   &op_linear, &op_concat, &op_softmax, &op_log_softmax,
    &op_slice,  &op_reshape, &op_scale, &op_add,  &op_mse,    &op_pick,    &op_sum};
  return ops;
}

Graph & graph_of(Var v)
{
  if (v.graph == nullptr) {
    throw ConfigError("var is not attached to a graph");
  }
  return *v.graph;
}

void require_rank(const Tensor & t, std::size_t rank, const char * op, const char * what)
{
  if (t.rank() != rank) {
    throw ShapeError(
      std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
      to_string(t.shape()));
  }
}

}  // namespace

const std::vector<const OpDef *> & op_registry()
{
  static const std::vector<const OpDef *> view = [] {
    std::vector<const OpDef *> out;
    for (OpDef * op : mutable_registry()) {
      out.push_back(op);
    }
    return out;
  }();
  return view;
}

const OpDef * find_op(std::string_view name)
{
  for (const OpDef * op : op_registry()) {
    if (op->name == name) {
      return op;
    }
  }
  return nullptr;
}

ScopedBackwardOverride::ScopedBackwardOverride(std::string_view op_name, BackwardFn replacement)
: op_(nullptr), original_(nullptr)
{
  for (OpDef * op : mutable_registry()) {
    if (op->name == op_name) {
      op_ = op;
    }
  }
  if (op_ == nullptr) {
    throw ConfigError("unknown op '" + std::string(op_name) + "'");
  }
  original_ = op_->backward;
  op_->backward = replacement;
}

ScopedBackwardOverride::~ScopedBackwardOverride() { op_->backward = original_; }

// ---- op forwards -------------------------------------------------------------

Var conv2d(Var x, Var w, Var b, std::size_t stride, std::size_t padding)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  const Tensor & wv = g.value(w);
  const Tensor & bv = g.value(b);
  require_rank(xv, 3, "conv2d", "input");
  require_rank(wv, 4, "conv2d", "weights");
  if (wv.dim(1) != xv.dim(0) || wv.dim(2) != wv.dim(3)) {
    throw ShapeError(
      "conv2d: weights " + to_string(wv.shape()) + " incompatible with input " +
      to_string(xv.shape()));
  }
  if (bv.shape() != Shape{wv.dim(0)}) {
    throw ShapeError(
      "conv2d: bias " + to_string(bv.shape()) + " incompatible with weights " +
      to_string(wv.shape()));
  }
  const Conv2dGeometry geom = conv_geometry(xv.shape(), wv.shape(), stride, padding);
  geom.validate();
  Tensor out({geom.out_channels, geom.out_height(), geom.out_width()});
  kernels::conv2d_forward(geom, xv.data(), wv.data(), bv.data(), out.data());
  OpAttrs attrs;
  attrs.a = stride;
  attrs.b = padding;
  return g.record(op_conv2d, std::move(out), {x, w, b}, std::move(attrs));
}

Var relu(Var x)
{
  Graph & g = graph_of(x);
  Tensor out = g.value(x);
  for (double & v : out.data()) {
    v = v > 0.0 ? v : 0.0;
  }
  return g.record(op_relu, std::move(out), {x});
}

Var global_avg_pool(Var x)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  require_rank(xv, 3, "global_avg_pool", "input");
  const std::size_t plane = xv.dim(1) * xv.dim(2);
  Tensor out({xv.dim(0)});
  for (std::size_t c = 0; c < xv.dim(0); ++c) {
    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      acc += xv[c * plane + p];
    }
    out[c] = acc / static_cast<double>(plane);
  }
  return g.record(op_gap, std::move(out), {x});
}

Var linear(Var x, Var w, Var b)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  const Tensor & wv = g.value(w);
  const Tensor & bv = g.value(b);
  require_rank(xv, 1, "linear", "input");
  require_rank(wv, 2, "linear", "weights");
  if (wv.dim(1) != xv.dim(0)) {
    throw ShapeError(
      "linear: weights " + to_string(wv.shape()) + " incompatible with input " +
      to_string(xv.shape()));
  }
  if (bv.shape() != Shape{wv.dim(0)}) {
    throw ShapeError(
      "linear: bias " + to_string(bv.shape()) + " incompatible with weights " +
      to_string(wv.shape()));
  }
  Tensor out({wv.dim(0)});
  kernels::linear_forward(wv.dim(1), wv.dim(0), xv.data(), wv.data(), bv.data(), out.data());
  return g.record(op_linear, std::move(out), {x, w, b});
}

Var concat(Var a, Var b)
{
  Graph & g = graph_of(a);
  const Tensor & av = g.value(a);
  const Tensor & bv = g.value(b);
  require_rank(av, 1, "concat", "first operand");
  require_rank(bv, 1, "concat", "second operand");
  std::vector<double> data(av.values());
  data.insert(data.end(), bv.values().begin(), bv.values().end());
  const std::size_t n = data.size();
  return g.record(op_concat, Tensor({n}, std::move(data)), {a, b});
}

Var softmax(Var x)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  require_rank(xv, 1, "softmax", "input");
  const double m = *std::max_element(xv.values().begin(), xv.values().end());
  Tensor out(xv.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - m);
    total += out[i];
  }
  for (double & v : out.data()) {
    v /= total;
  }
  return g.record(op_softmax, std::move(out), {x});
}

Var log_softmax(Var x)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  require_rank(xv, 1, "log_softmax", "input");
  const double m = *std::max_element(xv.values().begin(), xv.values().end());
  double total = 0.0;
  for (const double v : xv.values()) {
    total += std::exp(v - m);
  }
  const double log_z = m + std::log(total);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = xv[i] - log_z;
  }
  return g.record(op_log_softmax, std::move(out), {x});
}

Var slice(Var x, std::size_t offset, std::size_t length)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  require_rank(xv, 1, "slice", "input");
  if (length == 0 || offset + length > xv.size()) {
    throw ShapeError(
      "slice: range [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
      ") outside " + to_string(xv.shape()));
  }
  std::vector<double> data(
    xv.values().begin() + static_cast<std::ptrdiff_t>(offset),
    xv.values().begin() + static_cast<std::ptrdiff_t>(offset + length));
  OpAttrs attrs;
  attrs.a = offset;
  attrs.b = length;
  return g.record(op_slice, Tensor({length}, std::move(data)), {x}, std::move(attrs));
}

Var reshape(Var x, Shape shape)
{
  Graph & g = graph_of(x);
  return g.record(op_reshape, g.value(x).reshaped(std::move(shape)), {x});
}

Var scale(Var x, double factor)
{
  Graph & g = graph_of(x);
  Tensor out = g.value(x);
  for (double & v : out.data()) {
    v *= factor;
  }
  OpAttrs attrs;
  attrs.c = factor;
  return g.record(op_scale, std::move(out), {x}, std::move(attrs));
}

Var add(Var a, Var b)
{
  Graph & g = graph_of(a);
  const Tensor & av = g.value(a);
  const Tensor & bv = g.value(b);
  require_same_shape(av.shape(), bv.shape(), "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += bv[i];
  }
  return g.record(op_add, std::move(out), {a, b});
}

Var mse(Var x, const Tensor & target)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  require_same_shape(xv.shape(), target.shape(), "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - target[i];
    acc += d * d;
  }
  OpAttrs attrs;
  attrs.saved = target;
  return g.record(
    op_mse, Tensor::scalar(acc / static_cast<double>(xv.size())), {x}, std::move(attrs));
}

Var pick(Var x, std::size_t index)
{
  Graph & g = graph_of(x);
  const Tensor & xv = g.value(x);
  if (index >= xv.size()) {
    throw ShapeError(
      "pick: index " + std::to_string(index) + " outside " + to_string(xv.shape()));
  }
  OpAttrs attrs;
  attrs.a = index;
  return g.record(op_pick, Tensor::scalar(xv[index]), {x}, std::move(attrs));
}

Var sum(Var x)
{
  Graph & g = graph_of(x);
  double acc = 0.0;
  for (const double v : g.value(x).values()) {
    acc += v;
  }
  return g.record(op_sum, Tensor::scalar(acc), {x});
}

}  // namespace mapstp::nn
