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

#ifndef MAPSTP__NN__GRAPH_HPP_
#define MAPSTP__NN__GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mapstp/nn/tensor.hpp"

namespace mapstp::nn
{

class Graph;

/// Trainable tensor with its accumulated gradient.
struct Parameter
{
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape())
  {
  }
  void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node recorded on a Graph.
struct Var
{
  Graph * graph = nullptr;
  std::uint32_t id = 0;
};

/// Scalar/int attributes an op keeps for its backward pass.
struct OpAttrs
{
  std::size_t a = 0;
  std::size_t b = 0;
  double c = 0.0;
  Tensor saved;
};

struct Node;
using BackwardFn = void (*)(Graph &, const Node &);

/// One entry of the op registry: the name used in diagnostics and the
/// reverse-mode rule. The forward rule lives in the free function that
/// records the node.
struct OpDef
{
  std::string_view name;
  BackwardFn backward;
};

struct Node
{
  const OpDef * op = nullptr;  // nullptr for leaves
  Tensor value;
  const Tensor * external = nullptr;  // leaf bound to a Parameter, not copied
  Tensor grad;
  std::vector<std::uint32_t> inputs;
  OpAttrs attrs;
  bool requires_grad = false;
  std::string label;

  const Tensor & val() const noexcept { return external != nullptr ? *external : value; }
};

/**
 * Reverse-mode tape. Nodes are appended in evaluation order, so reverse
 * insertion order is a valid topological order for backward().
 *
 * A Graph is single-threaded. Distinct Graph instances share nothing and may
 * run on different threads while reading the same Parameters.
 */
class Graph
{
public:
  Graph() = default;
  Graph(const Graph &) = delete;
  Graph & operator=(const Graph &) = delete;

  /// Constant input; never receives a gradient.
  Var constant(Tensor value);
  /// Differentiable leaf owning its value.
  Var variable(Tensor value);
  /// Differentiable leaf reading the parameter's value in place.
  Var param(const Parameter & p);

  const Tensor & value(Var v) const { return nodes_.at(v.id).val(); }
  /// Gradient after backward(); zero tensor if nothing flowed into v.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Seeds d(output)/d(output) = 1 and runs every backward rule once.
  void backward(Var scalar_output);

  /// Label attached to nodes recorded from now on (used in NumericFault reports).
  void set_label(std::string label) { label_ = std::move(label); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Used by op implementations.
  Var record(const OpDef & op, Tensor value, std::vector<Var> inputs, OpAttrs attrs = {});
  const Node & node(std::uint32_t id) const { return nodes_.at(id); }
  const Tensor & input_value(const Node & n, std::size_t i) const
  {
    return nodes_[n.inputs[i]].val();
  }
  bool input_requires_grad(const Node & n, std::size_t i) const
  {
    return nodes_[n.inputs[i]].requires_grad;
  }
  /// Gradient buffer of input i, zero-allocated on first use.
  Tensor & input_grad(const Node & n, std::size_t i);

private:
  std::vector<Node> nodes_;
  std::string label_;
};

/// Registered ops, in registration order.
const std::vector<const OpDef *> & op_registry();
/// Lookup by name; nullptr when unknown.
const OpDef * find_op(std::string_view name);

/**
 * Temporarily replaces the backward rule of a registered op. Exists for
 * negative-control tests of the gradient checker; not thread-safe.
 */
class ScopedBackwardOverride
{
public:
  ScopedBackwardOverride(std::string_view op_name, BackwardFn replacement);
  ~ScopedBackwardOverride();
  ScopedBackwardOverride(const ScopedBackwardOverride &) = delete;
  ScopedBackwardOverride & operator=(const ScopedBackwardOverride &) = delete;

private:
  OpDef * op_;
  BackwardFn original_;
};

// ---- ops -------------------------------------------------------------------

/// x (C_in,H,W), w (C_out,C_in,k,k), b (C_out) -> (C_out,H',W').
Var conv2d(Var x, Var w, Var b, std::size_t stride, std::size_t padding);
Var relu(Var x);
/// (C,H,W) -> (C).
Var global_avg_pool(Var x);
/// x (in), w (out,in), b (out) -> (out).
Var linear(Var x, Var w, Var b);
/// Concatenation of two vectors.
Var concat(Var a, Var b);
/// Numerically stable softmax over a vector (max subtracted).
Var softmax(Var x);
Var log_softmax(Var x);
/// Elements [offset, offset + length) of a vector.
Var slice(Var x, std::size_t offset, std::size_t length);
Var reshape(Var x, Shape shape);
/// x * factor.
Var scale(Var x, double factor);
/// Elementwise sum of equal shapes.
Var add(Var a, Var b);
/// Mean of (x - target)^2 over all elements; scalar (1).
Var mse(Var x, const Tensor & target);
/// x[index] as a scalar (1).
Var pick(Var x, std::size_t index);
/// Sum of all elements; scalar (1).
Var sum(Var x);

}  // namespace mapstp::nn

#endif  // MAPSTP__NN__GRAPH_HPP_
