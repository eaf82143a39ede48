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

#include "mapstp/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mapstp/errors.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::nn
{

double relative_error(double a, double b) noexcept
{
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

namespace
{

double evaluate(const Fragment & fragment, const std::vector<Tensor> & inputs)
{
  Graph g;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor & t : inputs) {
    vars.push_back(g.constant(t));
  }
  const Var out = fragment(g, vars);
  if (g.value(out).size() != 1) {
    throw ShapeError("grad_check: fragment must return a scalar");
  }
  return g.value(out)[0];
}

std::vector<std::size_t> coordinates(std::size_t n, std::size_t limit, Rng & rng)
{
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= n) {
    return idx;
  }
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<Tensor> analytic_gradients(const Fragment & fragment, const std::vector<Tensor> & inputs)
{
  Graph g;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor & t : inputs) {
    vars.push_back(g.variable(t));
  }
  const Var out = fragment(g, vars);
  g.backward(out);
  std::vector<Tensor> grads;
  for (const Var & v : vars) {
    grads.push_back(g.grad(v));
  }
  return grads;
}

}  // namespace

GradCheckResult grad_check(
  const Fragment & fragment, std::vector<Tensor> inputs, const GradCheckOptions & options)
{
  if (!(options.epsilon > 0.0)) {
    throw ConfigError("grad_check: epsilon must be positive");
  }

  const std::vector<Tensor> analytic = analytic_gradients(fragment, inputs);

  GradCheckResult result;
  Rng rng(options.seed);
  const double eps = options.epsilon;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (const std::size_t i : coordinates(inputs[k].size(), options.max_coords_per_input, rng)) {
      const double saved = inputs[k][i];
      inputs[k][i] = saved + eps;
      const double plus = evaluate(fragment, inputs);
      inputs[k][i] = saved - eps;
      const double minus = evaluate(fragment, inputs);
      inputs[k][i] = saved;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double err = relative_error(analytic[k][i], numeric);
      ++result.coords_checked;
      if (err > result.max_relative_error || result.coords_checked == 1) {
        result.max_relative_error = err;
        result.worst_input = k;
        result.worst_index = i;
        result.worst_analytic = analytic[k][i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

GradCheckResult directional_grad_check(
  const Fragment & fragment, std::vector<Tensor> inputs, const DirectionalCheckOptions & options)
{
  if (!(options.epsilon > 0.0)) {
    throw ConfigError("directional_grad_check: epsilon must be positive");
  }
  const std::vector<Tensor> analytic = analytic_gradients(fragment, inputs);
  const std::vector<Tensor> origin = inputs;

  GradCheckResult result;
  Rng rng(options.seed);
  const double eps = options.epsilon;
  // Direction d spans either one input (k < n) or all inputs jointly (k == n); unit norm overall.
  auto check = [&](std::size_t k, std::size_t d) {
    std::vector<Tensor> dir;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      Tensor v(inputs[j].shape());
      if (k == inputs.size() || k == j) {
        for (double & x : v.data()) {
          x = rng.normal();
          norm2 += x * x;
        }
      }
      dir.push_back(std::move(v));
    }
    const double scale = 1.0 / std::sqrt(norm2);
    double projected = 0.0;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      for (std::size_t i = 0; i < dir[j].size(); ++i) {
        dir[j][i] *= scale;
        projected += analytic[j][i] * dir[j][i];
      }
    }
    auto shifted = [&](double sign) {
      for (std::size_t j = 0; j < inputs.size(); ++j) {
        for (std::size_t i = 0; i < inputs[j].size(); ++i) {
          inputs[j][i] = origin[j][i] + sign * eps * dir[j][i];
        }
      }
      return evaluate(fragment, inputs);
    };
    const double plus = shifted(1.0);
    const double minus = shifted(-1.0);
    inputs = origin;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double err = relative_error(projected, numeric);
    ++result.coords_checked;
    if (err > result.max_relative_error || result.coords_checked == 1) {
      result.max_relative_error = err;
      result.worst_input = k;
      result.worst_index = d;
      result.worst_analytic = projected;
      result.worst_numeric = numeric;
    }
  };
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t d = 0; d < options.directions_per_input; ++d) {
      check(k, d);
    }
  }
  for (std::size_t d = 0; d < options.joint_directions; ++d) {
    check(inputs.size(), d);
  }
  return result;
}

}  // namespace mapstp::nn
