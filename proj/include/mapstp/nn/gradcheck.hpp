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

#ifndef MAPSTP__NN__GRADCHECK_HPP_
#define MAPSTP__NN__GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mapstp/nn/graph.hpp"

namespace mapstp::nn
{

/// Builds a scalar from differentiable leaves, one per checked input.
using Fragment = std::function<Var(Graph &, std::span<const Var>)>;

struct GradCheckOptions
{
  double epsilon = 1e-6;
  /// 0 checks every coordinate; otherwise a seeded sample of this many per input.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult
{
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// |a - b| / max(1e-8, |a| + |b|).
double relative_error(double a, double b) noexcept;

/**
 * Compares reverse-mode gradients of `fragment` against central differences
 * (f(x + e) - f(x - e)) / 2e at `inputs`.
 *
 * Throws ConfigError for epsilon <= 0. NumericFault from the fragment
 * propagates with the offending layer label.
 */
GradCheckResult grad_check(
  const Fragment & fragment, std::vector<Tensor> inputs, const GradCheckOptions & options = {});

struct DirectionalCheckOptions
{
  double epsilon = 1e-6;
  std::size_t directions_per_input = 4;
  std::size_t joint_directions = 4;
  std::uint64_t seed = 0;
};

/**
 * Compares the analytic directional derivative g . v against
 * (f(x + e v) - f(x - e v)) / 2e for random unit directions v, drawn per input
 * and jointly over all inputs. Suited to large networks, where a per-coordinate
 * check would need two forward passes per parameter. worst_input == inputs.size()
 * marks a joint direction; worst_index is the direction number.
 */
GradCheckResult directional_grad_check(
  const Fragment & fragment, std::vector<Tensor> inputs, const DirectionalCheckOptions & options = {});

}  // namespace mapstp::nn

#endif  // MAPSTP__NN__GRADCHECK_HPP_
