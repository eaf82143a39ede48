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

#ifndef MAPSTP__NN__OPTIM_HPP_
#define MAPSTP__NN__OPTIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mapstp/nn/graph.hpp"
#include "mapstp/rng.hpp"

namespace mapstp::nn
{

/// Adam moments for a fixed list of parameters.
struct AdamState
{
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  AdamState() = default;
  explicit AdamState(std::span<const Parameter> params);
};

/// One bias-corrected Adam update using each parameter's accumulated grad.
/// Throws ConfigError unless lr > 0 and the state matches the parameters.
void adam_step(std::span<Parameter> params, AdamState & state, double lr);

/// Kaiming-uniform (ReLU gain): U(-b, b), b = sqrt(6 / fan_in).
void kaiming_uniform(Tensor & weights, std::size_t fan_in, Rng & rng);

/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual bias initialization.
void fan_in_uniform(Tensor & values, std::size_t fan_in, Rng & rng);

}  // namespace mapstp::nn

#endif  // MAPSTP__NN__OPTIM_HPP_
