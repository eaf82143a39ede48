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

#include "mapstp/nn/optim.hpp"

#include <cmath>
#include <string>

#include "mapstp/errors.hpp"

namespace mapstp::nn
{

AdamState::AdamState(std::span<const Parameter> params)
{
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (const Parameter & p : params) {
    first_moment.emplace_back(p.value.shape());
    second_moment.emplace_back(p.value.shape());
  }
}

void adam_step(std::span<Parameter> params, AdamState & state, double lr)
{
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("adam: learning rate must be positive and finite");
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ConfigError(
      "adam: state tracks " + std::to_string(state.first_moment.size()) + " tensors, got " +
      std::to_string(params.size()) + " parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter & p = params[k];
    require_same_shape(p.value.shape(), state.first_moment[k].shape(), "adam moments");
    require_same_shape(p.value.shape(), p.grad.shape(), "adam gradient");
    auto value = p.value.data();
    const auto grad = p.grad.data();
    auto m = state.first_moment[k].data();
    auto v = state.second_moment[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void kaiming_uniform(Tensor & weights, std::size_t fan_in, Rng & rng)
{
  if (fan_in == 0) {
    throw ConfigError("kaiming_uniform: fan_in must be positive");
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double & w : weights.data()) {
    w = rng.uniform(-bound, bound);
  }
}

void fan_in_uniform(Tensor & values, std::size_t fan_in, Rng & rng)
{
  if (fan_in == 0) {
    throw ConfigError("fan_in_uniform: fan_in must be positive");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double & v : values.data()) {
    v = rng.uniform(-bound, bound);
  }
}

}  // namespace mapstp::nn
