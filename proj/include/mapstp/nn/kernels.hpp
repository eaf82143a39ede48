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

#ifndef MAPSTP__NN__KERNELS_HPP_
#define MAPSTP__NN__KERNELS_HPP_

#include <cstddef>
#include <span>

namespace mapstp::nn
{

/// Extents of one 2-D cross-correlation with square odd kernels.
struct Conv2dGeometry
{
  std::size_t in_channels = 0;
  std::size_t in_height = 0;
  std::size_t in_width = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const noexcept { return (in_height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const noexcept { return (in_width + 2 * padding - kernel) / stride + 1; }
  std::size_t patch_size() const noexcept { return in_channels * kernel * kernel; }

  /// Throws ConfigError on even kernels, zero stride or an empty output.
  void validate() const;
};

// Dense kernels. Every output element is produced by exactly one thread and
// summed in a fixed order, so results are bit-identical for any thread count.
// Gradient outputs are accumulated (+=) into the caller's buffers.
namespace kernels
{

void conv2d_forward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> bias, std::span<double> output);

/// grad_input may be empty when the input does not need a gradient.
void conv2d_backward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> grad_output, std::span<double> grad_input,
  std::span<double> grad_weights, std::span<double> grad_bias);

/// y = W x + b with W stored (out, in).
void linear_forward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> bias, std::span<double> y);

void linear_backward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> grad_y, std::span<double> grad_x, std::span<double> grad_weights,
  std::span<double> grad_bias);

/// Fixed-order 8-lane dot product; the lane layout is part of the numeric contract.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace kernels

// Direct-loop serial versions. Kept as the test oracle and benchmark baseline.
namespace reference
{

void conv2d_forward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> bias, std::span<double> output);

void conv2d_backward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> grad_output, std::span<double> grad_input,
  std::span<double> grad_weights, std::span<double> grad_bias);

void linear_forward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> bias, std::span<double> y);

void linear_backward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> grad_y, std::span<double> grad_x, std::span<double> grad_weights,
  std::span<double> grad_bias);

}  // namespace reference

}  // namespace mapstp::nn

#endif  // MAPSTP__NN__KERNELS_HPP_
