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

#include "mapstp/nn/kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "mapstp/errors.hpp"

namespace mapstp::nn
{

void Conv2dGeometry::validate() const
{
  if (kernel == 0 || kernel % 2 == 0) {
    throw ConfigError("conv2d kernel size must be odd, got " + std::to_string(kernel));
  }
  if (stride == 0) {
    throw ConfigError("conv2d stride must be positive");
  }
  if (in_channels == 0 || out_channels == 0 || in_height == 0 || in_width == 0) {
    throw ConfigError("conv2d extents must be positive");
  }
  if (in_height + 2 * padding < kernel || in_width + 2 * padding < kernel) {
    throw ConfigError("conv2d kernel larger than padded input");
  }
}

namespace kernels
{

namespace
{

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1U << 15;

// cols[(ci*k + ki)*k + kj][oy*W' + ox] = padded input sample under that tap.
void im2col(const Conv2dGeometry & g, const double * input, double * cols)
{
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  const std::size_t plane = oh * ow;
  const auto rows = static_cast<std::int64_t>(g.patch_size());
#pragma omp parallel for schedule(static) if (rows * plane > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t kk = static_cast<std::size_t>(r);
    const std::size_t ci = kk / (g.kernel * g.kernel);
    const std::size_t ki = (kk / g.kernel) % g.kernel;
    const std::size_t kj = kk % g.kernel;
    const double * src = input + ci * g.in_height * g.in_width;
    double * dst = cols + kk * plane;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const std::int64_t iy = static_cast<std::int64_t>(oy * g.stride + ki) -
                              static_cast<std::int64_t>(g.padding);
      double * out_row = dst + oy * ow;
      if (iy < 0 || iy >= static_cast<std::int64_t>(g.in_height)) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          out_row[ox] = 0.0;
        }
        continue;
      }
      const double * in_row = src + static_cast<std::size_t>(iy) * g.in_width;
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::int64_t ix = static_cast<std::int64_t>(ox * g.stride + kj) -
                                static_cast<std::int64_t>(g.padding);
        out_row[ox] = (ix < 0 || ix >= static_cast<std::int64_t>(g.in_width))
                        ? 0.0
                        : in_row[static_cast<std::size_t>(ix)];
      }
    }
  }
}

// Scatter-add of cols back onto the input grid; one thread per input channel.
void col2im_add(const Conv2dGeometry & g, const double * cols, double * grad_input)
{
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  const std::size_t plane = oh * ow;
  const std::size_t taps = g.kernel * g.kernel;
  const auto channels = static_cast<std::int64_t>(g.in_channels);
#pragma omp parallel for schedule(static) if (channels * taps * plane > kParallelWork)
  for (std::int64_t c = 0; c < channels; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    double * dst = grad_input + ci * g.in_height * g.in_width;
    for (std::size_t t = 0; t < taps; ++t) {
      const std::size_t ki = t / g.kernel;
      const std::size_t kj = t % g.kernel;
      const double * src = cols + (ci * taps + t) * plane;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        const std::int64_t iy = static_cast<std::int64_t>(oy * g.stride + ki) -
                                static_cast<std::int64_t>(g.padding);
        if (iy < 0 || iy >= static_cast<std::int64_t>(g.in_height)) {
          continue;
        }
        double * in_row = dst + static_cast<std::size_t>(iy) * g.in_width;
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::int64_t ix = static_cast<std::int64_t>(ox * g.stride + kj) -
                                  static_cast<std::int64_t>(g.padding);
          if (ix >= 0 && ix < static_cast<std::int64_t>(g.in_width)) {
            in_row[static_cast<std::size_t>(ix)] += src[oy * ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) noexcept
{
  const std::size_t n = a.size();
  const std::size_t n8 = n - n % 8;
  double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n8; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      acc[j] += a[i + j] * b[i + j];
    }
  }
  double tail = 0.0;
  for (std::size_t i = n8; i < n; ++i) {
    tail += a[i] * b[i];
  }
  return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
         tail;
}

void conv2d_forward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> bias, std::span<double> output)
{
  const std::size_t plane = g.out_height() * g.out_width();
  const std::size_t patch = g.patch_size();
  std::vector<double> cols(patch * plane);
  im2col(g, input.data(), cols.data());

  const auto out_channels = static_cast<std::int64_t>(g.out_channels);
#pragma omp parallel for schedule(static) if (out_channels * patch * plane > kParallelWork)
  for (std::int64_t c = 0; c < out_channels; ++c) {
    const std::size_t co = static_cast<std::size_t>(c);
    double * row = output.data() + co * plane;
    const double b = bias[co];
    for (std::size_t p = 0; p < plane; ++p) {
      row[p] = b;
    }
    const double * w = weights.data() + co * patch;
    for (std::size_t kk = 0; kk < patch; ++kk) {
      const double wk = w[kk];
      const double * col = cols.data() + kk * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        row[p] += wk * col[p];
      }
    }
  }
}

void conv2d_backward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> grad_output, std::span<double> grad_input,
  std::span<double> grad_weights, std::span<double> grad_bias)
{
  const std::size_t plane = g.out_height() * g.out_width();
  const std::size_t patch = g.patch_size();
  std::vector<double> cols(patch * plane);
  im2col(g, input.data(), cols.data());

  const auto out_channels = static_cast<std::int64_t>(g.out_channels);
#pragma omp parallel for schedule(static) if (out_channels * patch * plane > kParallelWork)
  for (std::int64_t c = 0; c < out_channels; ++c) {
    const std::size_t co = static_cast<std::size_t>(c);
    const std::span<const double> go = grad_output.subspan(co * plane, plane);
    double bsum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      bsum += go[p];
    }
    grad_bias[co] += bsum;
    double * gw = grad_weights.data() + co * patch;
    for (std::size_t kk = 0; kk < patch; ++kk) {
      gw[kk] += dot(go, std::span<const double>(cols.data() + kk * plane, plane));
    }
  }

  if (grad_input.empty()) {
    return;
  }
  // Reuse the column buffer for d(cols) = W^T d(out).
  const auto rows = static_cast<std::int64_t>(patch);
#pragma omp parallel for schedule(static) if (rows * g.out_channels * plane > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t kk = static_cast<std::size_t>(r);
    double * dcol = cols.data() + kk * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      dcol[p] = 0.0;
    }
    for (std::size_t co = 0; co < g.out_channels; ++co) {
      const double wk = weights[co * patch + kk];
      const double * go = grad_output.data() + co * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dcol[p] += wk * go[p];
      }
    }
  }
  col2im_add(g, cols.data(), grad_input.data());
}

void linear_forward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> bias, std::span<double> y)
{
  const auto rows = static_cast<std::int64_t>(out);
#pragma omp parallel for schedule(static) if (in * out > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t o = static_cast<std::size_t>(r);
    y[o] = bias[o] + dot(weights.subspan(o * in, in), x);
  }
}

void linear_backward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> grad_y, std::span<double> grad_x, std::span<double> grad_weights,
  std::span<double> grad_bias)
{
  const auto rows = static_cast<std::int64_t>(out);
#pragma omp parallel for schedule(static) if (in * out > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t o = static_cast<std::size_t>(r);
    const double go = grad_y[o];
    grad_bias[o] += go;
    double * gw = grad_weights.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) {
      gw[i] += go * x[i];
    }
  }
  if (grad_x.empty()) {
    return;
  }
  for (std::size_t o = 0; o < out; ++o) {
    const double go = grad_y[o];
    const double * w = weights.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) {
      grad_x[i] += w[i] * go;
    }
  }
}

}  // namespace kernels

namespace reference
{

void conv2d_forward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> bias, std::span<double> output)
{
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  const std::size_t k = g.kernel;
  for (std::size_t co = 0; co < g.out_channels; ++co) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = bias[co];
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const std::int64_t iy = static_cast<std::int64_t>(oy * g.stride + ki) -
                                    static_cast<std::int64_t>(g.padding);
            for (std::size_t kj = 0; kj < k; ++kj) {
              const std::int64_t ix = static_cast<std::int64_t>(ox * g.stride + kj) -
                                      static_cast<std::int64_t>(g.padding);
              if (
                iy < 0 || ix < 0 || iy >= static_cast<std::int64_t>(g.in_height) ||
                ix >= static_cast<std::int64_t>(g.in_width)) {
                continue;
              }
              acc += weights[((co * g.in_channels + ci) * k + ki) * k + kj] *
                     input[(ci * g.in_height + static_cast<std::size_t>(iy)) * g.in_width +
                           static_cast<std::size_t>(ix)];
            }
          }
        }
        output[(co * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void conv2d_backward(
  const Conv2dGeometry & g, std::span<const double> input, std::span<const double> weights,
  std::span<const double> grad_output, std::span<double> grad_input,
  std::span<double> grad_weights, std::span<double> grad_bias)
{
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  const std::size_t k = g.kernel;
  for (std::size_t co = 0; co < g.out_channels; ++co) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const double go = grad_output[(co * oh + oy) * ow + ox];
        grad_bias[co] += go;
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
          for (std::size_t ki = 0; ki < k; ++ki) {
            const std::int64_t iy = static_cast<std::int64_t>(oy * g.stride + ki) -
                                    static_cast<std::int64_t>(g.padding);
            for (std::size_t kj = 0; kj < k; ++kj) {
              const std::int64_t ix = static_cast<std::int64_t>(ox * g.stride + kj) -
                                      static_cast<std::int64_t>(g.padding);
              if (
                iy < 0 || ix < 0 || iy >= static_cast<std::int64_t>(g.in_height) ||
                ix >= static_cast<std::int64_t>(g.in_width)) {
                continue;
              }
              const std::size_t w_idx = ((co * g.in_channels + ci) * k + ki) * k + kj;
              const std::size_t x_idx =
                (ci * g.in_height + static_cast<std::size_t>(iy)) * g.in_width +
                static_cast<std::size_t>(ix);
              grad_weights[w_idx] += go * input[x_idx];
              if (!grad_input.empty()) {
                grad_input[x_idx] += go * weights[w_idx];
              }
            }
          }
        }
      }
    }
  }
}

void linear_forward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> bias, std::span<double> y)
{
  for (std::size_t o = 0; o < out; ++o) {
    double acc = bias[o];
    for (std::size_t i = 0; i < in; ++i) {
      acc += weights[o * in + i] * x[i];
    }
    y[o] = acc;
  }
}

void linear_backward(
  std::size_t in, std::size_t out, std::span<const double> x, std::span<const double> weights,
  std::span<const double> grad_y, std::span<double> grad_x, std::span<double> grad_weights,
  std::span<double> grad_bias)
{
  for (std::size_t o = 0; o < out; ++o) {
    grad_bias[o] += grad_y[o];
    for (std::size_t i = 0; i < in; ++i) {
      grad_weights[o * in + i] += grad_y[o] * x[i];
      if (!grad_x.empty()) {
        grad_x[i] += weights[o * in + i] * grad_y[o];
      }
    }
  }
}

}  // namespace reference

}  // namespace mapstp::nn
