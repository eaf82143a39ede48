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

// Serial reference kernels vs the OpenMP kernels on the layer shapes of the
// default network (128x128 raster, channels 16-32-64-128, 256 hidden units).

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "mapstp/nn/kernels.hpp"
#include "mapstp/rng.hpp"

namespace
{

using mapstp::Rng;
using mapstp::nn::Conv2dGeometry;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<double> v(n);
  for (double & x : v) {
    x = rng.uniform(-1.0, 1.0);
  }
  return v;
}

// Layer index -> geometry of the default backbone.
Conv2dGeometry backbone_layer(int layer)
{
  static const std::size_t channels[] = {3, 16, 32, 64, 128};
  const std::size_t side = std::size_t{128} >> layer;
  return {channels[layer], side, side, channels[layer + 1], 3, 2, 1};
}

struct ConvData
{
  Conv2dGeometry g;
  std::vector<double> x, w, b, y, gy, gx, gw, gb;

  explicit ConvData(int layer) : g(backbone_layer(layer))
  {
    const std::size_t out = g.out_channels * g.out_height() * g.out_width();
    x = random_vector(g.in_channels * g.in_height * g.in_width, 1);
    w = random_vector(g.out_channels * g.patch_size(), 2);
    b = random_vector(g.out_channels, 3);
    y.resize(out);
    gy = random_vector(out, 4);
    gx.resize(x.size());
    gw.resize(w.size());
    gb.resize(b.size());
  }
};

template <bool Parallel>
void conv_forward(benchmark::State & state)
{
  ConvData d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      mapstp::nn::kernels::conv2d_forward(d.g, d.x, d.w, d.b, d.y);
    } else {
      mapstp::nn::reference::conv2d_forward(d.g, d.x, d.w, d.b, d.y);
    }
    benchmark::DoNotOptimize(d.y.data());
  }
  state.counters["threads"] = omp_get_max_threads();
}

template <bool Parallel>
void conv_backward(benchmark::State & state)
{
  ConvData d(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      mapstp::nn::kernels::conv2d_backward(d.g, d.x, d.w, d.gy, d.gx, d.gw, d.gb);
    } else {
      mapstp::nn::reference::conv2d_backward(d.g, d.x, d.w, d.gy, d.gx, d.gw, d.gb);
    }
    benchmark::DoNotOptimize(d.gw.data());
  }
  state.counters["threads"] = omp_get_max_threads();
}

template <bool Parallel>
void linear_pass(benchmark::State & state)
{
  const auto in = static_cast<std::size_t>(state.range(0));
  const auto out = static_cast<std::size_t>(state.range(1));
  const auto x = random_vector(in, 5);
  const auto w = random_vector(in * out, 6);
  const auto b = random_vector(out, 7);
  const auto gy = random_vector(out, 8);
  std::vector<double> y(out), gx(in), gw(in * out), gb(out);
  for (auto _ : state) {
    if constexpr (Parallel) {
      mapstp::nn::kernels::linear_forward(in, out, x, w, b, y);
      mapstp::nn::kernels::linear_backward(in, out, x, w, gy, gx, gw, gb);
    } else {
      mapstp::nn::reference::linear_forward(in, out, x, w, b, y);
      mapstp::nn::reference::linear_backward(in, out, x, w, gy, gx, gw, gb);
    }
    benchmark::DoNotOptimize(gw.data());
  }
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(conv_forward<false>)->Name("conv2d_forward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_forward<true>)->Name("conv2d_forward/openmp")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<false>)->Name("conv2d_backward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<true>)->Name("conv2d_backward/openmp")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(linear_pass<false>)->Name("linear/reference")->Args({131, 256})->Args({256, 250})->Unit(benchmark::kMicrosecond);
BENCHMARK(linear_pass<true>)->Name("linear/openmp")->Args({131, 256})->Args({256, 250})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
