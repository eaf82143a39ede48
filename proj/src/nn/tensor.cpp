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

#include "mapstp/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "mapstp/errors.hpp"

namespace mapstp::nn
{

std::string to_string(const Shape & shape)
{
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::size_t element_count(const Shape & shape)
{
  std::size_t n = 1;
  for (const auto extent : shape) {
    n *= extent;
  }
  return n;
}

namespace
{
void validate_shape(const Shape & shape)
{
  if (shape.empty()) {
    throw ShapeError("tensor shape must have at least one axis");
  }
  for (const auto extent : shape) {
    if (extent == 0) {
      throw ShapeError("tensor extents must be positive, got " + to_string(shape));
    }
  }
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape))
{
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
  validate_shape(shape_);
  if (data_.size() != element_count(shape_)) {
    throw ShapeError(
      "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
      to_string(shape_));
  }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const
{
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank does not match tensor shape " + to_string(shape_));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (const auto i : index) {
    if (i >= shape_[axis]) {
      throw ShapeError("index out of range for tensor shape " + to_string(shape_));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

double & Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const
{
  if (element_count(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool bit_equal(const Tensor & a, const Tensor & b) noexcept
{
  if (a.shape() != b.shape()) {
    return false;
  }
  return a.size() == 0 ||
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

void require_same_shape(const Shape & a, const Shape & b, const char * what)
{
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape " + to_string(a) + " vs " + to_string(b));
  }
}

}  // namespace mapstp::nn
