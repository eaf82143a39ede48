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

#ifndef MAPSTP__NN__TENSOR_HPP_
#define MAPSTP__NN__TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mapstp::nn
{

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape & shape);
std::size_t element_count(const Shape & shape);

/// Dense row-major array of doubles. Extents are all positive.
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape & shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double> & values() const noexcept { return data_; }

  double & operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double & at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  /// Same data viewed under a different shape with equal element count.
  Tensor reshaped(Shape shape) const;

private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

/// Bitwise equality of shape and every element (distinguishes -0.0 from 0.0).
bool bit_equal(const Tensor & a, const Tensor & b) noexcept;

/// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const Shape & a, const Shape & b, const char * what);

}  // namespace mapstp::nn

#endif  // MAPSTP__NN__TENSOR_HPP_
