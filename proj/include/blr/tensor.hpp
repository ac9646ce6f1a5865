/* Copyright 2026 The BLR Kernels Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BLR_TENSOR_HPP_
#define BLR_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace blr {

using Shape = std::vector<std::size_t>;

// Product of the dimensions; 1 for the rank-0 shape.
std::size_t element_count(const Shape& shape);

// Row-major strides in elements.
std::vector<std::size_t> row_major_strides(const Shape& shape);

// Dense row-major f32 array. Rank 0 holds a single scalar.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  // Builds a rank-2 tensor from nested rows; all rows must have equal length.
  static Tensor from_rows(
      std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float* raw() { return data_.data(); }
  const float* raw() const { return data_.data(); }

  float& operator[](std::size_t flat) { return data_[flat]; }
  float operator[](std::size_t flat) const { return data_[flat]; }

  // Multi-index access; the number of indices must equal rank().
  float& at(std::initializer_list<std::size_t> index);
  float at(std::initializer_list<std::size_t> index) const;

  // Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<float> data_;
};

// max |a - b| over all elements; shapes must match in element count.
float max_abs_diff(const Tensor& a, const Tensor& b);

// ||actual - expected||_F / ||expected||_F, accumulated in double. Returns the
// absolute norm of the difference when expected is all zeros.
double relative_frobenius_error(std::span<const float> actual,
                                std::span<const double> expected);
double relative_frobenius_error(const Tensor& actual, const Tensor& expected);

double frobenius_norm(const Tensor& t);

}  // namespace blr

#endif  // BLR_TENSOR_HPP_
