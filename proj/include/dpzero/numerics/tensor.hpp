// Copyright 2026 The dpzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPZERO_NUMERICS_TENSOR_HPP_
#define DPZERO_NUMERICS_TENSOR_HPP_

#include <vector>

#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

using Shape = std::vector<Index>;

Index shape_size(const Shape& shape);

// Dense row-major array with a logical precision tag. Storage is double; when
// the tag is not F64 every element is representable in the tagged format.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Precision precision = Precision::F64);
  // Values are rounded to `precision` on construction.
  Tensor(Shape shape, Vector values, Precision precision = Precision::F64);

  static Tensor from_matrix(const RowMatrix& m, Precision precision = Precision::F64);

  const Shape& shape() const { return shape_; }
  Precision precision() const { return precision_; }
  Index size() const { return data_.size(); }
  Index rank() const { return static_cast<Index>(shape_.size()); }

  const Vector& data() const { return data_; }
  double operator[](Index i) const { return data_[i]; }

  // Two-dimensional view; higher ranks fold all leading extents into rows.
  Eigen::Map<const RowMatrix> matrix() const;
  RowMatrix to_matrix() const { return matrix(); }

  // Overwrites element i after rounding it to this tensor's precision.
  void set(Index i, double value);

 private:
  Shape shape_;
  Vector data_;
  Precision precision_ = Precision::F64;
};

Tensor round_to(const Tensor& t, Precision p);

// Product of two rank-2 tensors; see matmul.hpp for the accumulation rule.
Tensor matmul(const Tensor& a, const Tensor& b, Precision accumulate, Precision out);

}  // namespace dpzero

#endif  // DPZERO_NUMERICS_TENSOR_HPP_
