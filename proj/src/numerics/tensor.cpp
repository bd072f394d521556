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

#include "dpzero/numerics/tensor.hpp"

#include <numeric>
#include <string>

#include "dpzero/errors.hpp"
#include "dpzero/numerics/matmul.hpp"

namespace dpzero {

Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1},
                         [](Index acc, Index extent) {
                           if (extent < 0) throw ContractViolation("negative tensor extent");
                           return acc * extent;
                         });
}

Tensor::Tensor(Shape shape, Precision precision)
    : shape_(std::move(shape)), data_(Vector::Zero(shape_size(shape_))), precision_(precision) {}

Tensor::Tensor(Shape shape, Vector values, Precision precision)
    : shape_(std::move(shape)), data_(std::move(values)), precision_(precision) {
  if (data_.size() != shape_size(shape_)) {
    throw ContractViolation("tensor data length " + std::to_string(data_.size()) +
                            " does not match shape size " + std::to_string(shape_size(shape_)));
  }
  round_in_place(data_, precision_);
}

Tensor Tensor::from_matrix(const RowMatrix& m, Precision precision) {
  return Tensor({m.rows(), m.cols()}, m.reshaped<Eigen::RowMajor>(), precision);
}

Eigen::Map<const RowMatrix> Tensor::matrix() const {
  const Index cols = shape_.empty() ? 1 : shape_.back();
  const Index rows = cols == 0 ? 0 : size() / cols;
  return Eigen::Map<const RowMatrix>(data_.data(), rows, cols);
}

void Tensor::set(Index i, double value) { data_[i] = round_to(value, precision_); }

Tensor round_to(const Tensor& t, Precision p) { return Tensor(t.shape(), t.data(), p); }

Tensor matmul(const Tensor& a, const Tensor& b, Precision accumulate, Precision out) {
  if (a.rank() != 2 || b.rank() != 2) throw ContractViolation("matmul: operands must be rank 2");
  return Tensor::from_matrix(matmul(a.matrix(), b.matrix(), accumulate, out), out);
}

}  // namespace dpzero
