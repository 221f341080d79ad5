// udac/tensor.h

// Copyright 2026  UDAC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef UDAC_TENSOR_H_
#define UDAC_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace udac {

// Dense row-major matrix of 64-bit reals.  The universal value type for
// features, activations and gradients.  A 1xN tensor doubles as a vector.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int64_t rows, int64_t cols);  // zero-filled

  static Tensor zeros(int64_t rows, int64_t cols) { return Tensor(rows, cols); }

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  int64_t size() const { return rows_ * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double &operator()(int64_t r, int64_t c) { return data_[r * cols_ + c]; }
  double operator()(int64_t r, int64_t c) const { return data_[r * cols_ + c]; }

  double *row(int64_t r) { return data_.data() + r * cols_; }
  const double *row(int64_t r) const { return data_.data() + r * cols_; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

  void fill(double v);
  void set_zero() { fill(0.0); }

  bool same_shape(const Tensor &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B.  Throws ShapeError on inner-dim mismatch.
Tensor matmul(const Tensor &a, const Tensor &b);
// C = A^T * B (A: m x k, B: m x n, C: k x n).
Tensor matmul_tn(const Tensor &a, const Tensor &b);
// C = A * B^T (A: m x k, B: n x k, C: m x n).
Tensor matmul_nt(const Tensor &a, const Tensor &b);

// a += b (same shape).
void add_inplace(Tensor &a, const Tensor &b);
// a += s * b.
void add_scaled_inplace(Tensor &a, const Tensor &b, double s);
// a *= s.
void scale_inplace(Tensor &a, double s);

// Stack b below a (same cols; either may be empty).
Tensor vstack(const Tensor &a, const Tensor &b);
// Rows [r0, r1) of x as a copy.
Tensor slice_rows(const Tensor &x, int64_t r0, int64_t r1);

// Sum of squares of all entries.
double sum_squares(const Tensor &x);

bool all_finite(const Tensor &x);

// Throws NumericError naming `what` if x holds a NaN/Inf.
void check_finite(const Tensor &x, const std::string &what);

}  // namespace udac

#endif  // UDAC_TENSOR_H_
