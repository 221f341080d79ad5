// udac/tensor.cc

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

#include "udac/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "udac/error.h"

namespace udac {

Tensor::Tensor(int64_t rows, int64_t cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("Tensor: negative dims " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  data_.assign(static_cast<size_t>(rows * cols), 0.0);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dims differ, lhs is " + a.shape_str() +
                     ", rhs is " + b.shape_str());
  }
  Tensor c(a.rows(), b.cols());
  const int64_t m = a.rows(), k = a.cols(), n = b.cols();
  for (int64_t i = 0; i < m; i++) {
    const double *arow = a.row(i);
    double *crow = c.row(i);
    for (int64_t p = 0; p < k; p++) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double *brow = b.row(p);
      for (int64_t j = 0; j < n; j++) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor &a, const Tensor &b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: row counts differ, lhs is " + a.shape_str() +
                     ", rhs is " + b.shape_str());
  }
  Tensor c(a.cols(), b.cols());
  const int64_t m = a.rows(), k = a.cols(), n = b.cols();
  for (int64_t i = 0; i < m; i++) {
    const double *arow = a.row(i);
    const double *brow = b.row(i);
    for (int64_t p = 0; p < k; p++) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double *crow = c.row(p);
      for (int64_t j = 0; j < n; j++) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor &a, const Tensor &b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: col counts differ, lhs is " + a.shape_str() +
                     ", rhs is " + b.shape_str());
  }
  Tensor c(a.rows(), b.rows());
  const int64_t m = a.rows(), k = a.cols(), n = b.rows();
  for (int64_t i = 0; i < m; i++) {
    const double *arow = a.row(i);
    double *crow = c.row(i);
    for (int64_t j = 0; j < n; j++) {
      const double *brow = b.row(j);
      double s = 0.0;
      for (int64_t p = 0; p < k; p++) s += arow[p] * brow[p];
      crow[j] = s;
    }
  }
  return c;
}

void add_inplace(Tensor &a, const Tensor &b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add_inplace: shapes differ, " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  double *ap = a.data().data();
  const double *bp = b.data().data();
  const int64_t n = a.size();
  for (int64_t i = 0; i < n; i++) ap[i] += bp[i];
}

void add_scaled_inplace(Tensor &a, const Tensor &b, double s) {
  if (!a.same_shape(b)) {
    throw ShapeError("add_scaled_inplace: shapes differ, " + a.shape_str() +
                     " vs " + b.shape_str());
  }
  double *ap = a.data().data();
  const double *bp = b.data().data();
  const int64_t n = a.size();
  for (int64_t i = 0; i < n; i++) ap[i] += s * bp[i];
}

void scale_inplace(Tensor &a, double s) {
  for (double &v : a.data()) v *= s;
}

Tensor vstack(const Tensor &a, const Tensor &b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.cols() != b.cols()) {
    throw ShapeError("vstack: col counts differ, " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  Tensor c(a.rows() + b.rows(), a.cols());
  std::memcpy(c.row(0), a.row(0), sizeof(double) * a.size());
  std::memcpy(c.row(a.rows()), b.row(0), sizeof(double) * b.size());
  return c;
}

Tensor slice_rows(const Tensor &x, int64_t r0, int64_t r1) {
  if (r0 < 0 || r1 < r0 || r1 > x.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(r0) + ", " +
                     std::to_string(r1) + ") out of " + x.shape_str());
  }
  Tensor c(r1 - r0, x.cols());
  if (r1 > r0) {
    std::memcpy(c.row(0), x.row(r0), sizeof(double) * c.size());
  }
  return c;
}

double sum_squares(const Tensor &x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  return s;
}

bool all_finite(const Tensor &x) {
  for (double v : x.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void check_finite(const Tensor &x, const std::string &what) {
  if (!all_finite(x)) {
    throw NumericError("non-finite values in " + what + " (" + x.shape_str() +
                       ")");
  }
}

}  // namespace udac
