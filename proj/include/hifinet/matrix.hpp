// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major 64-bit real matrices and the plain (value-level) math the
// rest of the project builds on. Differentiable counterparts live in tape.hpp
// and call into these kernels.

#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "hifinet/errors.hpp"

namespace hifinet {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;
  bool is_finite() const;

  void fill(double v);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Value-level kernels. Shape mismatches throw ShapeError naming both operands.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
void add_in_place(Matrix& target, const Matrix& delta);

/// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& m);

/// Per-row standardization (population variance, eps under the root),
/// then y = gain * x_hat + bias. gain/bias are 1 x cols.
Matrix layer_norm(const Matrix& m, const Matrix& gain, const Matrix& bias, double eps);

double sum_all(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

/// Rows rescaled to unit l2 norm; rows with norm below eps are left at the
/// eps-guarded scale (zero rows stay zero).
Matrix row_l2_normalize(const Matrix& m, double eps = 1e-12);

}  // namespace hifinet
