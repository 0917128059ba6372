// Copyright (c) 2026 the hifinet authors
// SPDX-License-Identifier: Apache-2.0

#include "hifinet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace hifinet {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("matrix dimensions must be non-negative, got " + shape_str());
  }
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) {
      throw ShapeError("ragged initializer for matrix");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::is_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, lhs " + a.shape_str() +
                     " vs rhs " + b.shape_str());
  }
  Matrix out(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  // i-k-j loop order keeps the inner accesses contiguous.
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* brow = b.data().data() + static_cast<std::size_t>(p) * n;
      double* orow = out.data().data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes disagree, " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}
}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (int i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  for (int i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (int i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

void add_in_place(Matrix& target, const Matrix& delta) {
  require_same_shape(target, delta, "add_in_place");
  for (int i = 0; i < target.size(); ++i) target.data()[i] += delta.data()[i];
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double rowmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) rowmax = std::max(rowmax, m(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      out(i, j) = std::exp(m(i, j) - rowmax);
      sum += out(i, j);
    }
    for (int j = 0; j < m.cols(); ++j) out(i, j) /= sum;
  }
  return out;
}

Matrix layer_norm(const Matrix& m, const Matrix& gain, const Matrix& bias, double eps) {
  const int d = m.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
    throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(d) +
                     ", got " + gain.shape_str() + " and " + bias.shape_str());
  }
  Matrix out(m.rows(), d);
  for (int i = 0; i < m.rows(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += m(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = m(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j) {
      out(i, j) = (m(i, j) - mean) * inv * gain(0, j) + bias(0, j);
    }
  }
  return out;
}

double sum_all(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v;
  return s;
}

double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a.data()[i] - b.data()[i]));
  return s;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

Matrix row_l2_normalize(const Matrix& m, double eps) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < m.cols(); ++j) sq += m(i, j) * m(i, j);
    const double inv = 1.0 / std::max(std::sqrt(sq), eps);
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) * inv;
  }
  return out;
}

}  // namespace hifinet
