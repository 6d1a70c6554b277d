// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/matrix.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <omp.h>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWorkThreshold = 1u << 16;

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) {
    throw NumericError(std::string(op) + ": result contains NaN or Inf");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

void require_product_shape(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " + b.shape_string());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("Matrix: dimensions must be positive, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  if (!std::isfinite(fill)) throw NumericError("Matrix: non-finite fill value");
  data_.assign(rows * cols, fill);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("Matrix: dimensions must be positive, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values do not fill " +
                     shape_string());
  }
  require_finite(*this, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Matrix Matrix::leading_columns(std::size_t count) const {
  if (count == 0 || count > cols_) {
    throw ShapeError("leading_columns: " + std::to_string(count) + " out of range for " +
                     shape_string());
  }
  Matrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, j);
  }
  return out;
}

Matrix Matrix::leading_rows(std::size_t count) const {
  if (count == 0 || count > rows_) {
    throw ShapeError("leading_rows: " + std::to_string(count) + " out of range for " +
                     shape_string());
  }
  return Matrix(count, cols_,
                std::vector<double>(data_.begin(), data_.begin() + count * cols_));
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  require_finite(*this, "operator+=");
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  require_finite(*this, "operator-=");
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  require_finite(*this, "operator*=");
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

namespace kernels {

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  require_product_shape(a, b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      for (std::size_t j = 0; j < m; ++j) c(i, j) += aip * b(p, j);
    }
  }
  require_finite(c, "matmul");
  return c;
}

Matrix matmul_parallel(const Matrix& a, const Matrix& b) {
  require_product_shape(a, b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* crow = pc + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  require_finite(c, "matmul");
  return c;
}

}  // namespace kernels

Matrix matmul(const Matrix& a, const Matrix& b) {
  const std::size_t work = a.rows() * a.cols() * b.cols();
  if (work >= kParallelWorkThreshold && a.rows() > 1 && !omp_in_parallel()) {
    return kernels::matmul_parallel(a, b);
  }
  return kernels::matmul_serial(a, b);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  if (a.rows() != 0 && b.rows() > kMax / a.rows()) throw ShapeError("kronecker: row overflow");
  if (a.cols() != 0 && b.cols() > kMax / a.cols()) throw ShapeError("kronecker: column overflow");
  const std::size_t rows = a.rows() * b.rows();
  const std::size_t cols = a.cols() * b.cols();
  if (cols != 0 && rows > kMax / cols / sizeof(double)) {
    throw ShapeError("kronecker: result " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " is too large");
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double s = a(i, j);
      for (std::size_t p = 0; p < b.rows(); ++p) {
        for (std::size_t q = 0; q < b.cols(); ++q) {
          out(i * b.rows() + p, j * b.cols() + q) = s * b(p, q);
        }
      }
    }
  }
  require_finite(out, "kronecker");
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  auto od = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] *= bd[i];
  require_finite(out, "hadamard");
  return out;
}

void add_column_broadcast(Matrix& m, const Matrix& bias) {
  if (bias.rows() != m.rows() || bias.cols() != 1) {
    throw ShapeError("add_column_broadcast: bias " + bias.shape_string() + " does not fit " +
                     m.shape_string());
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double b = bias(i, 0);
    for (double& v : m.row(i)) v += b;
  }
}

Matrix row_sums(const Matrix& m) {
  Matrix out(m.rows(), 1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v;
    out(i, 0) = s;
  }
  return out;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace dpfl
