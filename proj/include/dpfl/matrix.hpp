// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major matrix of doubles and the handful of kernels the rest of
// the simulator is written against.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dpfl {

class Matrix {
 public:
  /// Empty 0x0 placeholder; every sized matrix has rows, cols >= 1.
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::string shape_string() const;
  bool all_finite() const noexcept;

  Matrix transpose() const;
  /// Columns [0, count).
  Matrix leading_columns(std::size_t count) const;
  /// Rows [0, count).
  Matrix leading_rows(std::size_t count) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

namespace kernels {

/// Single-threaded i-k-j product. Kept as the reference the parallel
/// kernel is checked against bit-for-bit.
Matrix matmul_serial(const Matrix& a, const Matrix& b);

/// OpenMP product, parallel over output rows. Each output entry is
/// accumulated in the same order as matmul_serial, so results are
/// independent of the thread count.
Matrix matmul_parallel(const Matrix& a, const Matrix& b);

}  // namespace kernels

/// a * b. Dispatches to the parallel kernel above a size threshold.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix kronecker(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Adds `bias` (rows x 1) to every column of `m`.
void add_column_broadcast(Matrix& m, const Matrix& bias);
/// Sum over columns; result is rows x 1.
Matrix row_sums(const Matrix& m);

double l2_norm(std::span<const double> v);
double l1_norm(std::span<const double> v);

}  // namespace dpfl
