// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <numeric>

#include <gtest/gtest.h>
#include <omp.h>

#include "dpfl/errors.hpp"
#include "dpfl/matrix.hpp"
#include "dpfl/random.hpp"
#include "test_support.hpp"

namespace dpfl {
namespace {

Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

TEST(Matrix, RejectsNonFiniteAndZeroSizes) {
  EXPECT_THROW(Matrix(0, 3), ShapeError);
  EXPECT_THROW(Matrix(2, 2, std::nan("")), NumericError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>(3, 1.0)), ShapeError);
  Matrix m(1, 1, 1e308);
  EXPECT_THROW(m *= 10.0, NumericError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix m = Matrix::from_rows({{1.5, -2}, {3, 4.25}});
  EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, HandArithmetic) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{0}, {1}});
  EXPECT_EQ(matmul(a, b), Matrix::from_rows({{2}, {4}}));
}

TEST(Matmul, MatchesTripleLoopOracle) {
  RandomSource src(11);
  const Matrix a = test::random_matrix(src, 5, 3);
  const Matrix b = test::random_matrix(src, 3, 4);
  const Matrix c = matmul(a, b);
  const Matrix ref = naive_product(a, b);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c(i, j), ref(i, j), 1e-12);
  }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, Associativity) {
  RandomSource src(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = test::random_matrix(src, 4, 6);
    const Matrix b = test::random_matrix(src, 6, 3);
    const Matrix c = test::random_matrix(src, 3, 5);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    const double scale = std::max(1.0, l2_norm(left.data()));
    EXPECT_LE(l2_norm((left - right).data()) / scale, 1e-9);
  }
}

TEST(Matmul, ParallelKernelIsBitIdenticalToSerial) {
  RandomSource src(13);
  const Matrix a = test::random_matrix(src, 97, 131);
  const Matrix b = test::random_matrix(src, 131, 77);
  const Matrix serial = kernels::matmul_serial(a, b);
  for (int threads : {1, 2, 8}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(kernels::matmul_parallel(a, b), serial) << threads << " threads";
  }
  EXPECT_EQ(matmul(a, b), serial);
}

TEST(Kronecker, IdentityAndHandExamples) {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(kronecker(Matrix::identity(1), m), m);
  EXPECT_EQ(kronecker(Matrix::identity(2), Matrix::from_rows({{5}})),
            Matrix::from_rows({{5, 0}, {0, 5}}));
}

TEST(Kronecker, MatchesBlockExpansionOracle) {
  RandomSource src(14);
  const Matrix a = test::random_matrix(src, 2, 2);
  const Matrix b = test::random_matrix(src, 3, 2);
  const Matrix k = kronecker(a, b);
  ASSERT_EQ(k.rows(), 6u);
  ASSERT_EQ(k.cols(), 4u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 2; ++q)
          EXPECT_NEAR(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q), 1e-12);
}

TEST(Kronecker, ShapeLaw) {
  RandomSource src(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r1 = static_cast<std::size_t>(draw_uniform_int(src, 1, 4));
    const auto c1 = static_cast<std::size_t>(draw_uniform_int(src, 1, 4));
    const auto r2 = static_cast<std::size_t>(draw_uniform_int(src, 1, 4));
    const auto c2 = static_cast<std::size_t>(draw_uniform_int(src, 1, 4));
    const Matrix k = kronecker(Matrix(r1, c1, 1.0), Matrix(r2, c2, 1.0));
    EXPECT_EQ(k.rows(), r1 * r2);
    EXPECT_EQ(k.cols(), c1 * c2);
  }
}

TEST(Hadamard, Examples) {
  const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(hadamard(m, Matrix(2, 2, 1.0)), m);
  EXPECT_EQ(hadamard(m, Matrix(2, 2, 0.0)), Matrix(2, 2, 0.0));
  EXPECT_EQ(hadamard(m, Matrix(2, 2, 2.0)), Matrix::from_rows({{2, 4}, {6, 8}}));
  EXPECT_THROW(hadamard(m, Matrix(2, 3)), ShapeError);
}

TEST(Norms, Examples) {
  EXPECT_EQ(l2_norm(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(l2_norm(std::vector<double>{3, 4}), 5.0);
  const std::vector<double> v(250000, 0.01);
  EXPECT_NEAR(l2_norm(v), 5.0, 1e-9);
  EXPECT_NEAR(l1_norm(v), 2500.0, 1e-6);
}

TEST(Norms, ScaleLaw) {
  RandomSource src(16);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = draw_gaussian_vector(src, 0.0, 1.0, 50);
    const double c = draw_gaussian(src, 0.0, 3.0);
    const double n = l2_norm(v);
    for (double& x : v) x *= c;
    EXPECT_NEAR(l2_norm(v), std::abs(c) * n, 1e-12 * std::max(1.0, std::abs(c) * n));
  }
}

TEST(Random, SameKeySameSequence) {
  RandomSource a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs = differs || x != c();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(RandomSource(1).derive(Purpose::kNoise, {3, 4})(),
            RandomSource(1).derive(Purpose::kNoise, {3, 4})());
  EXPECT_NE(RandomSource(1).derive(Purpose::kNoise, {3, 4})(),
            RandomSource(1).derive(Purpose::kMask, {3, 4})());
}

TEST(Random, DegenerateGaussianIsExactlyTheMean) {
  RandomSource src(1);
  EXPECT_EQ(draw_gaussian(src, 0.0, 0.0), 0.0);
  EXPECT_EQ(draw_gaussian(src, 2.5, 0.0), 2.5);
}

TEST(Random, InvalidParametersAreRejected) {
  RandomSource src(1);
  EXPECT_THROW(draw_gaussian(src, 0.0, -1.0), ParameterError);
  EXPECT_THROW(draw_uniform_int(src, 2, 1), ParameterError);
  EXPECT_THROW(draw_dirichlet(src, 0.0, 3), ParameterError);
  EXPECT_THROW(draw_bernoulli(src, 1.5), ParameterError);
}

TEST(Random, DirichletSumsToOne) {
  RandomSource src(2);
  for (double alpha : {0.001, 0.1, 1.0, 1000.0}) {
    for (int i = 0; i < 100; ++i) {
      const auto p = draw_dirichlet(src, alpha, 10);
      EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
      for (double x : p) EXPECT_GE(x, 0.0);
    }
  }
}

TEST(Random, DirichletNearUniformForLargeAlpha) {
  RandomSource src(3);
  std::vector<double> mean(10, 0.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = draw_dirichlet(src, 1000.0, 10);
    for (std::size_t k = 0; k < 10; ++k) mean[k] += p[k] / 1000.0;
  }
  for (double m : mean) EXPECT_NEAR(m, 0.1, 0.05);
}

TEST(Random, UniformIntFrequencies) {
  RandomSource src(4);
  const int n = 100000;
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < n; ++i) ++counts[draw_uniform_int(src, 1, 16)];
  ASSERT_EQ(counts.size(), 16u);
  const double p = 1.0 / 16.0;
  const double se = std::sqrt(p * (1 - p) / n);
  for (const auto& [value, c] : counts) {
    EXPECT_GE(value, 1);
    EXPECT_LE(value, 16);
    EXPECT_NEAR(static_cast<double>(c) / n, p, 3 * se) << value;
  }
}

TEST(Random, GaussianMoments) {
  RandomSource src(5);
  const auto v = draw_gaussian_vector(src, 0.0, 1.0, 1000000);
  double mean = 0.0, sq = 0.0;
  for (double x : v) {
    mean += x;
    sq += x * x;
  }
  mean /= v.size();
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(std::sqrt(sq / v.size() - mean * mean), 1.0, 0.005);
}

TEST(Random, BernoulliEndpoints) {
  RandomSource src(6);
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(draw_bernoulli(src, 0.0));
    EXPECT_TRUE(draw_bernoulli(src, 1.0));
  }
}

}  // namespace
}  // namespace dpfl
