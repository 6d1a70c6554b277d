// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed) ^ mix64(stream ^ kGolden))) {}

RandomSource RandomSource::derive(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t id = mix64(stream_ + 0x632BE59BD9B4E019ULL);
  for (std::uint64_t p : path) id = mix64(id ^ mix64(p));
  return RandomSource(seed_, id);
}

RandomSource RandomSource::derive(Purpose purpose, std::initializer_list<std::uint64_t> path) const {
  std::uint64_t id = mix64(stream_ ^ mix64(static_cast<std::uint64_t>(purpose) * kGolden));
  for (std::uint64_t p : path) id = mix64(id ^ mix64(p));
  return RandomSource(seed_, id);
}

RandomSource::result_type RandomSource::operator()() {
  return mix64(key_ + (counter_++) * kGolden);
}

double RandomSource::uniform_open_closed() {
  // 53 random mantissa bits mapped onto (0, 1].
  return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
}

double draw_gaussian(RandomSource& source, double mean, double stddev) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev)) {
    throw ParameterError("gaussian: stddev must be finite and >= 0");
  }
  if (stddev == 0.0) return mean;
  std::normal_distribution<double> dist(mean, stddev);
  return dist(source);
}

Matrix draw_gaussian(RandomSource& source, double mean, double stddev, std::size_t rows,
                     std::size_t cols) {
  return Matrix(rows, cols, draw_gaussian_vector(source, mean, stddev, rows * cols));
}

std::vector<double> draw_gaussian_vector(RandomSource& source, double mean, double stddev,
                                         std::size_t n) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev)) {
    throw ParameterError("gaussian: stddev must be finite and >= 0");
  }
  std::vector<double> out(n, mean);
  if (stddev == 0.0) return out;
  std::normal_distribution<double> dist(mean, stddev);
  for (double& v : out) v = dist(source);
  return out;
}

std::int64_t draw_uniform_int(RandomSource& source, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw ParameterError("uniform-int: lo > hi");
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(source);
}

double draw_gamma(RandomSource& source, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw ParameterError("gamma: shape must be > 0");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(source);
}

std::vector<double> draw_dirichlet(RandomSource& source, double alpha, std::size_t k) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("dirichlet: alpha must be > 0");
  if (k == 0) throw ParameterError("dirichlet: k must be >= 1");
  // log Gamma(alpha) = log Gamma(alpha + 1) + log(U) / alpha.
  std::gamma_distribution<double> dist(alpha + 1.0, 1.0);
  std::vector<double> logs(k);
  for (double& l : logs) {
    const double g = dist(source);
    const double u = source.uniform_open_closed();
    l = std::log(g) + std::log(u) / alpha;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    total += l;
  }
  for (double& l : logs) l /= total;
  return logs;
}

bool draw_bernoulli(RandomSource& source, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("bernoulli: p must be in [0, 1]");
  if (p == 1.0) return true;
  if (p == 0.0) return false;
  return source.uniform_open_closed() <= p;
}

}  // namespace dpfl
