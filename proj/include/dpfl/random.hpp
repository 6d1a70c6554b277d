// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random source. A stream is fully determined by
// (seed, stream id); sub-streams for a round, a client or a purpose are
// derived by hashing a key path into a new stream id, so work split across
// threads draws the same numbers regardless of schedule.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

#include "dpfl/matrix.hpp"

namespace dpfl {

/// Purpose tags used when deriving sub-streams.
enum class Purpose : std::uint64_t {
  kInit = 1,
  kRank = 2,
  kCohort = 3,
  kLocalTraining = 4,
  kNoise = 5,
  kMask = 6,
  kData = 7,
  kPartition = 8,
  kPretrain = 9,
  kShuffle = 10,
};

class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent stream keyed by this stream's id plus `path`.
  RandomSource derive(std::initializer_list<std::uint64_t> path) const;
  RandomSource derive(Purpose purpose, std::initializer_list<std::uint64_t> path = {}) const;

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on (0, 1].
  double uniform_open_closed();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

double draw_gaussian(RandomSource& source, double mean, double stddev);
Matrix draw_gaussian(RandomSource& source, double mean, double stddev, std::size_t rows,
                     std::size_t cols);
std::vector<double> draw_gaussian_vector(RandomSource& source, double mean, double stddev,
                                         std::size_t n);
/// Uniform on the closed range [lo, hi].
std::int64_t draw_uniform_int(RandomSource& source, std::int64_t lo, std::int64_t hi);
/// Symmetric Dirichlet(alpha) over k categories, via normalized Gamma draws
/// carried out in log space so tiny alphas do not underflow to all-zero.
std::vector<double> draw_dirichlet(RandomSource& source, double alpha, std::size_t k);
bool draw_bernoulli(RandomSource& source, double p);
double draw_gamma(RandomSource& source, double shape);

}  // namespace dpfl
