// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/secure_sum.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <omp.h>

#include "dpfl/errors.hpp"
#include "dpfl/privacy.hpp"

namespace dpfl {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6E6F697365ULL;

void check_lengths(std::span<const std::vector<double>> contributions) {
  if (contributions.empty()) throw ProtocolError("secure sum: no contributions");
  const std::size_t dim = contributions.front().size();
  for (std::size_t i = 1; i < contributions.size(); ++i) {
    if (contributions[i].size() != dim) {
      throw ProtocolError("secure sum: contribution " + std::to_string(i) + " has length " +
                          std::to_string(contributions[i].size()) + ", expected " +
                          std::to_string(dim));
    }
  }
}

std::vector<std::size_t> resolve_ids(std::span<const std::size_t> ids, std::size_t n) {
  if (ids.empty()) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  if (ids.size() != n) throw ProtocolError("secure sum: one client id per contribution required");
  return {ids.begin(), ids.end()};
}

// Ring-sum overflow guard: the decoded total must stay representable.
void check_range(std::span<const std::vector<double>> contributions,
                 const FixedPointCodec& codec) {
  const std::size_t dim = contributions.front().size();
  for (std::size_t k = 0; k < dim; ++k) {
    double total = 0.0;
    for (const auto& c : contributions) total += std::abs(c[k]);
    if (total >= codec.max_magnitude()) {
      throw ProtocolError("secure sum: coordinate " + std::to_string(k) + " magnitude " +
                          std::to_string(total) + " overflows the fixed-point ring");
    }
  }
}

MaskedShare mask_one(std::span<const std::vector<double>> contributions,
                     std::span<const std::size_t> ids, std::size_t self,
                     const FixedPointCodec& codec, const RandomSource& round_key) {
  MaskedShare share;
  share.client_id = ids[self];
  const auto& x = contributions[self];
  share.masked.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) share.masked[k] = codec.encode(x[k]);
  for (std::size_t other = 0; other < ids.size(); ++other) {
    if (other == self) continue;
    const std::size_t lo = std::min(ids[self], ids[other]);
    const std::size_t hi = std::max(ids[self], ids[other]);
    RandomSource mask = round_key.derive(Purpose::kMask, {lo, hi});
    const bool add = ids[self] == lo;
    for (auto& v : share.masked) {
      const std::uint64_t m = mask();
      v = add ? v + m : v - m;
    }
  }
  return share;
}

}  // namespace

FixedPointCodec::FixedPointCodec(int scale_bits)
    : scale_bits_(scale_bits), scale_(std::ldexp(1.0, scale_bits)) {
  if (scale_bits < 1 || scale_bits > 60) {
    throw ParameterError("codec: scale bits must be in [1, 60]");
  }
}

double FixedPointCodec::max_magnitude() const noexcept { return std::ldexp(1.0, 63 - scale_bits_); }

std::uint64_t FixedPointCodec::encode(double value) const {
  if (!(std::abs(value) < max_magnitude())) {
    throw ProtocolError("codec: value " + std::to_string(value) + " outside ring range");
  }
  return static_cast<std::uint64_t>(std::llround(value * scale_));
}

double FixedPointCodec::decode(std::uint64_t value) const {
  return static_cast<double>(static_cast<std::int64_t>(value)) / scale_;
}

std::vector<MaskedShare> mask_contributions_serial(
    std::span<const std::vector<double>> contributions, std::span<const std::size_t> client_ids,
    const FixedPointCodec& codec, const RandomSource& round_key) {
  check_lengths(contributions);
  const auto ids = resolve_ids(client_ids, contributions.size());
  check_range(contributions, codec);
  std::vector<MaskedShare> shares;
  shares.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    shares.push_back(mask_one(contributions, ids, i, codec, round_key));
  }
  return shares;
}

std::vector<MaskedShare> mask_contributions(std::span<const std::vector<double>> contributions,
                                            std::span<const std::size_t> client_ids,
                                            const FixedPointCodec& codec,
                                            const RandomSource& round_key) {
  check_lengths(contributions);
  const auto ids = resolve_ids(client_ids, contributions.size());
  check_range(contributions, codec);
  std::vector<MaskedShare> shares(ids.size());
  const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(dynamic) if (n > 1 && !omp_in_parallel())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    shares[i] = mask_one(contributions, ids, static_cast<std::size_t>(i), codec, round_key);
  }
  return shares;
}

std::vector<double> unmask_sum(std::span<const MaskedShare> shares, const FixedPointCodec& codec) {
  if (shares.empty()) throw ProtocolError("secure sum: no shares");
  const std::size_t dim = shares.front().masked.size();
  std::vector<std::uint64_t> ring(dim, 0);
  for (const auto& s : shares) {
    if (s.masked.size() != dim) throw ProtocolError("secure sum: share length mismatch");
    for (std::size_t k = 0; k < dim; ++k) ring[k] += s.masked[k];
  }
  std::vector<double> out(dim);
  for (std::size_t k = 0; k < dim; ++k) out[k] = codec.decode(ring[k]);
  return out;
}

std::vector<double> exact_sum(std::span<const std::vector<double>> contributions) {
  check_lengths(contributions);
  std::vector<double> out(contributions.front().size(), 0.0);
  for (const auto& c : contributions) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k];
  }
  return out;
}

std::vector<double> pairwise_mask_sum(std::span<const std::vector<double>> contributions,
                                      const FixedPointCodec& codec,
                                      const RandomSource& round_key,
                                      std::span<const std::size_t> client_ids) {
  const auto shares = mask_contributions(contributions, client_ids, codec, round_key);
  return unmask_sum(shares, codec);
}

std::string_view to_string(AggregationBackend backend) {
  return backend == AggregationBackend::kExact ? "exact" : "masked";
}

std::string_view to_string(NoiseMode mode) {
  return mode == NoiseMode::kCentral ? "central" : "distributed";
}

std::optional<AggregationBackend> parse_backend(std::string_view name) {
  if (name == "exact") return AggregationBackend::kExact;
  if (name == "masked") return AggregationBackend::kMasked;
  return std::nullopt;
}

std::optional<NoiseMode> parse_noise_mode(std::string_view name) {
  if (name == "central") return NoiseMode::kCentral;
  if (name == "distributed" || name == "distributed-shares") return NoiseMode::kDistributed;
  return std::nullopt;
}

std::vector<double> aggregate(std::span<const std::vector<double>> contributions,
                              const SecureSumOptions& options, const RandomSource& round_key,
                              std::span<const std::size_t> client_ids) {
  if (options.backend == AggregationBackend::kExact) return exact_sum(contributions);
  return pairwise_mask_sum(contributions, FixedPointCodec(options.codec_scale_bits), round_key,
                           client_ids);
}

SecureSumResult secure_sum_dp(std::span<const std::vector<double>> contributions, double z,
                              double clip_norm, const SecureSumOptions& options,
                              const RandomSource& round_key,
                              std::span<const std::size_t> client_ids) {
  check_lengths(contributions);
  if (!(z >= 0.0)) throw ParameterError("secure_sum_dp: z must be >= 0");
  if (!(clip_norm > 0.0)) throw ParameterError("secure_sum_dp: S must be > 0");
  const auto ids = resolve_ids(client_ids, contributions.size());
  const std::size_t n = contributions.size();
  const std::size_t dim = contributions.front().size();

  SecureSumResult result;
  result.sigma = z * clip_norm;
  result.pre_clip_norms.resize(n);
  std::vector<std::vector<double>> clipped(contributions.begin(), contributions.end());
  for (std::size_t i = 0; i < n; ++i) {
    result.pre_clip_norms[i] = clip_in_place(clipped[i], clip_norm);
  }

  if (options.noise_mode == NoiseMode::kDistributed && result.sigma > 0.0) {
    const double share_sigma = result.sigma / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      RandomSource noise = round_key.derive(Purpose::kNoise, {kNoiseTag, ids[i]});
      const auto e = gaussian_noise(dim, share_sigma, noise);
      for (std::size_t k = 0; k < dim; ++k) clipped[i][k] += e[k];
    }
  }

  result.sum = aggregate(clipped, options, round_key, ids);

  if (options.noise_mode == NoiseMode::kCentral && result.sigma > 0.0) {
    RandomSource noise = round_key.derive(Purpose::kNoise, {kNoiseTag});
    const auto e = gaussian_noise(dim, result.sigma, noise);
    for (std::size_t k = 0; k < dim; ++k) result.sum[k] += e[k];
  }
  return result;
}

}  // namespace dpfl
