// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Simulated secure aggregation. Clients quantize onto Z_{2^64}; every pair
// (i, j), i < j, shares a mask stream keyed by (round key, id_i, id_j);
// i adds the mask, j subtracts it, so the server's sum of masked shares
// equals the sum of the encoded inputs. No real key agreement is done.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "dpfl/random.hpp"

namespace dpfl {

class FixedPointCodec {
 public:
  explicit FixedPointCodec(int scale_bits = 40);

  std::uint64_t encode(double value) const;
  double decode(std::uint64_t value) const;
  double scale() const noexcept { return scale_; }
  /// Worst-case per-coordinate rounding error of one encode.
  double resolution() const noexcept { return 1.0 / scale_; }
  /// Largest magnitude a decoded ring element can represent.
  double max_magnitude() const noexcept;

 private:
  int scale_bits_;
  double scale_;
};

struct MaskedShare {
  std::size_t client_id = 0;
  std::vector<std::uint64_t> masked;
};

/// One masked share per contribution. Parallel over clients.
std::vector<MaskedShare> mask_contributions(std::span<const std::vector<double>> contributions,
                                            std::span<const std::size_t> client_ids,
                                            const FixedPointCodec& codec,
                                            const RandomSource& round_key);
/// Single-threaded reference of mask_contributions.
std::vector<MaskedShare> mask_contributions_serial(
    std::span<const std::vector<double>> contributions, std::span<const std::size_t> client_ids,
    const FixedPointCodec& codec, const RandomSource& round_key);

/// Server side: ring sum of the shares, decoded.
std::vector<double> unmask_sum(std::span<const MaskedShare> shares, const FixedPointCodec& codec);

/// Plain floating-point sum, the reference the protocol is compared with.
std::vector<double> exact_sum(std::span<const std::vector<double>> contributions);

/// Masked protocol end to end. Client ids default to 0..n-1.
std::vector<double> pairwise_mask_sum(std::span<const std::vector<double>> contributions,
                                      const FixedPointCodec& codec,
                                      const RandomSource& round_key,
                                      std::span<const std::size_t> client_ids = {});

enum class AggregationBackend { kExact, kMasked };
enum class NoiseMode { kCentral, kDistributed };

std::string_view to_string(AggregationBackend backend);
std::string_view to_string(NoiseMode mode);
std::optional<AggregationBackend> parse_backend(std::string_view name);
std::optional<NoiseMode> parse_noise_mode(std::string_view name);

struct SecureSumOptions {
  AggregationBackend backend = AggregationBackend::kMasked;
  NoiseMode noise_mode = NoiseMode::kCentral;
  int codec_scale_bits = 40;
};

struct SecureSumResult {
  std::vector<double> sum;
  std::vector<double> pre_clip_norms;
  double sigma = 0.0;
};

/// Clips each contribution to S, sums them through the selected backend
/// and adds N(0, (z S)^2) noise: one draw after decoding (central) or one
/// N(0, (z S)^2 / n) draw per client before encoding (distributed).
SecureSumResult secure_sum_dp(std::span<const std::vector<double>> contributions, double z,
                              double clip_norm, const SecureSumOptions& options,
                              const RandomSource& round_key,
                              std::span<const std::size_t> client_ids = {});

/// Backend sum without clipping or noise (non-private federated averaging).
std::vector<double> aggregate(std::span<const std::vector<double>> contributions,
                              const SecureSumOptions& options, const RandomSource& round_key,
                              std::span<const std::size_t> client_ids = {});

}  // namespace dpfl
