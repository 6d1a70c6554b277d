// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// User-level DP for federated rounds: update clipping, the Gaussian
// mechanism, an RDP accountant for the Poisson-subsampled Gaussian
// mechanism, and noise-multiplier calibration.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpfl/random.hpp"

namespace dpfl {

struct PrivacyConfig {
  double epsilon = 2.0;
  double delta = 1e-6;
  /// Per-round client sampling rate used for accounting.
  double sampling_rate = 0.01;
  std::size_t rounds = 100;
  double clip_norm = 1.0;
  /// Expected cohort actually simulated.
  double cohort_small = 100.0;
  /// Expected production cohort the noise level is calibrated for.
  double cohort_large = 10000.0;
  std::size_t population = 1'000'000;

  /// Throws ParameterError on out-of-domain values.
  void validate() const;
  /// Non-fatal advisories (e.g. delta >= 1/population).
  std::vector<std::string> warnings() const;
};

/// Per-order RDP epsilon, cumulative over the rounds it was composed for.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> epsilons;
};

/// 1.25, 1.5, 1.75, 2..64, 128, 256.
std::vector<double> default_orders();

/// v * min(1, S / ||v||). Returns the pre-clip norm.
double clip_in_place(std::span<double> v, double clip_norm);
std::vector<double> clip_update(std::span<const double> v, double clip_norm);

/// i.i.d. N(0, sigma^2) entries.
std::vector<double> gaussian_noise(std::size_t dim, double sigma, RandomSource& source);

/// RDP of one round of the Poisson-subsampled Gaussian mechanism with noise
/// multiplier z. q = 1 uses the closed form alpha / (2 z^2); otherwise
/// integer orders use the binomial expansion evaluated in log space and a
/// fractional order takes the value at its ceiling integer order.
RdpCurve rdp_of_sampled_gaussian(double q, double z, std::span<const double> orders);
double rdp_sampled_gaussian_integer(double q, double z, std::size_t order);

struct DpGuarantee {
  double epsilon = 0.0;
  double order = 0.0;
};

/// Composes a one-round curve over `rounds` rounds and converts to
/// (epsilon, delta)-DP, minimizing over orders. Negative optima clamp to 0.
DpGuarantee compose_and_convert(const RdpCurve& one_round, std::size_t rounds, double delta);

/// epsilon spent after `rounds` rounds at noise multiplier z.
DpGuarantee compute_epsilon(double q, double z, std::size_t rounds, double delta,
                            std::span<const double> orders);
DpGuarantee compute_epsilon(double q, double z, std::size_t rounds, double delta);

inline constexpr double kMinNoiseMultiplier = 0.3;
inline constexpr double kMaxNoiseMultiplier = 50.0;

/// Smallest z in [0.3, 50] whose epsilon after config.rounds rounds at
/// config.sampling_rate stays within config.epsilon (bisection to 1e-6).
/// Throws CalibrationError if even z = 50 overspends.
double calibrate_noise_multiplier(const PrivacyConfig& config);

/// Noise std for the simulated sum: z S scaled by C_small / C_large. The
/// division by the realized cohort size happens when the server averages.
double effective_sigma(const PrivacyConfig& config, double z);

}  // namespace dpfl
