// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// The federated training loop: cohort sampling, per-round rank sampling for
// dylora, local training, clipped and noised secure aggregation, and
// server-side averaging.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "dpfl/data.hpp"
#include "dpfl/model.hpp"
#include "dpfl/peft.hpp"
#include "dpfl/privacy.hpp"
#include "dpfl/random.hpp"
#include "dpfl/secure_sum.hpp"

namespace dpfl {

enum class Algorithm { kFedAvg, kDpFedAvg, kDpPeft, kDpDyLora };
enum class CohortSampling { kPoisson, kFixedSize };
/// Who draws the dylora rank: the server once per round, or each client.
/// Only the server mode keeps update lengths equal across the cohort.
enum class RankSampling { kServerPerRound, kPerClient };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct FederationConfig {
  Algorithm algorithm = Algorithm::kFedAvg;
  CohortSampling sampling = CohortSampling::kPoisson;
  /// Simulated per-round inclusion probability (Poisson mode).
  double sampling_rate = 0.1;
  /// Cohort size in fixed-size mode.
  std::size_t cohort_size = 10;
  std::size_t rounds = 100;
  LocalTrainingOptions local;
  /// Required for every algorithm except fedavg.
  std::optional<PrivacyConfig> privacy;
  SecureSumOptions aggregation{AggregationBackend::kExact, NoiseMode::kCentral, 40};
  RankSampling rank_sampling = RankSampling::kServerPerRound;
  /// 0 selects the default: every 10 rounds for dylora, every round otherwise.
  std::size_t eval_interval = 0;

  bool is_private() const noexcept { return algorithm != Algorithm::kFedAvg; }
  std::size_t resolved_eval_interval(const PeftMethod& method) const noexcept;
  /// Expected simulated cohort for a population of `clients`.
  double expected_cohort(std::size_t clients) const noexcept;
  void validate(const PeftMethod& method, std::size_t clients) const;
};

struct RankMetric {
  std::size_t rank = 0;
  double accuracy = 0.0;
  double loss = 0.0;
};

struct RoundMetrics {
  /// At the full stored rank.
  double accuracy = 0.0;
  double loss = 0.0;
  /// dylora only: one entry per rank in [min_rank, max_rank].
  std::vector<RankMetric> per_rank;
  std::optional<std::size_t> best_rank;
  double best_accuracy = 0.0;
};

struct RoundRecord {
  std::size_t round = 0;
  /// Server-sampled dylora rank.
  std::optional<std::size_t> rank;
  std::vector<std::size_t> cohort;
  /// Per-client ranks when rank sampling is per client.
  std::vector<std::size_t> client_ranks;
  double norm_min = 0.0;
  double norm_median = 0.0;
  double norm_max = 0.0;
  double sigma = 0.0;
  /// Length of the vector each client sent.
  std::size_t update_length = 0;
  bool skipped = false;
  std::optional<RoundMetrics> metrics;
  /// Not part of any reproducible output.
  double wall_seconds = 0.0;
};

struct FederationTask {
  std::shared_ptr<const FrozenBase> base;
  std::vector<Dataset> clients;
  Dataset test;
};

/// Poisson sampling: every id in [0, population) independently with
/// probability q. Result is sorted.
std::vector<std::size_t> sample_cohort(std::size_t population, double q, RandomSource& source);
/// Exactly n distinct ids, sorted.
std::vector<std::size_t> sample_fixed_cohort(std::size_t population, std::size_t n,
                                             RandomSource& source);

struct RoundOutcome {
  PeftState state;
  RoundRecord record;
};

/// One round t >= 1. `sigma` is the std of the noise added to the sum
/// (ignored for non-private runs).
RoundOutcome run_round(const FederationTask& task, const FederationConfig& config,
                       const PeftState& global, std::size_t round, double sigma,
                       const RandomSource& run_key);

RoundMetrics evaluate_round(const FederationTask& task, const PeftState& state,
                            std::size_t round);

struct FederationResult {
  PeftState final_state;
  std::vector<RoundRecord> records;
  double noise_multiplier = 0.0;
  double sigma = 0.0;
  std::optional<DpGuarantee> spent;
};

/// Runs config.rounds rounds. For private runs the noise multiplier is
/// calibrated from config.privacy unless given.
FederationResult run_federation(const FederationTask& task, const FederationConfig& config,
                                PeftState initial, const RandomSource& run_key,
                                std::optional<double> noise_multiplier = std::nullopt);

}  // namespace dpfl
