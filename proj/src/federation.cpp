// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/federation.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>

#include <omp.h>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::kFedAvg, "fedavg"},
    {Algorithm::kDpFedAvg, "dp-fedavg"},
    {Algorithm::kDpPeft, "dp-peft"},
    {Algorithm::kDpDyLora, "dp-dylora"},
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& a : kAlgorithmNames) {
    if (a.algorithm == algorithm) return a.name;
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& a : kAlgorithmNames) {
    if (a.name == name) return a.algorithm;
  }
  return std::nullopt;
}

std::size_t FederationConfig::resolved_eval_interval(const PeftMethod& method) const noexcept {
  if (eval_interval > 0) return eval_interval;
  return method.kind == PeftKind::kDyLora ? 10 : 1;
}

double FederationConfig::expected_cohort(std::size_t clients) const noexcept {
  return sampling == CohortSampling::kFixedSize ? static_cast<double>(cohort_size)
                                                : sampling_rate * static_cast<double>(clients);
}

void FederationConfig::validate(const PeftMethod& method, std::size_t clients) const {
  method.validate();
  if (clients < 1) throw ConfigurationError("federation: no clients");
  if (rounds < 1) throw ConfigurationError("federation: rounds must be >= 1");
  if (sampling == CohortSampling::kPoisson && !(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw ConfigurationError("federation: sampling rate must be in (0, 1]");
  }
  if (sampling == CohortSampling::kFixedSize && (cohort_size < 1 || cohort_size > clients)) {
    throw ConfigurationError("federation: cohort size must be in [1, clients]");
  }
  if (local.epochs < 1) throw ConfigurationError("federation: local epochs must be >= 1");
  if (local.batch_size < 1) throw ConfigurationError("federation: batch size must be >= 1");
  if (!(local.learning_rate >= 0.0)) {
    throw ConfigurationError("federation: learning rate must be >= 0");
  }
  if (is_private()) {
    if (!privacy) throw ConfigurationError("federation: private algorithm without privacy config");
    privacy->validate();
  }
  if (algorithm == Algorithm::kDpFedAvg && method.kind != PeftKind::kFull) {
    throw ConfigurationError("federation: dp-fedavg trains the full model (method must be full)");
  }
  if (algorithm == Algorithm::kDpDyLora && method.kind != PeftKind::kDyLora) {
    throw ConfigurationError("federation: dp-dylora requires method dylora");
  }
}

std::vector<std::size_t> sample_cohort(std::size_t population, double q, RandomSource& source) {
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("sample_cohort: q must be in (0, 1]");
  std::vector<std::size_t> cohort;
  for (std::size_t k = 0; k < population; ++k) {
    if (draw_bernoulli(source, q)) cohort.push_back(k);
  }
  return cohort;
}

std::vector<std::size_t> sample_fixed_cohort(std::size_t population, std::size_t n,
                                             RandomSource& source) {
  if (n > population) throw ParameterError("sample_fixed_cohort: n exceeds population");
  // Partial Fisher-Yates.
  std::vector<std::size_t> ids(population);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(
        draw_uniform_int(source, static_cast<std::int64_t>(i),
                         static_cast<std::int64_t>(population - 1)));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());
  return ids;
}

RoundMetrics evaluate_round(const FederationTask& task, const PeftState& state,
                            std::size_t round) {
  RoundMetrics m;
  const ModelSnapshot snapshot{task.base, state, round};
  const auto full = evaluate(snapshot, task.test);
  m.accuracy = full.accuracy;
  m.loss = full.loss;
  if (state.method.kind == PeftKind::kDyLora) {
    for (std::size_t r = state.method.min_rank; r <= state.method.max_rank; ++r) {
      const auto e = evaluate(snapshot, task.test, r);
      m.per_rank.push_back({r, e.accuracy, e.loss});
      if (!m.best_rank || e.accuracy > m.best_accuracy) {
        m.best_rank = r;
        m.best_accuracy = e.accuracy;
      }
    }
  } else {
    m.best_accuracy = m.accuracy;
  }
  return m;
}

RoundOutcome run_round(const FederationTask& task, const FederationConfig& config,
                       const PeftState& global, std::size_t round, double sigma,
                       const RandomSource& run_key) {
  const auto started = std::chrono::steady_clock::now();
  const PeftMethod& method = global.method;
  const bool dylora = method.kind == PeftKind::kDyLora;
  const bool per_client = dylora && config.rank_sampling == RankSampling::kPerClient;

  RoundOutcome out{global, {}};
  RoundRecord& rec = out.record;
  rec.round = round;
  rec.sigma = config.is_private() ? sigma : 0.0;

  std::optional<std::size_t> rank;
  if (dylora && !per_client) {
    RandomSource rs = run_key.derive(Purpose::kRank, {round});
    rank = static_cast<std::size_t>(draw_uniform_int(rs, static_cast<std::int64_t>(method.min_rank),
                                                     static_cast<std::int64_t>(method.max_rank)));
    rec.rank = rank;
  }

  RandomSource cs = run_key.derive(Purpose::kCohort, {round});
  rec.cohort = config.sampling == CohortSampling::kFixedSize
                   ? sample_fixed_cohort(task.clients.size(), config.cohort_size, cs)
                   : sample_cohort(task.clients.size(), config.sampling_rate, cs);

  const std::size_t n = rec.cohort.size();
  if (n == 0) {
    rec.skipped = true;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
  }

  if (per_client) {
    rec.client_ranks.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      RandomSource rs = run_key.derive(Purpose::kRank, {round, rec.cohort[i]});
      rec.client_ranks[i] = static_cast<std::size_t>(
          draw_uniform_int(rs, static_cast<std::int64_t>(method.min_rank),
                           static_cast<std::int64_t>(method.max_rank)));
    }
  }

  // Clients train independently; results land at their cohort position so
  // the outcome does not depend on scheduling.
  const ModelSnapshot snapshot{task.base, global, round};
  std::vector<LocalUpdate> updates(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      const std::size_t client = rec.cohort[i];
      RandomSource ls = run_key.derive(Purpose::kLocalTraining, {round, client});
      const auto client_rank = per_client ? std::optional<std::size_t>(rec.client_ranks[i]) : rank;
      updates[i] = local_sgd(snapshot, task.clients[client], config.local, client_rank, ls);
    } catch (...) {
#pragma omp critical(dpfl_round_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Local training only touches the active coordinates. Non-private rounds
  // transmit just those; private rounds send the whole vector so that every
  // coordinate receives noise.
  auto coords = active_coordinates(global, rank);
  rec.update_length = coords.size();
  if (config.is_private()) {
    coords.resize(global.parameter_count());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
  }
  std::vector<std::vector<double>> sent(n, std::vector<double>(coords.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < coords.size(); ++k) sent[i][k] = updates[i].delta[coords[k]];
  }

  const RandomSource round_key = run_key.derive({round});
  std::vector<double> sum;
  std::vector<double> norms;
  if (config.is_private()) {
    const double clip = config.privacy->clip_norm;
    auto result = secure_sum_dp(sent, sigma / clip, clip, config.aggregation, round_key, rec.cohort);
    sum = std::move(result.sum);
    norms = std::move(result.pre_clip_norms);
  } else {
    sum = aggregate(sent, config.aggregation, round_key, rec.cohort);
    for (const auto& v : sent) norms.push_back(l2_norm(v));
  }
  rec.norm_min = *std::min_element(norms.begin(), norms.end());
  rec.norm_max = *std::max_element(norms.begin(), norms.end());
  rec.norm_median = median(norms);

  std::vector<double> step(global.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < coords.size(); ++k) step[coords[k]] = sum[k] * inv_n;
  add_flat(out.state, step);

  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

FederationResult run_federation(const FederationTask& task, const FederationConfig& config,
                                PeftState initial, const RandomSource& run_key,
                                std::optional<double> noise_multiplier) {
  config.validate(initial.method, task.clients.size());
  FederationResult result;
  if (config.is_private()) {
    result.noise_multiplier = noise_multiplier.value_or(calibrate_noise_multiplier(*config.privacy));
    result.sigma = effective_sigma(*config.privacy, result.noise_multiplier);
  }
  const std::size_t eval_every = config.resolved_eval_interval(initial.method);
  PeftState state = std::move(initial);
  result.records.reserve(config.rounds);
  for (std::size_t t = 1; t <= config.rounds; ++t) {
    auto outcome = run_round(task, config, state, t, result.sigma, run_key);
    state = std::move(outcome.state);
    if (state.method.kind == PeftKind::kAdaLora && t % state.method.prune_interval == 0) {
      state = adalora_prune(state, state.method.target_rank);
    }
    if (!task.test.empty() && (t % eval_every == 0 || t == config.rounds)) {
      outcome.record.metrics = evaluate_round(task, state, t);
    }
    result.records.push_back(std::move(outcome.record));
  }
  if (config.is_private()) {
    // Every round is charged, including rounds with an empty cohort.
    result.spent = compute_epsilon(config.privacy->sampling_rate, result.noise_multiplier,
                                   config.rounds, config.privacy->delta);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace dpfl
