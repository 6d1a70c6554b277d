// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

// Fisher-Yates on indices, then the last `fraction` of them are held out.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, RandomSource& source) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw_uniform_int(source, 0, static_cast<std::int64_t>(i - 1)));
    std::swap(idx[i - 1], idx[j]);
  }
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> second(idx.end() - static_cast<std::ptrdiff_t>(held), idx.end());
  idx.resize(n - held);
  std::sort(idx.begin(), idx.end());
  std::sort(second.begin(), second.end());
  return {idx, second};
}

std::vector<long long> pick(const std::vector<long long>& v, const std::vector<std::size_t>& idx) {
  std::vector<long long> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  validate_experiment_config(config);
  const RandomSource root(config.seed);
  const auto& d = config.data;
  PreparedExperiment prep;

  Dataset pool;
  std::optional<std::vector<long long>> client_ids;
  if (d.source == DataSource::kSynthetic) {
    RandomSource ms = root.derive(Purpose::kData, {0});
    const Matrix means = synthetic_class_means(d.synthetic, ms);
    RandomSource ds = root.derive(Purpose::kData, {1});
    pool = generate_synthetic(d.synthetic, means, ds);

    // Related pretraining task: same classes, displaced cluster centers.
    RandomSource shift_source = root.derive(Purpose::kPretrain, {0});
    Matrix shifted = means;
    shifted += draw_gaussian(shift_source, 0.0, config.pretrain.shift, means.rows(), means.cols());
    SyntheticSpec pre_spec = d.synthetic;
    pre_spec.per_class = config.pretrain.per_class;
    RandomSource ps = root.derive(Purpose::kPretrain, {1});
    prep.pretrain = generate_synthetic(pre_spec, shifted, ps);
  } else {
    auto csv = load_csv(d.csv_path, d.csv_schema);
    pool = std::move(csv.data);
    client_ids = std::move(csv.client_ids);
    if (config.pretrain.csv_fraction > 0.0) {
      RandomSource ps = root.derive(Purpose::kPretrain, {0});
      auto [keep, held] = split_indices(pool.size(), config.pretrain.csv_fraction, ps);
      prep.pretrain = pool.subset(held);
      if (client_ids) client_ids = pick(*client_ids, keep);
      pool = pool.subset(keep);
    }
  }
  if (pool.empty()) throw DataError("experiment: no samples left for training");

  RandomSource ts = root.derive(Purpose::kData, {2});
  auto [train_idx, test_idx] = split_indices(pool.size(), d.test_fraction, ts);
  prep.task.test = pool.subset(test_idx);
  prep.train = pool.subset(train_idx);
  if (client_ids) client_ids = pick(*client_ids, train_idx);

  RandomSource part = root.derive(Purpose::kPartition);
  Partition partition;
  switch (d.partition) {
    case PartitionScheme::kDirichlet:
      partition = partition_dirichlet(prep.train, d.clients, d.alpha, part);
      break;
    case PartitionScheme::kIid:
      partition = partition_iid(prep.train, d.clients, part);
      break;
    case PartitionScheme::kNatural:
      if (!client_ids) throw ConfigError({"data.csv.client_column: required for natural partitioning"});
      partition = partition_natural(prep.train, *client_ids);
      break;
  }
  prep.task.clients.reserve(partition.shards.size());
  for (auto& shard : partition.shards) prep.task.clients.push_back(std::move(shard.data));

  const std::size_t input_dim = pool.dim;
  RandomSource bs = root.derive(Purpose::kPretrain, {2});
  if (prep.pretrain.empty()) {
    prep.task.base = std::make_shared<const FrozenBase>(
        make_random_base(input_dim, config.model.hidden, pool.class_count, bs));
  } else {
    PretrainOptions po;
    po.input_dim = input_dim;
    po.hidden = config.model.hidden;
    po.epochs = config.pretrain.epochs;
    po.batch_size = config.pretrain.batch_size;
    po.learning_rate = config.pretrain.learning_rate;
    prep.task.base = std::make_shared<const FrozenBase>(pretrain_base(prep.pretrain, po, bs));
  }

  RandomSource is = root.derive(Purpose::kInit);
  prep.initial = init_peft(config.method, prep.task.base->layers, is);
  return prep;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = config;
  PreparedExperiment prep = prepare_experiment(config);

  auto& fed = res.config.federation;
  if (fed.is_private()) {
    auto& privacy = *fed.privacy;
    privacy.rounds = fed.rounds;
    if (!res.config.explicit_cohort_small) {
      privacy.cohort_small = fed.expected_cohort(prep.task.clients.size());
      res.config.explicit_cohort_small = true;
    }
    if (privacy.cohort_small > privacy.cohort_large) {
      throw ConfigError({"privacy.cohort_large: smaller than the simulated cohort (" +
                         real(privacy.cohort_small) + ")"});
    }
    res.warnings = privacy.warnings();
  }
  res.trainable_parameters = prep.initial.parameter_count();
  res.base_fingerprint = prep.task.base->fingerprint();
  res.federation = run_federation(prep.task, fed, std::move(prep.initial), RandomSource(config.seed),
                                  config.noise_multiplier);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

std::string format_rounds_csv(const std::vector<RoundRecord>& records) {
  std::string out =
      "round,rank,cohort_size,skipped,update_length,norm_min,norm_median,norm_max,sigma,"
      "accuracy,loss,best_rank,best_accuracy,cohort,client_ranks\n";
  auto ids = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(v[i]);
    }
    return s;
  };
  for (const auto& r : records) {
    out += std::to_string(r.round);
    out += ',';
    if (r.rank) out += std::to_string(*r.rank);
    out += ',' + std::to_string(r.cohort.size());
    out += r.skipped ? ",1," : ",0,";
    out += std::to_string(r.update_length);
    out += ',' + real(r.norm_min) + ',' + real(r.norm_median) + ',' + real(r.norm_max);
    out += ',' + real(r.sigma) + ',';
    if (r.metrics) {
      out += real(r.metrics->accuracy) + ',' + real(r.metrics->loss) + ',';
      if (r.metrics->best_rank) out += std::to_string(*r.metrics->best_rank);
      out += ',' + real(r.metrics->best_accuracy);
    } else {
      out += ",,,";
    }
    out += ',' + ids(r.cohort) + ',' + ids(r.client_ranks) + '\n';
  }
  return out;
}

std::string format_per_rank_csv(const std::vector<RoundRecord>& records) {
  std::string out = "round,rank,accuracy,loss\n";
  for (const auto& r : records) {
    if (!r.metrics) continue;
    for (const auto& m : r.metrics->per_rank) {
      out += std::to_string(r.round) + ',' + std::to_string(m.rank) + ',' + real(m.accuracy) + ',' +
             real(m.loss) + '\n';
    }
  }
  return out;
}

std::string format_summary_json(const ExperimentResult& result) {
  using nlohmann::ordered_json;
  const auto& cfg = result.config;
  const auto& fed = result.federation;
  ordered_json j;
  j["algorithm"] = to_string(cfg.federation.algorithm);
  j["method"] = to_string(cfg.method.kind);
  j["seed"] = cfg.seed;
  j["rounds"] = cfg.federation.rounds;
  j["rounds_executed"] = fed.records.size();
  std::size_t skipped = 0;
  for (const auto& r : fed.records) skipped += r.skipped ? 1 : 0;
  j["skipped_rounds"] = skipped;
  j["trainable_parameters"] = result.trainable_parameters;

  const RoundMetrics* last = nullptr;
  for (const auto& r : fed.records) {
    if (r.metrics) last = &*r.metrics;
  }
  j["final_accuracy"] = last ? ordered_json(last->accuracy) : ordered_json();
  j["final_loss"] = last ? ordered_json(last->loss) : ordered_json();
  if (last && last->best_rank) {
    j["best_rank"] = *last->best_rank;
    j["best_rank_accuracy"] = last->best_accuracy;
  } else {
    j["best_rank"] = nullptr;
    j["best_rank_accuracy"] = nullptr;
  }

  if (cfg.federation.is_private()) {
    const auto& p = *cfg.federation.privacy;
    j["epsilon_spent"] = fed.spent ? fed.spent->epsilon : 0.0;
    j["epsilon_order"] = fed.spent ? fed.spent->order : 0.0;
    j["epsilon_budget"] = p.epsilon;
    j["delta"] = p.delta;
    j["sampling_rate"] = p.sampling_rate;
    j["noise_multiplier"] = fed.noise_multiplier;
    j["sigma"] = fed.sigma;
    j["clip_norm"] = p.clip_norm;
    j["cohort_small"] = p.cohort_small;
    j["cohort_large"] = p.cohort_large;
  } else {
    for (const char* k : {"epsilon_spent", "epsilon_order", "epsilon_budget", "delta",
                          "sampling_rate", "noise_multiplier", "sigma"}) {
      j[k] = nullptr;
    }
  }
  char fp[20];
  std::snprintf(fp, sizeof fp, "%016" PRIx64, result.base_fingerprint);
  j["base_fingerprint"] = fp;
  j["warnings"] = result.warnings;
  j["wall_seconds"] = result.wall_seconds;
  return j.dump(2) + "\n";
}

void write_experiment_outputs(const ExperimentResult& result,
                              const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  write_file(directory / "rounds.csv", format_rounds_csv(result.federation.records));
  if (result.config.method.kind == PeftKind::kDyLora) {
    write_file(directory / "per_rank.csv", format_per_rank_csv(result.federation.records));
  }
  write_file(directory / "summary.json", format_summary_json(result));
  write_file(directory / "config.resolved.yaml", dump_experiment_config(result.config));
}

}  // namespace dpfl
