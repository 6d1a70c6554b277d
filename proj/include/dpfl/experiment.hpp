// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative experiment description, the runner that turns one into a
// federated run, and the on-disk outputs (rounds.csv, per_rank.csv,
// summary.json, config.resolved.yaml).

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpfl/data.hpp"
#include "dpfl/federation.hpp"
#include "dpfl/model.hpp"
#include "dpfl/peft.hpp"
#include "dpfl/privacy.hpp"

namespace dpfl {

enum class DataSource { kSynthetic, kCsv };
enum class PartitionScheme { kDirichlet, kIid, kNatural };

struct DataSection {
  DataSource source = DataSource::kSynthetic;
  SyntheticSpec synthetic;
  std::filesystem::path csv_path;
  CsvSchema csv_schema;
  PartitionScheme partition = PartitionScheme::kDirichlet;
  double alpha = 0.1;
  /// Ignored for natural partitioning.
  std::size_t clients = 100;
  /// Held-out server evaluation split.
  double test_fraction = 0.2;
};

/// How the frozen base is obtained. Synthetic data pretrains on a related
/// task whose class means are perturbed by `shift`; CSV data pretrains on
/// a held-out `csv_fraction` of the file.
struct PretrainSection {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::size_t per_class = 200;
  double shift = 1.0;
  double csv_fraction = 0.2;
};

struct ModelSection {
  std::vector<std::size_t> hidden{32, 32};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DataSection data;
  PretrainSection pretrain;
  ModelSection model;
  PeftMethod method;
  FederationConfig federation;
  /// Fixed noise multiplier instead of calibrating one.
  std::optional<double> noise_multiplier;
  /// When false, privacy.cohort_small is replaced by the expected simulated
  /// cohort at run time.
  bool explicit_cohort_small = false;
  std::filesystem::path output = "out";
};

/// Parses the YAML dialect documented in docs/configuration.md. Every
/// problem is reported with its key path; throws ConfigError listing all.
ExperimentConfig parse_experiment_config(const std::string& yaml_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Semantic checks after parsing (also run by the parsers).
void validate_experiment_config(const ExperimentConfig& config);
/// YAML text that parses back to an identical config.
std::string dump_experiment_config(const ExperimentConfig& config);

/// Everything a run needs besides the training loop itself.
struct PreparedExperiment {
  FederationTask task;
  /// Pooled client training data.
  Dataset train;
  /// Data the frozen base was pretrained on.
  Dataset pretrain;
  PeftState initial;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config);

struct ExperimentResult {
  ExperimentConfig config;
  FederationResult federation;
  std::uint64_t base_fingerprint = 0;
  std::size_t trainable_parameters = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fixed column order: round,rank,cohort_size,skipped,update_length,
/// norm_min,norm_median,norm_max,sigma,accuracy,loss,best_rank,
/// best_accuracy,cohort. Reals use %.17g; absent values are empty.
std::string format_rounds_csv(const std::vector<RoundRecord>& records);
/// round,rank,accuracy,loss for every dylora per-rank evaluation.
std::string format_per_rank_csv(const std::vector<RoundRecord>& records);
std::string format_summary_json(const ExperimentResult& result);

/// Writes all outputs into `directory` (created if missing).
void write_experiment_outputs(const ExperimentResult& result,
                              const std::filesystem::path& directory);

// ---- grid -----------------------------------------------------------------

struct GridCell {
  std::size_t index = 0;
  /// (dotted key path, YAML scalar) assignments defining the cell.
  std::vector<std::pair<std::string, std::string>> assignments;
  ExperimentConfig config;
  /// Non-empty when this cell's config failed validation; the cell is
  /// reported as failed without running.
  std::string error;
};

struct GridPlan {
  std::vector<GridCell> cells;
  std::vector<std::string> warnings;
};

/// Expands the `sweep:` section (dotted path -> list of values) into the
/// Cartesian product, in declaration order with the last key varying
/// fastest. Duplicate values are dropped with a warning. Cell i uses
/// seed base_seed + i.
GridPlan plan_grid(const std::string& yaml_text);
GridPlan load_grid(const std::filesystem::path& path);

struct GridCellOutcome {
  std::size_t index = 0;
  std::filesystem::path directory;
  bool ok = false;
  std::string error;
};

/// Runs every cell into root/cell-NNNN and writes root/index.csv.
/// `parallel_cells` <= 0 selects the hardware thread count.
std::vector<GridCellOutcome> run_grid(const GridPlan& plan, const std::filesystem::path& root,
                                      int parallel_cells = 0);

}  // namespace dpfl
