// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Labeled datasets, synthetic task generation, client partitioning and CSV
// ingestion.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpfl/matrix.hpp"
#include "dpfl/random.hpp"

namespace dpfl {

/// Row-major features (one row per sample) with integer labels in
/// [0, class_count).
struct Dataset {
  std::size_t dim = 0;
  std::size_t class_count = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> sample(std::size_t i) const { return {features.data() + i * dim, dim}; }

  void push_back(std::span<const double> x, int label);
  /// Features of the selected samples as a dim x |indices| matrix.
  Matrix columns(std::span<const std::size_t> indices) const;
  /// All samples as a dim x n matrix.
  Matrix columns() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;
  /// Throws DataError on labels outside [0, class_count) or ragged features.
  void validate() const;
};

struct ClientShard {
  std::size_t client_id = 0;
  Dataset data;

  std::size_t sample_count() const noexcept { return data.size(); }
};

/// a(i, j): samples of class i assigned to client j.
struct PartitionMatrix {
  std::size_t classes = 0;
  std::size_t clients = 0;
  std::vector<std::size_t> counts;  // row-major classes x clients

  std::size_t operator()(std::size_t cls, std::size_t client) const {
    return counts[cls * clients + client];
  }
  std::vector<std::size_t> row_sums() const;
  std::vector<std::size_t> column_sums() const;
};

struct Partition {
  std::vector<ClientShard> shards;
  PartitionMatrix matrix;
};

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t per_class = 500;
  /// Standard deviation of each cluster around its mean.
  double spread = 1.0;
  /// Standard deviation of the class means around the origin.
  double separation = 3.0;
};

/// Class cluster means for a spec, deterministic per source.
Matrix synthetic_class_means(const SyntheticSpec& spec, RandomSource& source);

/// Gaussian class clusters. Means come from `means` (classes x dim);
/// samples are drawn isotropically with the spec's spread. Samples are
/// ordered by class.
Dataset generate_synthetic(const SyntheticSpec& spec, const Matrix& means, RandomSource& source);
Dataset generate_synthetic(const SyntheticSpec& spec, RandomSource& source);

/// Per class, Dirichlet(alpha) proportions over `clients`, converted to
/// counts by largest-remainder rounding. Samples of a class are shuffled
/// before assignment.
Partition partition_dirichlet(const Dataset& data, std::size_t clients, double alpha,
                              RandomSource& source);
/// Uniform random split into near-equal shards.
Partition partition_iid(const Dataset& data, std::size_t clients, RandomSource& source);
/// Shards from a per-sample client id (ids are compacted to 0..k-1 in
/// ascending order of the original id).
Partition partition_natural(const Dataset& data, std::span<const long long> client_ids);

/// Random split into (first, second) with `fraction` of samples in second.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          RandomSource& source);

struct CsvSchema {
  std::string label_column = "label";
  /// Empty: no natural client column.
  std::string client_column;
  /// Empty: every column other than label/client is a feature.
  std::vector<std::string> feature_columns;
};

struct CsvDataset {
  Dataset data;
  std::vector<std::string> feature_names;
  /// One id per sample when the schema names a client column.
  std::optional<std::vector<long long>> client_ids;
};

/// Comma-separated numeric CSV with a header row. Labels are integer class
/// indices; class_count is max label + 1.
CsvDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
CsvDataset parse_csv(const std::string& text, const CsvSchema& schema);

}  // namespace dpfl
