// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "dpfl/errors.hpp"

namespace dpfl {

void Dataset::push_back(std::span<const double> x, int label) {
  if (x.size() != dim) {
    throw DataError("Dataset::push_back: sample has " + std::to_string(x.size()) +
                    " features, expected " + std::to_string(dim));
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

Matrix Dataset::columns(std::span<const std::size_t> indices) const {
  Matrix out(dim, indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const auto s = sample(indices[c]);
    for (std::size_t r = 0; r < dim; ++r) out(r, c) = s[r];
  }
  return out;
}

Matrix Dataset::columns() const {
  std::vector<std::size_t> all(size());
  std::iota(all.begin(), all.end(), 0);
  return columns(all);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(sample(i), labels.at(i));
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

void Dataset::validate() const {
  if (features.size() != labels.size() * dim) {
    throw DataError("Dataset: feature buffer does not match sample count");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw DataError("Dataset: label " + std::to_string(labels[i]) + " at sample " +
                      std::to_string(i) + " outside [0, " + std::to_string(class_count) + ")");
    }
  }
}

std::vector<std::size_t> PartitionMatrix::row_sums() const {
  std::vector<std::size_t> out(classes, 0);
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < clients; ++j) out[i] += (*this)(i, j);
  }
  return out;
}

std::vector<std::size_t> PartitionMatrix::column_sums() const {
  std::vector<std::size_t> out(clients, 0);
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < clients; ++j) out[j] += (*this)(i, j);
  }
  return out;
}

Matrix synthetic_class_means(const SyntheticSpec& spec, RandomSource& source) {
  if (spec.classes < 2) throw ParameterError("synthetic: classes must be >= 2");
  if (spec.dim < 1) throw ParameterError("synthetic: dim must be >= 1");
  return draw_gaussian(source, 0.0, spec.separation, spec.classes, spec.dim);
}

Dataset generate_synthetic(const SyntheticSpec& spec, const Matrix& means, RandomSource& source) {
  if (spec.classes < 2) throw ParameterError("synthetic: classes must be >= 2");
  if (means.rows() != spec.classes || means.cols() != spec.dim) {
    throw ShapeError("synthetic: means " + means.shape_string() + " do not match spec");
  }
  if (!(spec.spread >= 0.0)) throw ParameterError("synthetic: spread must be >= 0");
  Dataset out;
  out.dim = spec.dim;
  out.class_count = spec.classes;
  out.features.reserve(spec.classes * spec.per_class * spec.dim);
  std::vector<double> x(spec.dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      for (std::size_t d = 0; d < spec.dim; ++d) {
        x[d] = means(c, d) + draw_gaussian(source, 0.0, spec.spread);
      }
      out.push_back(x, static_cast<int>(c));
    }
  }
  return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec, RandomSource& source) {
  RandomSource mean_source = source.derive(Purpose::kData, {0});
  const Matrix means = synthetic_class_means(spec, mean_source);
  RandomSource sample_source = source.derive(Purpose::kData, {1});
  return generate_synthetic(spec, means, sample_source);
}

namespace {

std::vector<std::size_t> largest_remainder(std::span<const double> proportions,
                                           std::size_t total) {
  const std::size_t k = proportions.size();
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders(k);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double exact = proportions[j] * static_cast<double>(total);
    counts[j] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[j];
    remainders[j] = {exact - static_cast<double>(counts[j]), j};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  // Floating-point slack can leave the floor total off by more than k in
  // principle; cycle until exact.
  for (std::size_t i = 0; assigned < total; i = (i + 1) % k) {
    ++counts[remainders[i].second];
    ++assigned;
  }
  return counts;
}

Partition build_partition(const Dataset& data, std::size_t clients,
                          const std::vector<std::vector<std::size_t>>& members) {
  Partition p;
  p.matrix.classes = data.class_count;
  p.matrix.clients = clients;
  p.matrix.counts.assign(data.class_count * clients, 0);
  p.shards.resize(clients);
  for (std::size_t j = 0; j < clients; ++j) {
    p.shards[j].client_id = j;
    p.shards[j].data = data.subset(members[j]);
    for (int label : p.shards[j].data.labels) {
      ++p.matrix.counts[static_cast<std::size_t>(label) * clients + j];
    }
  }
  return p;
}

}  // namespace

Partition partition_dirichlet(const Dataset& data, std::size_t clients, double alpha,
                              RandomSource& source) {
  if (clients < 1) throw ParameterError("partition: clients must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("partition: alpha must be > 0");
  data.validate();
  std::vector<std::vector<std::size_t>> by_class(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }
  std::vector<std::vector<std::size_t>> members(clients);
  for (std::size_t c = 0; c < data.class_count; ++c) {
    RandomSource cls = source.derive(Purpose::kPartition, {c});
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), cls);
    const auto proportions = draw_dirichlet(cls, alpha, clients);
    const auto counts = largest_remainder(proportions, idx.size());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < clients; ++j) {
      members[j].insert(members[j].end(), idx.begin() + pos, idx.begin() + pos + counts[j]);
      pos += counts[j];
    }
  }
  return build_partition(data, clients, members);
}

Partition partition_iid(const Dataset& data, std::size_t clients, RandomSource& source) {
  if (clients < 1) throw ParameterError("partition: clients must be >= 1");
  data.validate();
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  RandomSource shuffle = source.derive(Purpose::kPartition);
  std::shuffle(idx.begin(), idx.end(), shuffle);
  std::vector<std::vector<std::size_t>> members(clients);
  for (std::size_t i = 0; i < idx.size(); ++i) members[i % clients].push_back(idx[i]);
  for (auto& m : members) std::sort(m.begin(), m.end());
  return build_partition(data, clients, members);
}

Partition partition_natural(const Dataset& data, std::span<const long long> client_ids) {
  if (client_ids.size() != data.size()) {
    throw DataError("partition_natural: one client id per sample required");
  }
  std::map<long long, std::size_t> compact;
  for (long long id : client_ids) compact.emplace(id, 0);
  std::size_t next = 0;
  for (auto& [id, index] : compact) index = next++;
  std::vector<std::vector<std::size_t>> members(compact.size());
  for (std::size_t i = 0; i < client_ids.size(); ++i) {
    members[compact[client_ids[i]]].push_back(i);
  }
  return build_partition(data, compact.size(), members);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          RandomSource& source) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParameterError("split: fraction in [0, 1]");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), source);
  const auto second = static_cast<std::size_t>(std::llround(fraction * double(data.size())));
  std::vector<std::size_t> a(idx.begin(), idx.end() - second), b(idx.end() - second, idx.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {data.subset(a), data.subset(b)};
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && begin != end;
}

}  // namespace

CsvDataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header row");
  std::vector<std::string> header = split_fields(line);
  for (auto& h : header) h = trim(h);

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  const auto label_col = find(schema.label_column);
  if (!label_col) throw DataError("csv: schema error: unknown column '" + schema.label_column + "'");
  std::optional<std::size_t> client_col;
  if (!schema.client_column.empty()) {
    client_col = find(schema.client_column);
    if (!client_col) {
      throw DataError("csv: schema error: unknown column '" + schema.client_column + "'");
    }
  }
  std::vector<std::size_t> feature_cols;
  CsvDataset out;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != *label_col && (!client_col || c != *client_col)) {
        feature_cols.push_back(c);
        out.feature_names.push_back(header[c]);
      }
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      const auto c = find(name);
      if (!c) throw DataError("csv: schema error: unknown column '" + name + "'");
      feature_cols.push_back(*c);
      out.feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw DataError("csv: no feature columns");

  out.data.dim = feature_cols.size();
  if (client_col) out.client_ids.emplace();
  std::vector<double> x(feature_cols.size());
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("csv: line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::size_t c = feature_cols[k];
      if (!parse_number(fields[c], x[k]) || !std::isfinite(x[k])) {
        throw DataError("csv: line " + std::to_string(line_no) + ", column '" + header[c] +
                        "': non-numeric value '" + fields[c] + "'");
      }
    }
    int label = 0;
    if (!parse_number(fields[*label_col], label) || label < 0) {
      throw DataError("csv: line " + std::to_string(line_no) + ", column '" + header[*label_col] +
                      "': label must be a non-negative integer, got '" + fields[*label_col] +
                      "'");
    }
    if (client_col) {
      long long id = 0;
      if (!parse_number(fields[*client_col], id)) {
        throw DataError("csv: line " + std::to_string(line_no) + ", column '" +
                        header[*client_col] + "': client id must be an integer, got '" +
                        fields[*client_col] + "'");
      }
      out.client_ids->push_back(id);
    }
    max_label = std::max(max_label, label);
    out.data.push_back(x, label);
  }
  out.data.class_count = static_cast<std::size_t>(max_label + 1);
  return out;
}

CsvDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

}  // namespace dpfl
