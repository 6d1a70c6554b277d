// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <omp.h>
#include <yaml-cpp/yaml.h>

#include "dpfl/errors.hpp"
#include "dpfl/experiment.hpp"
#include "experiment_internal.hpp"

namespace dpfl {

namespace {

struct Axis {
  std::string path;
  std::vector<YAML::Node> values;
  std::vector<std::string> labels;
};

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

// Assigns `value` at a dotted path, creating intermediate maps.
void assign(YAML::Node root, const std::vector<std::string>& parts, const YAML::Node& value) {
  YAML::Node node = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node child = node[parts[i]];
    if (!child || child.IsNull()) {
      node[parts[i]] = YAML::Node(YAML::NodeType::Map);
      child = node[parts[i]];
    }
    node.reset(child);
  }
  node[parts.back()] = YAML::Clone(value);
}

std::string label_of(const YAML::Node& value) {
  if (value.IsScalar()) return value.Scalar();
  YAML::Emitter e;
  e << YAML::Flow << value;
  return e.c_str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

GridPlan plan_grid(const std::string& yaml_text) {
  YAML::Node root = YAML::Clone(detail::load_yaml(yaml_text));
  if (!root.IsMap()) throw ConfigError({"<root>: expected a mapping"});

  GridPlan plan;
  std::vector<Axis> axes;
  std::vector<std::string> issues;
  if (const YAML::Node sweep = root["sweep"]) {
    if (!sweep.IsMap()) {
      throw ConfigError({"sweep: expected a mapping of key path -> list of values"});
    }
    for (const auto& kv : sweep) {
      Axis axis;
      axis.path = kv.first.as<std::string>();
      const std::string where = "sweep." + axis.path;
      if (!kv.second.IsSequence() || kv.second.size() == 0) {
        issues.push_back(where + ": expected a non-empty list");
        continue;
      }
      if (axis.path == "sweep" || axis.path.rfind("sweep.", 0) == 0 || axis.path == "seed") {
        issues.push_back(where + ": cannot be swept");
        continue;
      }
      std::set<std::string> seen;
      for (const auto& v : kv.second) {
        const std::string label = label_of(v);
        if (!seen.insert(label).second) {
          plan.warnings.push_back(where + ": duplicate value " + label + " ignored");
          continue;
        }
        axis.values.push_back(v);
        axis.labels.push_back(label);
      }
      axes.push_back(std::move(axis));
    }
    root.remove("sweep");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  // Row-major over axes: the last axis varies fastest.
  for (std::size_t index = 0; index < total; ++index) {
    YAML::Node cell_yaml = YAML::Clone(root);
    GridCell cell;
    cell.index = index;
    std::size_t rem = index;
    std::vector<std::size_t> pick(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      pick[a] = rem % axes[a].values.size();
      rem /= axes[a].values.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      assign(cell_yaml, split_path(axes[a].path), axes[a].values[pick[a]]);
      cell.assignments.emplace_back(axes[a].path, axes[a].labels[pick[a]]);
    }
    try {
      cell.config = detail::parse_experiment_node(cell_yaml);
      cell.config.seed += index;
    } catch (const ConfigError& e) {
      for (const auto& issue : e.issues()) cell.error += (cell.error.empty() ? "" : "; ") + issue;
      plan.warnings.push_back("cell " + std::to_string(index) + ": invalid config: " + cell.error);
    }
    plan.cells.push_back(std::move(cell));
  }
  return plan;
}

GridPlan load_grid(const std::filesystem::path& path) {
  return plan_grid(detail::read_text_file(path));
}

std::vector<GridCellOutcome> run_grid(const GridPlan& plan, const std::filesystem::path& root,
                                      int parallel_cells) {
  std::filesystem::create_directories(root);
  const int workers = parallel_cells > 0 ? parallel_cells : omp_get_num_procs();
  std::vector<GridCellOutcome> outcomes(plan.cells.size());

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(plan.cells.size()); ++i) {
    const GridCell& cell = plan.cells[i];
    GridCellOutcome& o = outcomes[i];
    o.index = cell.index;
    char name[32];
    std::snprintf(name, sizeof name, "cell-%04zu", cell.index);
    o.directory = root / name;
    if (!cell.error.empty()) {
      o.error = cell.error;
      continue;
    }
    try {
      ExperimentConfig cfg = cell.config;
      cfg.output = o.directory;
      const auto result = run_experiment(cfg);
      write_experiment_outputs(result, o.directory);
      o.ok = true;
    } catch (const ConfigError& e) {
      std::string msg;
      for (const auto& issue : e.issues()) msg += (msg.empty() ? "" : "; ") + issue;
      o.error = msg;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  }

  std::string index = "cell,directory,status,seed";
  if (!plan.cells.empty()) {
    for (const auto& [path, value] : plan.cells.front().assignments) index += ',' + csv_field(path);
  }
  index += ",error\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    index += std::to_string(o.index) + ',' + csv_field(o.directory.filename().string()) + ',' +
             (o.ok ? "ok" : "failed") + ',' + std::to_string(plan.cells[i].config.seed);
    for (const auto& [path, value] : plan.cells[i].assignments) index += ',' + csv_field(value);
    index += ',' + csv_field(o.error) + '\n';
  }
  std::ofstream out(root / "index.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (root / "index.csv").string());
  out << index;
  return outcomes;
}

}  // namespace dpfl
