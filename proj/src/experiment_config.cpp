// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dpfl/errors.hpp"
#include "dpfl/experiment.hpp"
#include "experiment_internal.hpp"

namespace dpfl {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string>& issues() { return issues_; }

  void add(const std::string& path, const std::string& message) {
    issues_.push_back(path + ": " + message);
  }

  bool expect_map(const YAML::Node& node, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) {
      add(path.empty() ? "<root>" : path, "expected a mapping");
      return false;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) add(join(path, key), "unknown key");
    }
    return true;
  }

  template <typename T>
  void scalar(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
    const YAML::Node node = parent[key];
    if (!node) return;
    const std::string where = join(path, key);
    if (!node.IsScalar()) {
      add(where, "expected a scalar");
      return;
    }
    try {
      if constexpr (std::is_same_v<T, std::size_t>) {
        const auto v = node.as<long long>();
        if (v < 0) {
          add(where, "must be a non-negative integer");
          return;
        }
        out = static_cast<std::size_t>(v);
      } else {
        out = node.as<T>();
      }
    } catch (const YAML::Exception&) {
      add(where, std::string("cannot parse '") + node.Scalar() + "' as " + type_name<T>());
    }
  }

  template <typename E, typename Parse>
  void enumeration(const YAML::Node& parent, const std::string& path, const char* key, E& out,
                   Parse parse, const char* choices) {
    std::string text;
    if (!parent[key]) return;
    scalar(parent, path, key, text);
    if (auto v = parse(text)) {
      out = *v;
    } else {
      add(join(path, key), "unknown value '" + text + "' (expected " + choices + ")");
    }
  }

 private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    return "an integer";
  }

  std::vector<std::string> issues_;
};

std::optional<DataSource> parse_source(std::string_view s) {
  if (s == "synthetic") return DataSource::kSynthetic;
  if (s == "csv") return DataSource::kCsv;
  return std::nullopt;
}

std::optional<PartitionScheme> parse_partition(std::string_view s) {
  if (s == "dirichlet") return PartitionScheme::kDirichlet;
  if (s == "iid") return PartitionScheme::kIid;
  if (s == "natural") return PartitionScheme::kNatural;
  return std::nullopt;
}

std::optional<CohortSampling> parse_sampling(std::string_view s) {
  if (s == "poisson") return CohortSampling::kPoisson;
  if (s == "fixed") return CohortSampling::kFixedSize;
  return std::nullopt;
}

std::optional<RankSampling> parse_rank_sampling(std::string_view s) {
  if (s == "server") return RankSampling::kServerPerRound;
  if (s == "per_client") return RankSampling::kPerClient;
  return std::nullopt;
}

void read_data(Reader& r, const YAML::Node& node, DataSection& d) {
  if (!r.expect_map(node, "data",
                    {"source", "synthetic", "csv", "partition", "alpha", "clients", "test_fraction"})) {
    return;
  }
  r.enumeration(node, "data", "source", d.source, parse_source, "synthetic, csv");
  if (const auto s = node["synthetic"];
      s && r.expect_map(s, "data.synthetic", {"classes", "dim", "per_class", "spread", "separation"})) {
    r.scalar(s, "data.synthetic", "classes", d.synthetic.classes);
    r.scalar(s, "data.synthetic", "dim", d.synthetic.dim);
    r.scalar(s, "data.synthetic", "per_class", d.synthetic.per_class);
    r.scalar(s, "data.synthetic", "spread", d.synthetic.spread);
    r.scalar(s, "data.synthetic", "separation", d.synthetic.separation);
  }
  if (const auto c = node["csv"];
      c && r.expect_map(c, "data.csv", {"path", "label_column", "client_column", "feature_columns"})) {
    std::string path = d.csv_path.string();
    r.scalar(c, "data.csv", "path", path);
    d.csv_path = path;
    r.scalar(c, "data.csv", "label_column", d.csv_schema.label_column);
    r.scalar(c, "data.csv", "client_column", d.csv_schema.client_column);
    if (const auto f = c["feature_columns"]) {
      if (!f.IsSequence()) {
        r.add("data.csv.feature_columns", "expected a list");
      } else {
        d.csv_schema.feature_columns.clear();
        for (const auto& item : f) d.csv_schema.feature_columns.push_back(item.as<std::string>());
      }
    }
  }
  r.enumeration(node, "data", "partition", d.partition, parse_partition, "dirichlet, iid, natural");
  r.scalar(node, "data", "alpha", d.alpha);
  r.scalar(node, "data", "clients", d.clients);
  r.scalar(node, "data", "test_fraction", d.test_fraction);
}

void read_pretrain(Reader& r, const YAML::Node& node, PretrainSection& p) {
  if (!r.expect_map(node, "pretrain",
                    {"epochs", "batch_size", "learning_rate", "per_class", "shift", "csv_fraction"})) {
    return;
  }
  r.scalar(node, "pretrain", "epochs", p.epochs);
  r.scalar(node, "pretrain", "batch_size", p.batch_size);
  r.scalar(node, "pretrain", "learning_rate", p.learning_rate);
  r.scalar(node, "pretrain", "per_class", p.per_class);
  r.scalar(node, "pretrain", "shift", p.shift);
  r.scalar(node, "pretrain", "csv_fraction", p.csv_fraction);
}

void read_model(Reader& r, const YAML::Node& node, ModelSection& m) {
  if (!r.expect_map(node, "model", {"hidden"})) return;
  if (const auto h = node["hidden"]) {
    if (!h.IsSequence()) {
      r.add("model.hidden", "expected a list of layer widths");
      return;
    }
    m.hidden.clear();
    for (std::size_t i = 0; i < h.size(); ++i) {
      try {
        const auto w = h[i].as<long long>();
        if (w < 1) r.add("model.hidden[" + std::to_string(i) + "]", "width must be >= 1");
        m.hidden.push_back(static_cast<std::size_t>(std::max(w, 1LL)));
      } catch (const YAML::Exception&) {
        r.add("model.hidden[" + std::to_string(i) + "]", "expected an integer");
      }
    }
  }
}

void read_method(Reader& r, const YAML::Node& node, PeftMethod& m) {
  if (!r.expect_map(node, "method",
                    {"kind", "rank", "min_rank", "max_rank", "compacter_terms", "target_rank",
                     "prune_interval", "init_std"})) {
    return;
  }
  r.enumeration(node, "method", "kind", m.kind, parse_peft_kind,
                "full, adapter, compacter, bitfit, lora, loha, adalora, dylora");
  r.scalar(node, "method", "rank", m.rank);
  r.scalar(node, "method", "min_rank", m.min_rank);
  r.scalar(node, "method", "max_rank", m.max_rank);
  r.scalar(node, "method", "compacter_terms", m.compacter_terms);
  r.scalar(node, "method", "target_rank", m.target_rank);
  r.scalar(node, "method", "prune_interval", m.prune_interval);
  r.scalar(node, "method", "init_std", m.init_std);
}

void read_federation(Reader& r, const YAML::Node& node, FederationConfig& f) {
  if (!r.expect_map(node, "federation",
                    {"algorithm", "sampling", "sampling_rate", "cohort_size", "rounds", "local",
                     "rank_sampling", "eval_interval", "aggregation"})) {
    return;
  }
  r.enumeration(node, "federation", "algorithm", f.algorithm, parse_algorithm,
                "fedavg, dp-fedavg, dp-peft, dp-dylora");
  r.enumeration(node, "federation", "sampling", f.sampling, parse_sampling, "poisson, fixed");
  r.scalar(node, "federation", "sampling_rate", f.sampling_rate);
  r.scalar(node, "federation", "cohort_size", f.cohort_size);
  r.scalar(node, "federation", "rounds", f.rounds);
  if (const auto l = node["local"];
      l && r.expect_map(l, "federation.local", {"epochs", "batch_size", "learning_rate"})) {
    r.scalar(l, "federation.local", "epochs", f.local.epochs);
    r.scalar(l, "federation.local", "batch_size", f.local.batch_size);
    r.scalar(l, "federation.local", "learning_rate", f.local.learning_rate);
  }
  r.enumeration(node, "federation", "rank_sampling", f.rank_sampling, parse_rank_sampling,
                "server, per_client");
  r.scalar(node, "federation", "eval_interval", f.eval_interval);
  if (const auto a = node["aggregation"];
      a && r.expect_map(a, "federation.aggregation", {"backend", "noise_mode", "scale_bits"})) {
    r.enumeration(a, "federation.aggregation", "backend", f.aggregation.backend, parse_backend,
                  "exact, masked");
    r.enumeration(a, "federation.aggregation", "noise_mode", f.aggregation.noise_mode,
                  parse_noise_mode, "central, distributed");
    r.scalar(a, "federation.aggregation", "scale_bits", f.aggregation.codec_scale_bits);
  }
}

void read_privacy(Reader& r, const YAML::Node& node, ExperimentConfig& c) {
  if (!r.expect_map(node, "privacy",
                    {"epsilon", "delta", "sampling_rate", "clip_norm", "cohort_small",
                     "cohort_large", "population", "noise_multiplier"})) {
    return;
  }
  PrivacyConfig p;
  r.scalar(node, "privacy", "epsilon", p.epsilon);
  r.scalar(node, "privacy", "delta", p.delta);
  r.scalar(node, "privacy", "sampling_rate", p.sampling_rate);
  r.scalar(node, "privacy", "clip_norm", p.clip_norm);
  if (node["cohort_small"]) {
    r.scalar(node, "privacy", "cohort_small", p.cohort_small);
    c.explicit_cohort_small = true;
  }
  r.scalar(node, "privacy", "cohort_large", p.cohort_large);
  r.scalar(node, "privacy", "population", p.population);
  if (node["noise_multiplier"]) {
    double z = 0.0;
    r.scalar(node, "privacy", "noise_multiplier", z);
    c.noise_multiplier = z;
  }
  c.federation.privacy = p;
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

namespace detail {

ExperimentConfig parse_experiment_node(const YAML::Node& root) {
  ExperimentConfig c;
  Reader r;
  if (r.expect_map(root, "",
                   {"seed", "output", "data", "pretrain", "model", "method", "federation",
                    "privacy"})) {
    r.scalar(root, "", "seed", c.seed);
    std::string out = c.output.string();
    r.scalar(root, "", "output", out);
    c.output = out;
    if (root["data"]) read_data(r, root["data"], c.data);
    if (root["pretrain"]) read_pretrain(r, root["pretrain"], c.pretrain);
    if (root["model"]) read_model(r, root["model"], c.model);
    if (root["method"]) read_method(r, root["method"], c.method);
    if (root["federation"]) read_federation(r, root["federation"], c.federation);
    if (root["privacy"]) read_privacy(r, root["privacy"], c);
  }
  if (c.federation.privacy) c.federation.privacy->rounds = c.federation.rounds;
  auto issues = std::move(r.issues());
  if (issues.empty()) {
    try {
      validate_experiment_config(c);
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"<yaml>: line " + std::to_string(e.mark.line + 1) + ": " + e.msg});
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path.string() + ": cannot open file"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

ExperimentConfig parse_experiment_config(const std::string& yaml_text) {
  return detail::parse_experiment_node(detail::load_yaml(yaml_text));
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(detail::read_text_file(path));
}

void validate_experiment_config(const ExperimentConfig& c) {
  std::vector<std::string> issues;
  auto check = [&](bool ok, const char* path, const char* message) {
    if (!ok) issues.push_back(std::string(path) + ": " + message);
  };

  const auto& d = c.data;
  if (d.source == DataSource::kSynthetic) {
    check(d.synthetic.classes >= 2, "data.synthetic.classes", "must be >= 2");
    check(d.synthetic.dim >= 1, "data.synthetic.dim", "must be >= 1");
    check(d.synthetic.per_class >= 1, "data.synthetic.per_class", "must be >= 1");
    check(d.synthetic.spread >= 0.0 && std::isfinite(d.synthetic.spread), "data.synthetic.spread",
          "must be finite and >= 0");
    check(d.synthetic.separation >= 0.0 && std::isfinite(d.synthetic.separation),
          "data.synthetic.separation", "must be finite and >= 0");
    check(d.partition != PartitionScheme::kNatural, "data.partition",
          "natural partitioning needs csv data with a client column");
  } else {
    check(!d.csv_path.empty(), "data.csv.path", "required when data.source is csv");
    check(!d.csv_schema.label_column.empty(), "data.csv.label_column", "must not be empty");
    check(d.partition != PartitionScheme::kNatural || !d.csv_schema.client_column.empty(),
          "data.csv.client_column", "required for natural partitioning");
  }
  check(d.alpha > 0.0 && std::isfinite(d.alpha), "data.alpha", "must be > 0");
  check(d.clients >= 1, "data.clients", "must be >= 1");
  check(in_open_unit(d.test_fraction), "data.test_fraction", "must be in (0, 1)");

  const auto& p = c.pretrain;
  check(p.batch_size >= 1, "pretrain.batch_size", "must be >= 1");
  check(p.learning_rate >= 0.0, "pretrain.learning_rate", "must be >= 0");
  check(p.per_class >= 1, "pretrain.per_class", "must be >= 1");
  check(p.shift >= 0.0 && std::isfinite(p.shift), "pretrain.shift", "must be >= 0");
  check(p.csv_fraction >= 0.0 && p.csv_fraction < 1.0, "pretrain.csv_fraction", "must be in [0, 1)");

  for (std::size_t w : c.model.hidden) check(w >= 1, "model.hidden", "widths must be >= 1");

  const auto& m = c.method;
  check(m.rank >= 1, "method.rank", "must be >= 1");
  check(m.min_rank >= 1, "method.min_rank", "must be >= 1");
  check(m.min_rank <= m.max_rank, "method.max_rank", "must be >= method.min_rank");
  check(m.compacter_terms >= 1, "method.compacter_terms", "must be >= 1");
  check(m.target_rank >= 1 && m.target_rank <= m.rank, "method.target_rank",
        "must be in [1, method.rank]");
  check(m.prune_interval >= 1, "method.prune_interval", "must be >= 1");
  check(m.init_std >= 0.0 && std::isfinite(m.init_std), "method.init_std", "must be >= 0");
  if (m.kind == PeftKind::kCompacter && d.source == DataSource::kSynthetic && m.compacter_terms >= 1) {
    std::vector<std::size_t> widths{d.synthetic.dim};
    widths.insert(widths.end(), c.model.hidden.begin(), c.model.hidden.end());
    widths.push_back(d.synthetic.classes);
    bool divides = true;
    for (std::size_t w : widths) divides = divides && w % m.compacter_terms == 0;
    check(divides, "method.compacter_terms", "must divide every layer dimension");
  }

  const auto& f = c.federation;
  check(f.rounds >= 1, "federation.rounds", "must be >= 1");
  if (f.sampling == CohortSampling::kPoisson) {
    check(f.sampling_rate > 0.0 && f.sampling_rate <= 1.0, "federation.sampling_rate",
          "must be in (0, 1]");
  } else {
    check(f.cohort_size >= 1, "federation.cohort_size", "must be >= 1");
    check(d.source != DataSource::kSynthetic || f.cohort_size <= d.clients,
          "federation.cohort_size", "must not exceed data.clients");
  }
  check(f.local.epochs >= 1, "federation.local.epochs", "must be >= 1");
  check(f.local.batch_size >= 1, "federation.local.batch_size", "must be >= 1");
  check(f.local.learning_rate >= 0.0 && std::isfinite(f.local.learning_rate),
        "federation.local.learning_rate", "must be >= 0");
  check(f.aggregation.codec_scale_bits >= 8 && f.aggregation.codec_scale_bits <= 52,
        "federation.aggregation.scale_bits", "must be in [8, 52]");
  check(f.algorithm != Algorithm::kDpDyLora || m.kind == PeftKind::kDyLora, "method.kind",
        "dp-dylora requires dylora");
  check(f.algorithm != Algorithm::kDpFedAvg || m.kind == PeftKind::kFull, "method.kind",
        "dp-fedavg trains the full model (kind: full)");

  if (f.is_private()) {
    if (!f.privacy) {
      issues.push_back("privacy: required for algorithm " + std::string(to_string(f.algorithm)));
    } else {
      const auto& q = *f.privacy;
      check(q.epsilon > 0.0 && std::isfinite(q.epsilon), "privacy.epsilon", "must be > 0");
      check(in_open_unit(q.delta), "privacy.delta", "must be in (0, 1)");
      check(q.sampling_rate > 0.0 && q.sampling_rate <= 1.0, "privacy.sampling_rate",
            "must be in (0, 1]");
      check(q.clip_norm > 0.0 && std::isfinite(q.clip_norm), "privacy.clip_norm", "must be > 0");
      check(q.cohort_small > 0.0, "privacy.cohort_small", "must be > 0");
      check(q.cohort_large >= q.cohort_small, "privacy.cohort_large",
            "must be >= privacy.cohort_small");
      check(q.population >= 1, "privacy.population", "must be >= 1");
    }
  }
  if (c.noise_multiplier) {
    check(*c.noise_multiplier >= 0.0 && std::isfinite(*c.noise_multiplier),
          "privacy.noise_multiplier", "must be >= 0");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string dump_experiment_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output" << YAML::Value << c.output.string();

  const auto& d = c.data;
  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value
      << (d.source == DataSource::kSynthetic ? "synthetic" : "csv");
  out << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap
      << YAML::Key << "classes" << YAML::Value << d.synthetic.classes
      << YAML::Key << "dim" << YAML::Value << d.synthetic.dim
      << YAML::Key << "per_class" << YAML::Value << d.synthetic.per_class
      << YAML::Key << "spread" << YAML::Value << d.synthetic.spread
      << YAML::Key << "separation" << YAML::Value << d.synthetic.separation << YAML::EndMap;
  if (d.source == DataSource::kCsv) {
    out << YAML::Key << "csv" << YAML::Value << YAML::BeginMap
        << YAML::Key << "path" << YAML::Value << d.csv_path.string()
        << YAML::Key << "label_column" << YAML::Value << d.csv_schema.label_column
        << YAML::Key << "client_column" << YAML::Value << d.csv_schema.client_column
        << YAML::Key << "feature_columns" << YAML::Value << YAML::Flow
        << d.csv_schema.feature_columns << YAML::EndMap;
  }
  const char* partition = d.partition == PartitionScheme::kDirichlet ? "dirichlet"
                          : d.partition == PartitionScheme::kIid     ? "iid"
                                                                     : "natural";
  out << YAML::Key << "partition" << YAML::Value << partition;
  out << YAML::Key << "alpha" << YAML::Value << d.alpha;
  out << YAML::Key << "clients" << YAML::Value << d.clients;
  out << YAML::Key << "test_fraction" << YAML::Value << d.test_fraction;
  out << YAML::EndMap;

  const auto& p = c.pretrain;
  out << YAML::Key << "pretrain" << YAML::Value << YAML::BeginMap
      << YAML::Key << "epochs" << YAML::Value << p.epochs
      << YAML::Key << "batch_size" << YAML::Value << p.batch_size
      << YAML::Key << "learning_rate" << YAML::Value << p.learning_rate
      << YAML::Key << "per_class" << YAML::Value << p.per_class
      << YAML::Key << "shift" << YAML::Value << p.shift
      << YAML::Key << "csv_fraction" << YAML::Value << p.csv_fraction << YAML::EndMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap << YAML::Key << "hidden"
      << YAML::Value << YAML::Flow << c.model.hidden << YAML::EndMap;

  const auto& m = c.method;
  out << YAML::Key << "method" << YAML::Value << YAML::BeginMap
      << YAML::Key << "kind" << YAML::Value << std::string(to_string(m.kind))
      << YAML::Key << "rank" << YAML::Value << m.rank
      << YAML::Key << "min_rank" << YAML::Value << m.min_rank
      << YAML::Key << "max_rank" << YAML::Value << m.max_rank
      << YAML::Key << "compacter_terms" << YAML::Value << m.compacter_terms
      << YAML::Key << "target_rank" << YAML::Value << m.target_rank
      << YAML::Key << "prune_interval" << YAML::Value << m.prune_interval
      << YAML::Key << "init_std" << YAML::Value << m.init_std << YAML::EndMap;

  const auto& f = c.federation;
  out << YAML::Key << "federation" << YAML::Value << YAML::BeginMap
      << YAML::Key << "algorithm" << YAML::Value << std::string(to_string(f.algorithm))
      << YAML::Key << "sampling" << YAML::Value
      << (f.sampling == CohortSampling::kPoisson ? "poisson" : "fixed")
      << YAML::Key << "sampling_rate" << YAML::Value << f.sampling_rate
      << YAML::Key << "cohort_size" << YAML::Value << f.cohort_size
      << YAML::Key << "rounds" << YAML::Value << f.rounds
      << YAML::Key << "local" << YAML::Value << YAML::BeginMap
      << YAML::Key << "epochs" << YAML::Value << f.local.epochs
      << YAML::Key << "batch_size" << YAML::Value << f.local.batch_size
      << YAML::Key << "learning_rate" << YAML::Value << f.local.learning_rate << YAML::EndMap
      << YAML::Key << "rank_sampling" << YAML::Value
      << (f.rank_sampling == RankSampling::kServerPerRound ? "server" : "per_client")
      << YAML::Key << "eval_interval" << YAML::Value << f.eval_interval
      << YAML::Key << "aggregation" << YAML::Value << YAML::BeginMap
      << YAML::Key << "backend" << YAML::Value << std::string(to_string(f.aggregation.backend))
      << YAML::Key << "noise_mode" << YAML::Value << std::string(to_string(f.aggregation.noise_mode))
      << YAML::Key << "scale_bits" << YAML::Value << f.aggregation.codec_scale_bits
      << YAML::EndMap << YAML::EndMap;

  if (f.privacy) {
    const auto& q = *f.privacy;
    out << YAML::Key << "privacy" << YAML::Value << YAML::BeginMap
        << YAML::Key << "epsilon" << YAML::Value << q.epsilon
        << YAML::Key << "delta" << YAML::Value << q.delta
        << YAML::Key << "sampling_rate" << YAML::Value << q.sampling_rate
        << YAML::Key << "clip_norm" << YAML::Value << q.clip_norm;
    if (c.explicit_cohort_small) {
      out << YAML::Key << "cohort_small" << YAML::Value << q.cohort_small;
    }
    out << YAML::Key << "cohort_large" << YAML::Value << q.cohort_large
        << YAML::Key << "population" << YAML::Value << q.population;
    if (c.noise_multiplier) {
      out << YAML::Key << "noise_multiplier" << YAML::Value << *c.noise_multiplier;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace dpfl
