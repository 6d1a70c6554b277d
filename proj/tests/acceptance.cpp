// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "dpfl/experiment.hpp"
#include "dpfl/federation.hpp"
#include "dpfl/metrics.hpp"
#include "dpfl/privacy.hpp"
#include "dpfl/secure_sum.hpp"
#include "privacy_oracle.hpp"
#include "test_support.hpp"

namespace dpfl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Calibration round-trip.
Verdict accountant_round_trip() {
  Verdict v;
  std::string summary;
  for (std::size_t rounds : {100u, 300u, 2000u}) {
    PrivacyConfig p;
    p.epsilon = 2.0;
    p.delta = 1e-6;
    p.sampling_rate = 0.01;
    p.rounds = rounds;
    const auto start = Clock::now();
    const double z = calibrate_noise_multiplier(p);
    const double eps = compute_epsilon(0.01, z, rounds, 1e-6).epsilon;
    const double eps_lower = compute_epsilon(0.01, 0.99 * z, rounds, 1e-6).epsilon;
    const double elapsed = seconds_since(start);
    const std::string tag = "T=" + std::to_string(rounds);
    v.require(eps <= 2.0, tag + fmt(": eps(z*)=%.6f > 2", eps));
    v.require(eps_lower > 2.0, tag + fmt(": eps(0.99 z*)=%.6f <= 2", eps_lower));
    v.require(elapsed < 1.0, tag + fmt(": %.3fs >= 1s", elapsed));
    summary += tag + fmt(" z*=%.4f(%.2fs) ", z, elapsed);
  }
  if (v.pass) v.detail = summary;
  return v;
}

// 2. Full-batch sampled Gaussian equals the plain Gaussian mechanism.
Verdict gaussian_closed_form() {
  Verdict v;
  double worst = 0.0;
  std::vector<double> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  for (double z : {0.5, 1.0, 2.0}) {
    const auto curve = rdp_of_sampled_gaussian(1.0, z, orders);
    for (std::size_t i = 0; i < orders.size(); ++i) {
      const double expected = orders[i] / (2.0 * z * z);
      worst = std::max(worst, std::abs(curve.epsilons[i] - expected));
      worst = std::max(worst, std::abs(rdp_sampled_gaussian_integer(1.0, z, i + 2) - expected));
    }
  }
  v.require(worst <= 1e-12, fmt("max error %.3g", worst));
  if (v.pass) v.detail = fmt("max abs error %.3g over 189 cells", worst);
  return v;
}

// 3. Pinned high-precision accountant values.
Verdict pinned_conversion() {
  Verdict v;
  double worst_conv = 0.0, worst_rdp = 0.0;
  for (const auto& o : test::kConversionOracle) {
    const RdpCurve curve{{o.order}, {o.rdp}};
    worst_conv = std::max(worst_conv, std::abs(compose_and_convert(curve, 1, o.delta).epsilon - o.epsilon));
  }
  for (const auto& o : test::kRdpOracle) {
    const double got = rdp_sampled_gaussian_integer(o.q, o.z, o.order);
    worst_rdp = std::max(worst_rdp, std::abs(got - o.value) / o.value);
  }
  v.require(worst_conv <= 1e-9, fmt("conversion error %.3g", worst_conv));
  v.require(worst_rdp <= 1e-9, fmt("rdp relative error %.3g", worst_rdp));
  if (v.pass) v.detail = fmt("conversion max error %.3g, rdp max relative error %.3g", worst_conv, worst_rdp);
  return v;
}

// 4. Finite-difference gradient check on a 3-layer toy model.
Verdict gradient_correctness() {
  Verdict v;
  const auto start = Clock::now();
  RandomSource src(404);
  const auto base = test::toy_base({4, 6, 6, 4}, src);
  const Matrix x = test::random_matrix(src, 4, 8);
  std::vector<int> labels(8);
  for (auto& l : labels) l = static_cast<int>(draw_uniform_int(src, 0, 3));

  struct Case {
    std::string name;
    PeftMethod method;
    std::optional<std::size_t> rank;
  };
  std::vector<Case> cases;
  auto add = [&](std::string name, PeftKind kind, auto tweak, std::optional<std::size_t> rank = {}) {
    PeftMethod m;
    m.kind = kind;
    m.rank = 4;
    m.min_rank = 1;
    m.max_rank = 16;
    m.target_rank = 2;
    tweak(m);
    cases.push_back({std::move(name), m, rank});
  };
  auto none = [](PeftMethod&) {};
  add("adapter", PeftKind::kAdapter, none);
  add("compacter n=1", PeftKind::kCompacter, [](PeftMethod& m) { m.compacter_terms = 1; });
  add("compacter n=2", PeftKind::kCompacter, [](PeftMethod& m) { m.compacter_terms = 2; });
  add("bitfit", PeftKind::kBitFit, none);
  for (std::size_t r : {1u, 8u, 16u}) {
    add("lora r=" + std::to_string(r), PeftKind::kLora, [r](PeftMethod& m) { m.rank = r; });
  }
  add("loha", PeftKind::kLoha, none);
  add("adalora", PeftKind::kAdaLora, none);
  for (std::size_t b : {1u, 8u, 16u}) add("dylora b=" + std::to_string(b), PeftKind::kDyLora, none, b);

  double worst = 0.0;
  for (const auto& c : cases) {
    RandomSource init(405);
    ModelSnapshot model{base, init_peft(c.method, base->layers, init), 0};
    RandomSource noise(406);
    model.peft = test::perturbed(model.peft, noise, 0.3);
    const auto check = test::gradient_check(model, x, labels, c.rank);
    worst = std::max(worst, check.max_relative_error);
    v.require(check.max_relative_error <= 1e-4, c.name + fmt(" rel err %.3g", check.max_relative_error));
  }
  const double elapsed = seconds_since(start);
  v.require(elapsed < 30.0, fmt("%.1fs >= 30s", elapsed));
  if (v.pass) v.detail = std::to_string(cases.size()) + fmt(" configurations, max rel err %.3g, %.2fs", worst, elapsed);
  return v;
}

// 5. Zero-delta initialization.
Verdict zero_delta_init() {
  Verdict v;
  RandomSource src(505);
  const auto base = test::toy_base({5, 8, 8, 3}, src);
  const Matrix x = test::random_matrix(src, 5, 100);
  // Frozen network evaluated directly from its layers.
  Matrix expected = x;
  for (const auto& layer : base->layers) {
    Matrix z = matmul(layer.weight, expected);
    add_column_broadcast(z, layer.bias);
    if (layer.activation == Activation::kRelu) {
      for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) = std::max(z(i, j), 0.0);
    }
    expected = std::move(z);
  }
  const std::vector<int> labels(100, 0);
  for (PeftKind kind : {PeftKind::kLora, PeftKind::kDyLora, PeftKind::kAdaLora}) {
    PeftMethod m;
    m.kind = kind;
    m.rank = 4;
    m.max_rank = 8;
    m.target_rank = 2;
    RandomSource init(506);
    const ModelSnapshot model{base, init_peft(m, base->layers, init), 0};
    v.require(forward_loss(model, x, labels).logits == expected,
              std::string(to_string(kind)) + " differs from the frozen base");
  }
  if (v.pass) v.detail = "lora, dylora, adalora bit-identical on 100 inputs";
  return v;
}

// 6. Clipping contract.
Verdict clipping_contract() {
  Verdict v;
  RandomSource src(606);
  std::size_t over = 0, not_idempotent = 0;
  double worst_cos = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double s = 0.01 + 10.0 * src.uniform_open_closed();
    const auto dim = static_cast<std::size_t>(draw_uniform_int(src, 1, 200));
    const double sd = std::pow(10.0, 4.0 * src.uniform_open_closed() - 2.0);
    const auto u = draw_gaussian_vector(src, 0.0, sd, dim);
    const auto c = clip_update(u, s);
    over += l2_norm(c) > s;
    not_idempotent += clip_update(c, s) != c;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += u[i] * c[i];
    worst_cos = std::max(worst_cos, std::abs(dot / (l2_norm(u) * l2_norm(c)) - 1.0));
  }
  v.require(over == 0, std::to_string(over) + " vectors above S");
  v.require(not_idempotent == 0, std::to_string(not_idempotent) + " not idempotent");
  v.require(worst_cos <= 1e-12, fmt("cosine off by %.3g", worst_cos));
  if (v.pass) v.detail = fmt("10^4 vectors, max |cos-1| %.3g", worst_cos);
  return v;
}

// 7. Secure-sum equivalence and distributed noise variance.
Verdict secure_sum_equivalence() {
  Verdict v;
  RandomSource src(707);
  std::vector<std::vector<double>> clients;
  for (int k = 0; k < 100; ++k) clients.push_back(draw_gaussian_vector(src, 0.0, 1.0, 1000));
  const FixedPointCodec codec(40);
  const auto masked = pairwise_mask_sum(clients, codec, RandomSource(708));
  const auto exact = exact_sum(clients);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(masked[i] - exact[i]));
  v.require(worst <= 1e-6, fmt("masked vs exact %.3g", worst));

  const SecureSumOptions opts{AggregationBackend::kMasked, NoiseMode::kDistributed, 40};
  const std::vector<std::vector<double>> zeros(5, std::vector<double>(4, 0.0));
  const double z = 1.3, clip = 0.7, sigma2 = (z * clip) * (z * clip);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t trial = 0; trial < 10000; ++trial) {
    const auto r = secure_sum_dp(zeros, z, clip, opts, RandomSource(709, trial));
    for (double x : r.sum) sum_sq += x * x;
    count += r.sum.size();
  }
  const double ratio = sum_sq / static_cast<double>(count) / sigma2;
  v.require(std::abs(ratio - 1.0) <= 0.05, fmt("variance ratio %.4f", ratio));
  if (v.pass) v.detail = fmt("max |masked-exact| %.3g, distributed variance ratio %.4f", worst, ratio);
  return v;
}

// 8. Server-side vs per-client rank sampling: same expected update.
Verdict rank_sampling_equivalence() {
  Verdict v;
  const auto start = Clock::now();
  RandomSource src(808);
  FederationTask task;
  task.base = test::toy_base({3, 2}, src);
  for (int k = 0; k < 2; ++k) {
    Dataset d;
    d.dim = 3;
    d.class_count = 2;
    for (int i = 0; i < 6; ++i) {
      const auto xv = draw_gaussian_vector(src, k == 0 ? 0.5 : -0.5, 1.0, 3);
      d.push_back(xv, (i + k) % 2);
    }
    task.clients.push_back(std::move(d));
  }
  task.test = task.clients[0];
  PeftMethod m;
  m.kind = PeftKind::kDyLora;
  m.min_rank = 1;
  m.max_rank = 2;
  RandomSource init(809);
  const auto global = test::perturbed(init_peft(m, task.base->layers, init), init, 0.5);
  const auto theta = flatten(global);

  FederationConfig cfg;
  cfg.algorithm = Algorithm::kFedAvg;
  cfg.sampling_rate = 1.0;
  cfg.local = {1, 6, 0.5};
  cfg.rounds = 1;

  const std::size_t trials = 10000;
  auto moments = [&](RankSampling mode, std::uint64_t seed) {
    cfg.rank_sampling = mode;
    std::vector<double> mean(theta.size(), 0.0), sq(theta.size(), 0.0);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto out = run_round(task, cfg, global, 1, 0.0, RandomSource(seed, t));
      const auto after = flatten(out.state);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = after[i] - theta[i];
        mean[i] += d;
        sq[i] += d * d;
      }
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      mean[i] /= trials;
      sq[i] = std::max(0.0, sq[i] / trials - mean[i] * mean[i]) * trials / (trials - 1);
    }
    return std::pair{mean, sq};
  };
  const auto [m_server, v_server] = moments(RankSampling::kServerPerRound, 810);
  const auto [m_client, v_client] = moments(RankSampling::kPerClient, 811);
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double se = std::sqrt((v_server[i] + v_client[i]) / trials);
    const double gap = std::abs(m_server[i] - m_client[i]);
    const double zscore = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : INFINITY);
    worst = std::max(worst, zscore);
  }
  const double elapsed = seconds_since(start);
  v.require(worst <= 3.0, fmt("max |diff|/SE %.3f", worst));
  v.require(elapsed < 120.0, fmt("%.1fs >= 120s", elapsed));
  if (v.pass) v.detail = std::to_string(theta.size()) + fmt(" coordinates, 2x10^4 trials, max |diff|/SE %.3f, %.1fs", worst, elapsed);
  return v;
}

// 9. FedAvg with full participation and one local step is gradient descent.
Verdict fedavg_degeneracy() {
  Verdict v;
  RandomSource src(909);
  const std::size_t dim = 3, classes = 3, per_client = 20, clients = 4;
  FederationTask task;
  task.base = std::make_shared<const FrozenBase>(make_random_base(dim, {}, classes, src));
  Dataset pooled;
  pooled.dim = dim;
  pooled.class_count = classes;
  for (std::size_t k = 0; k < clients; ++k) {
    Dataset d;
    d.dim = dim;
    d.class_count = classes;
    for (std::size_t i = 0; i < per_client; ++i) {
      const int label = static_cast<int>(draw_uniform_int(src, 0, classes - 1));
      const auto xv = draw_gaussian_vector(src, 0.3 * label, 1.0, dim);
      d.push_back(xv, label);
      pooled.push_back(xv, label);
    }
    task.clients.push_back(std::move(d));
  }
  task.test = pooled;
  PeftMethod m;
  m.kind = PeftKind::kFull;
  RandomSource init(910);
  PeftState state = init_peft(m, task.base->layers, init);

  FederationConfig cfg;
  cfg.algorithm = Algorithm::kFedAvg;
  cfg.sampling_rate = 1.0;
  cfg.local = {1, per_client, 0.3};
  cfg.rounds = 50;
  cfg.eval_interval = 1000;

  // Softmax regression by centralized gradient descent, written out directly.
  std::vector<double> w(classes * dim), b(classes);
  const Matrix& w0 = state.layers[0][slot::kFullWeight];
  const Matrix& b0 = state.layers[0][slot::kFullBias];
  for (std::size_t c = 0; c < classes; ++c) {
    b[c] = b0(c, 0);
    for (std::size_t j = 0; j < dim; ++j) w[c * dim + j] = w0(c, j);
  }
  const double n = static_cast<double>(pooled.size());
  double worst = 0.0;
  const RandomSource run_key(911);
  for (std::size_t t = 1; t <= 50; ++t) {
    std::vector<double> gw(w.size(), 0.0), gb(classes, 0.0);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      const auto xi = pooled.sample(i);
      std::vector<double> logit(classes);
      double top = -INFINITY;
      for (std::size_t c = 0; c < classes; ++c) {
        logit[c] = b[c];
        for (std::size_t j = 0; j < dim; ++j) logit[c] += w[c * dim + j] * xi[j];
        top = std::max(top, logit[c]);
      }
      double z = 0.0;
      for (double& l : logit) z += (l = std::exp(l - top));
      for (std::size_t c = 0; c < classes; ++c) {
        const double r = logit[c] / z - (static_cast<int>(c) == pooled.labels[i] ? 1.0 : 0.0);
        gb[c] += r / n;
        for (std::size_t j = 0; j < dim; ++j) gw[c * dim + j] += r * xi[j] / n;
      }
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= 0.3 * gw[k];
    for (std::size_t c = 0; c < classes; ++c) b[c] -= 0.3 * gb[c];

    state = run_round(task, cfg, state, t, 0.0, run_key).state;
    const Matrix& ws = state.layers[0][slot::kFullWeight];
    const Matrix& bs = state.layers[0][slot::kFullBias];
    for (std::size_t c = 0; c < classes; ++c) {
      worst = std::max(worst, std::abs(bs(c, 0) - b[c]));
      for (std::size_t j = 0; j < dim; ++j) worst = std::max(worst, std::abs(ws(c, j) - w[c * dim + j]));
    }
  }
  v.require(worst <= 1e-8, fmt("max deviation %.3g", worst));
  if (v.pass) v.detail = fmt("4 clients, 50 rounds, max deviation %.3g", worst);
  return v;
}

// 10. Desk-scale end-to-end.
constexpr const char* kDeskScale = R"(seed: 1
data:
  synthetic: {classes: 10, dim: 16, per_class: 500, spread: 2.0, separation: 3.0}
  partition: dirichlet
  alpha: 0.1
  clients: 100
  test_fraction: 0.2
pretrain: {epochs: 20, batch_size: 32, learning_rate: 0.1, per_class: 200, shift: 3.0}
model: {hidden: [32, 32]}
method: {kind: lora, rank: 16, min_rank: 1, max_rank: 16}
federation:
  algorithm: fedavg
  sampling_rate: 0.1
  rounds: 100
  local: {epochs: 1, batch_size: 16, learning_rate: 0.1}
privacy: {epsilon: 2, delta: 1.0e-6, sampling_rate: 0.01, clip_norm: 1.0, cohort_large: 10000, population: 1000000}
)";

ExperimentConfig desk_config(std::uint64_t seed, PeftKind kind, std::size_t rank, Algorithm algorithm) {
  auto cfg = parse_experiment_config(kDeskScale);
  cfg.seed = seed;
  cfg.method.kind = kind;
  cfg.method.rank = rank;
  cfg.federation.algorithm = algorithm;
  validate_experiment_config(cfg);
  return cfg;
}

double pretraining_oracle(const ExperimentConfig& cfg) {
  // Same architecture trained centrally on the pooled federated training data.
  const auto prepared = prepare_experiment(cfg);
  PretrainOptions opts;
  opts.input_dim = cfg.data.synthetic.dim;
  opts.hidden = cfg.model.hidden;
  opts.epochs = cfg.pretrain.epochs;
  opts.batch_size = cfg.pretrain.batch_size;
  opts.learning_rate = cfg.pretrain.learning_rate;
  RandomSource src = RandomSource(cfg.seed).derive(Purpose::kPretrain, {1000});
  auto base = std::make_shared<const FrozenBase>(pretrain_base(prepared.train, opts, src));
  PeftMethod bitfit;
  bitfit.kind = PeftKind::kBitFit;
  RandomSource init(0);
  const ModelSnapshot model{base, init_peft(bitfit, base->layers, init), 0};
  return evaluate(model, prepared.task.test).accuracy;
}

Verdict desk_scale() {
  Verdict v;
  double slowest = 0.0, mean_dy = 0.0, mean_l8 = 0.0, mean_l16 = 0.0;
  std::string per_seed;
  auto run = [&](const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const auto result = run_experiment(cfg);
    slowest = std::max(slowest, seconds_since(start));
    if (result.federation.spent) {
      v.require(result.federation.spent->epsilon <= 2.0, fmt("epsilon %.4f > 2", result.federation.spent->epsilon));
    }
    return result.federation.records.back().metrics->accuracy;
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto lora = desk_config(seed, PeftKind::kLora, 16, Algorithm::kFedAvg);
    const double oracle = pretraining_oracle(lora);
    const double plain = run(lora);
    v.require(plain >= 0.9 * oracle, fmt("seed %.0f: LoRA %.3f < 0.9 x oracle %.3f", seed, plain, oracle));
    const double l8 = run(desk_config(seed, PeftKind::kLora, 8, Algorithm::kDpPeft));
    const double l16 = run(desk_config(seed, PeftKind::kLora, 16, Algorithm::kDpPeft));
    const double dy = run(desk_config(seed, PeftKind::kDyLora, 16, Algorithm::kDpDyLora));
    mean_l8 += l8 / 3;
    mean_l16 += l16 / 3;
    mean_dy += dy / 3;
    per_seed += fmt(" [seed %.0f oracle %.3f lora %.3f", seed, oracle, plain) +
                fmt(" dp-lora8 %.3f dp-lora16 %.3f dp-dylora %.3f]", l8, l16, dy);
  }
  const double best = std::max(mean_l8, mean_l16);
  v.require(std::abs(mean_dy - best) <= 0.05, fmt("dp-dylora mean %.3f vs best dp-lora mean %.3f", mean_dy, best));
  v.require(slowest < 300.0, fmt("slowest run %.1fs", slowest));
  if (v.pass) {
    v.detail = fmt("dp-dylora mean %.3f vs best dp-lora mean %.3f, slowest run %.1fs;", mean_dy, best, slowest) + per_seed;
  }
  return v;
}

// 11. Metrics against brute-force oracles.
Verdict metrics_oracles() {
  Verdict v;
  const auto seqs = test::all_sequences(3, 6);
  auto words = [](const std::vector<int>& s) {
    std::vector<std::string> w;
    for (int t : s) w.push_back(std::string(1, static_cast<char>('a' + t)));
    return w;
  };
  std::vector<std::vector<std::string>> as_words;
  for (const auto& s : seqs) as_words.push_back(words(s));
  std::size_t pairs = 0, mismatches = 0;
  for (std::size_t r = 0; r < seqs.size(); ++r) {
    if (seqs[r].empty()) continue;
    for (std::size_t h = 0; h < seqs.size(); ++h) {
      const std::size_t oracle = test::brute_force_edit_distance(seqs[r], seqs[h]);
      const double wer = word_error_rate(as_words[r], as_words[h]);
      mismatches += align_words(as_words[r], as_words[h]).errors() != oracle ||
                    wer != static_cast<double>(oracle) / static_cast<double>(seqs[r].size());
      ++pairs;
    }
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " WER mismatches");

  RandomSource src(1111);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(draw_uniform_int(src, 2, 12));
    const auto n = static_cast<std::size_t>(draw_uniform_int(src, 1, 300));
    std::vector<int> pred(n), truth(n);
    std::vector<std::size_t> confusion(k * k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(draw_uniform_int(src, 0, k - 1));
      pred[i] = draw_bernoulli(src, 0.5) ? truth[i] : static_cast<int>(draw_uniform_int(src, 0, k - 1));
      ++confusion[truth[i] * k + pred[i]];
    }
    std::size_t trace = 0;
    for (std::size_t c = 0; c < k; ++c) trace += confusion[c * k + c];
    worst = std::max(worst, std::abs(accuracy(pred, truth) - double(trace) / double(n)));
  }
  v.require(worst <= 1e-15, fmt("accuracy error %.3g", worst));
  if (v.pass) v.detail = std::to_string(pairs) + " WER pairs exact; 1000 accuracy cases exact";
  return v;
}

// 12. Determinism across runs and thread counts.
Verdict determinism() {
  Verdict v;
  auto cfg = desk_config(7, PeftKind::kDyLora, 16, Algorithm::kDpDyLora);
  cfg.federation.rounds = 30;
  cfg.federation.aggregation.backend = AggregationBackend::kMasked;
  std::vector<std::string> csvs;
  for (int threads : {1, 8, 8, 1}) {
    omp_set_num_threads(threads);
    csvs.push_back(format_rounds_csv(run_experiment(cfg).federation.records));
  }
  omp_set_num_threads(omp_get_num_procs());
  for (std::size_t i = 1; i < csvs.size(); ++i) v.require(csvs[i] == csvs[0], "run " + std::to_string(i) + " differs");
  if (v.pass) v.detail = "4 runs (threads 1, 8, 8, 1) byte-identical, " + std::to_string(csvs[0].size()) + " bytes";
  return v;
}

}  // namespace
}  // namespace dpfl

int main() {
  using namespace dpfl;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"accountant round-trip", accountant_round_trip},
      {"gaussian RDP closed form", gaussian_closed_form},
      {"pinned conversion values", pinned_conversion},
      {"gradient correctness", gradient_correctness},
      {"zero-delta initialization", zero_delta_init},
      {"clipping contract", clipping_contract},
      {"secure-sum equivalence", secure_sum_equivalence},
      {"rank-sampling expectation equivalence", rank_sampling_equivalence},
      {"fedavg degeneracy", fedavg_degeneracy},
      {"desk-scale end-to-end", desk_scale},
      {"metrics oracles", metrics_oracles},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict verdict;
    try {
      verdict = criteria[i].second();
    } catch (const std::exception& e) {
      verdict.pass = false;
      verdict.detail = std::string("exception: ") + e.what();
    }
    failed += !verdict.pass;
    std::printf("%s %2zu %s: %s\n", verdict.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                verdict.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
