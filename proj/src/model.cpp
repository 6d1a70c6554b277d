// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

void check_batch(const ModelSnapshot& model, const Matrix& x, std::span<const int> labels) {
  if (!model.base) throw ShapeError("model: snapshot has no base");
  if (x.rows() != model.base->input_dim()) {
    throw ShapeError("model: input " + x.shape_string() + " does not match input dim " +
                     std::to_string(model.base->input_dim()));
  }
  if (labels.size() != x.cols()) {
    throw ShapeError("model: " + std::to_string(labels.size()) + " labels for batch of " +
                     std::to_string(x.cols()));
  }
  const auto classes = static_cast<int>(model.base->class_count());
  for (int l : labels) {
    if (l < 0 || l >= classes) {
      throw DataError("model: label " + std::to_string(l) + " outside [0, " +
                      std::to_string(classes) + ")");
    }
  }
}

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::kRelu) {
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
  }
}

// Layer inputs and pre-activations recorded for the backward pass.
struct Trace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

Matrix run_forward(const ModelSnapshot& model, const Matrix& x, std::optional<std::size_t> rank,
                   Trace* trace) {
  Matrix h = x;
  const auto& layers = model.base->layers;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = peft_forward(model.peft, l, layers[l], h, rank);
    if (trace) {
      trace->inputs.push_back(std::move(h));
      trace->pre_activations.push_back(z);
    }
    apply_activation(z, layers[l].activation);
    h = std::move(z);
  }
  return h;
}

double mean_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t c = 0; c < logits.cols(); ++c) {
    double top = logits(0, c);
    for (std::size_t r = 1; r < logits.rows(); ++r) top = std::max(top, logits(r, c));
    double sum = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) sum += std::exp(logits(r, c) - top);
    total += top + std::log(sum) - logits(static_cast<std::size_t>(labels[c]), c);
  }
  return total / static_cast<double>(logits.cols());
}

void axpy(PeftState& y, double a, const PeftState& x) {
  for (std::size_t i = 0; i < y.shared.size(); ++i) {
    auto yd = y.shared[i].data();
    auto xd = x.shared[i].data();
    for (std::size_t k = 0; k < yd.size(); ++k) yd[k] += a * xd[k];
  }
  for (std::size_t l = 0; l < y.layers.size(); ++l) {
    for (std::size_t s = 0; s < y.layers[l].size(); ++s) {
      auto yd = y.layers[l][s].data();
      auto xd = x.layers[l][s].data();
      for (std::size_t k = 0; k < yd.size(); ++k) yd[k] += a * xd[k];
    }
  }
}

}  // namespace

void FrozenBase::validate() const {
  if (layers.empty()) throw ShapeError("FrozenBase: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.rows() != layer.out_dim() || layer.bias.cols() != 1) {
      throw ShapeError("FrozenBase: layer " + std::to_string(l) + " bias " +
                       layer.bias.shape_string() + " does not match weight " +
                       layer.weight.shape_string());
    }
    if (l + 1 < layers.size() && layer.out_dim() != layers[l + 1].in_dim()) {
      throw ShapeError("FrozenBase: layer " + std::to_string(l) + " output " +
                       std::to_string(layer.out_dim()) + " does not feed layer input " +
                       std::to_string(layers[l + 1].in_dim()));
    }
  }
}

std::uint64_t FrozenBase::fingerprint() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::span<const double> values) {
    for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  };
  for (const auto& layer : layers) {
    feed(layer.weight.data());
    feed(layer.bias.data());
    h = mix64(h ^ static_cast<std::uint64_t>(layer.activation));
  }
  return h;
}

FrozenBase make_random_base(std::size_t input_dim, std::span<const std::size_t> hidden,
                            std::size_t classes, RandomSource& source) {
  if (input_dim == 0 || classes < 2) throw ShapeError("make_random_base: bad dimensions");
  FrozenBase base;
  std::size_t in = input_dim;
  auto add = [&](std::size_t out, Activation act) {
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    base.layers.push_back({draw_gaussian(source, 0.0, sd, out, in), Matrix(out, 1), act});
    in = out;
  };
  for (std::size_t width : hidden) add(width, Activation::kRelu);
  add(classes, Activation::kNone);
  return base;
}

Matrix softmax_columns(const Matrix& logits) {
  Matrix p = logits;
  for (std::size_t c = 0; c < p.cols(); ++c) {
    double top = p(0, c);
    for (std::size_t r = 1; r < p.rows(); ++r) top = std::max(top, p(r, c));
    double sum = 0.0;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      p(r, c) = std::exp(p(r, c) - top);
      sum += p(r, c);
    }
    for (std::size_t r = 0; r < p.rows(); ++r) p(r, c) /= sum;
  }
  return p;
}

ForwardResult forward_loss(const ModelSnapshot& model, const Matrix& x,
                           std::span<const int> labels, std::optional<std::size_t> rank) {
  check_batch(model, x, labels);
  ForwardResult out;
  out.logits = run_forward(model, x, rank, nullptr);
  out.loss = mean_cross_entropy(out.logits, labels);
  return out;
}

LossGradient loss_gradient(const ModelSnapshot& model, const Matrix& x,
                           std::span<const int> labels, std::optional<std::size_t> rank) {
  check_batch(model, x, labels);
  Trace trace;
  const Matrix logits = run_forward(model, x, rank, &trace);
  LossGradient out;
  out.loss = mean_cross_entropy(logits, labels);
  out.gradient = model.peft.zeros_like();

  // d(mean CE)/d(logits) = (softmax - onehot) / batch
  Matrix upstream = softmax_columns(logits);
  const double inv_batch = 1.0 / static_cast<double>(x.cols());
  for (std::size_t c = 0; c < upstream.cols(); ++c) {
    upstream(static_cast<std::size_t>(labels[c]), c) -= 1.0;
  }
  upstream *= inv_batch;

  const auto& layers = model.base->layers;
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (layers[l].activation == Activation::kRelu) {
      const auto z = trace.pre_activations[l].data();
      auto d = upstream.data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(z[i] > 0.0)) d[i] = 0.0;
      }
    }
    upstream = peft_backward(model.peft, l, layers[l], trace.inputs[l], upstream, out.gradient,
                             rank);
  }
  return out;
}

std::vector<int> predict(const ModelSnapshot& model, const Matrix& x,
                         std::optional<std::size_t> rank) {
  if (x.rows() != model.base->input_dim()) {
    throw ShapeError("predict: input " + x.shape_string() + " does not match model");
  }
  const Matrix logits = run_forward(model, x, rank, nullptr);
  std::vector<int> out(logits.cols());
  for (std::size_t c = 0; c < logits.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < logits.rows(); ++r) {
      if (logits(r, c) > logits(best, c)) best = r;
    }
    out[c] = static_cast<int>(best);
  }
  return out;
}

Evaluation evaluate(const ModelSnapshot& model, const Dataset& data,
                    std::optional<std::size_t> rank) {
  if (data.empty()) throw DataError("evaluate: empty dataset");
  const Matrix x = data.columns();
  const auto result = forward_loss(model, x, data.labels, rank);
  std::size_t hits = 0;
  for (std::size_t c = 0; c < result.logits.cols(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < result.logits.rows(); ++r) {
      if (result.logits(r, c) > result.logits(best, c)) best = r;
    }
    hits += static_cast<int>(best) == data.labels[c];
  }
  return {static_cast<double>(hits) / static_cast<double>(data.size()), result.loss};
}

LocalUpdate local_sgd(const ModelSnapshot& model, const Dataset& data,
                      const LocalTrainingOptions& options, std::optional<std::size_t> rank,
                      RandomSource& source) {
  if (options.epochs < 1) throw ParameterError("local_sgd: epochs must be >= 1");
  if (options.batch_size < 1) throw ParameterError("local_sgd: batch size must be >= 1");
  if (!(options.learning_rate >= 0.0)) {
    throw ParameterError("local_sgd: learning rate must be >= 0");
  }
  check_rank_override(model.peft.method, rank);

  LocalUpdate update;
  const std::vector<double> start = flatten(model.peft);
  if (data.empty()) {
    update.delta.assign(start.size(), 0.0);
    update.empty_data = true;
    return update;
  }

  ModelSnapshot local = model;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> labels;
  for (std::size_t e = 0; e < options.epochs; ++e) {
    RandomSource shuffle = source.derive(Purpose::kShuffle, {e});
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle);
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      labels.clear();
      for (std::size_t i : batch) labels.push_back(data.labels[i]);
      const auto lg = loss_gradient(local, data.columns(batch), labels, rank);
      axpy(local.peft, -options.learning_rate, lg.gradient);
      ++update.steps;
    }
  }

  update.delta = flatten(local.peft);
  for (std::size_t i = 0; i < start.size(); ++i) update.delta[i] -= start[i];
  return update;
}

FrozenBase pretrain_base(const Dataset& data, const PretrainOptions& options,
                         RandomSource& source) {
  if (data.empty()) throw DataError("pretrain_base: empty dataset");
  data.validate();
  if (data.dim != options.input_dim) {
    throw DataError("pretrain_base: data has " + std::to_string(data.dim) +
                    " features, model input dim is " + std::to_string(options.input_dim));
  }
  RandomSource init = source.derive(Purpose::kInit);
  auto base = std::make_shared<FrozenBase>(
      make_random_base(options.input_dim, options.hidden, data.class_count, init));
  if (options.epochs == 0) return *base;

  PeftMethod full;
  full.kind = PeftKind::kFull;
  ModelSnapshot model{base, {}, 0};
  RandomSource unused = source.derive(Purpose::kInit, {1});
  model.peft = init_peft(full, base->layers, unused);

  LocalTrainingOptions sgd{options.epochs, options.batch_size, options.learning_rate};
  RandomSource train = source.derive(Purpose::kPretrain);
  const LocalUpdate update = local_sgd(model, data, sgd, std::nullopt, train);
  add_flat(model.peft, update.delta);

  FrozenBase trained = *base;
  for (std::size_t l = 0; l < trained.layers.size(); ++l) {
    trained.layers[l].weight = model.peft.layers[l][slot::kFullWeight];
    trained.layers[l].bias = model.peft.layers[l][slot::kFullBias];
  }
  return trained;
}

}  // namespace dpfl
