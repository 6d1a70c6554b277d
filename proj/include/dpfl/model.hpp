// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Frozen MLP classifier hosting a PEFT strategy on every dense layer, with
// exact backpropagation and mean cross-entropy loss.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dpfl/data.hpp"
#include "dpfl/matrix.hpp"
#include "dpfl/peft.hpp"
#include "dpfl/random.hpp"

namespace dpfl {

struct FrozenBase {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t class_count() const { return layers.back().out_dim(); }
  /// Throws ShapeError unless layer i's output feeds layer i+1.
  void validate() const;
  /// Hash of every weight and bias bit pattern.
  std::uint64_t fingerprint() const;
};

/// He-initialized base: hidden layers use ReLU, the output layer none.
FrozenBase make_random_base(std::size_t input_dim, std::span<const std::size_t> hidden,
                            std::size_t classes, RandomSource& source);

struct ModelSnapshot {
  std::shared_ptr<const FrozenBase> base;
  PeftState peft;
  std::size_t round = 0;
};

struct ForwardResult {
  double loss = 0.0;
  Matrix logits;  // classes x batch
};

/// Column-wise softmax.
Matrix softmax_columns(const Matrix& logits);

/// Mean cross-entropy of `labels` under the model; x is input_dim x batch.
ForwardResult forward_loss(const ModelSnapshot& model, const Matrix& x,
                           std::span<const int> labels,
                           std::optional<std::size_t> rank = std::nullopt);

struct LossGradient {
  double loss = 0.0;
  PeftState gradient;
};

LossGradient loss_gradient(const ModelSnapshot& model, const Matrix& x,
                           std::span<const int> labels,
                           std::optional<std::size_t> rank = std::nullopt);

std::vector<int> predict(const ModelSnapshot& model, const Matrix& x,
                         std::optional<std::size_t> rank = std::nullopt);

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

Evaluation evaluate(const ModelSnapshot& model, const Dataset& data,
                    std::optional<std::size_t> rank = std::nullopt);

struct LocalTrainingOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  double learning_rate = 0.1;
};

struct LocalUpdate {
  /// flatten(trained) - flatten(start).
  std::vector<double> delta;
  std::size_t steps = 0;
  /// Set when the client had no data; delta is then all zeros.
  bool empty_data = false;
};

/// Plain minibatch SGD on the trainable parameters only. Batch order is a
/// fresh shuffle per epoch drawn from `source`.
LocalUpdate local_sgd(const ModelSnapshot& model, const Dataset& data,
                      const LocalTrainingOptions& options, std::optional<std::size_t> rank,
                      RandomSource& source);

struct PretrainOptions {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{32, 32};
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
};

/// Trains every weight of a random base with SGD, then freezes it.
FrozenBase pretrain_base(const Dataset& data, const PretrainOptions& options,
                         RandomSource& source);

}  // namespace dpfl
