// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter-efficient fine-tuning strategies attached to frozen dense layers.
//
// Every method contributes to the pre-activation output of a dense layer
// z = W x + b, where W is out x in and x is in x batch (one column per
// sample):
//
//   full       z = W' x + b'                       (W', b' trainable copies)
//   bitfit     z = W x + b'                        (b' trainable copy)
//   lora       z = W x + b + B (A x)               B: out x r,  A: r x in
//   dylora     same as lora with B[:, :k], A[:k, :] for the sampled rank k
//   loha       z = W x + b + ((B1 A1) o (B2 A2)) x
//   adalora    z = W x + b + B diag(lambda) A x    pruned slices masked out
//   compacter  z = W x + b + (sum_i S_i (x) s_i t_i) x + c
//              S_i: n x n shared by all layers, s_i: out/n x r, t_i: r x in/n
//   adapter    u = W x + b;  z = U relu(D u + d) + u
//              U: out x r (up), D: r x out (down), d: r x 1
//
// Adapter is the only sequential (post-layer) method; the low-rank family
// adds in parallel to the frozen path.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpfl/matrix.hpp"
#include "dpfl/random.hpp"

namespace dpfl {

enum class Activation { kRelu, kNone };

/// A frozen dense layer. `bias` is out x 1.
struct DenseLayer {
  Matrix weight;
  Matrix bias;
  Activation activation = Activation::kNone;

  std::size_t out_dim() const noexcept { return weight.rows(); }
  std::size_t in_dim() const noexcept { return weight.cols(); }
};

enum class PeftKind { kFull, kAdapter, kCompacter, kBitFit, kLora, kLoha, kAdaLora, kDyLora };

std::string_view to_string(PeftKind kind);
std::optional<PeftKind> parse_peft_kind(std::string_view name);

struct PeftMethod {
  PeftKind kind = PeftKind::kLora;
  /// r for lora / loha / adalora / compacter, bottleneck width for adapter.
  std::size_t rank = 8;
  std::size_t min_rank = 1;
  std::size_t max_rank = 16;
  /// Number of Kronecker terms for compacter.
  std::size_t compacter_terms = 2;
  std::size_t target_rank = 4;
  std::size_t prune_interval = 10;
  /// Standard deviation of the Gaussian-initialized factor.
  double init_std = 0.02;

  /// Rejects hyperparameters that are invalid independent of layer shapes.
  void validate() const;
  /// Width of the stored low-rank factors (max_rank for dylora).
  std::size_t stored_rank() const noexcept;
  bool has_rank_override() const noexcept { return kind == PeftKind::kDyLora; }
};

/// Trainable tensors of one method, per layer, plus tensors shared by all
/// layers (compacter only). Gradients use the same type.
struct PeftState {
  PeftMethod method;
  std::vector<Matrix> shared;
  std::vector<std::vector<Matrix>> layers;
  /// adalora only: per layer, 1 if singular-value slice k is still trainable.
  std::vector<std::vector<std::uint8_t>> active_slices;

  std::size_t parameter_count() const noexcept;
  /// Same structure, every entry zero.
  PeftState zeros_like() const;

  friend bool operator==(const PeftState& a, const PeftState& b) {
    return a.shared == b.shared && a.layers == b.layers && a.active_slices == b.active_slices;
  }
};

/// Tensor slots inside PeftState::layers[i] for each method.
namespace slot {
inline constexpr std::size_t kFullWeight = 0, kFullBias = 1;
inline constexpr std::size_t kBitFitBias = 0;
inline constexpr std::size_t kLoraB = 0, kLoraA = 1;
inline constexpr std::size_t kLohaB1 = 0, kLohaA1 = 1, kLohaB2 = 2, kLohaA2 = 3;
inline constexpr std::size_t kAdaB = 0, kAdaLambda = 1, kAdaA = 2;
inline constexpr std::size_t kAdapterUp = 0, kAdapterDown = 1, kAdapterDownBias = 2;
/// Compacter: s_i at i, t_i at n + i, layer bias at 2n.
inline constexpr std::size_t compacter_s(std::size_t i) { return i; }
inline constexpr std::size_t compacter_t(std::size_t n, std::size_t i) { return n + i; }
inline constexpr std::size_t compacter_bias(std::size_t n) { return 2 * n; }
}  // namespace slot

/// Closed-form trainable-parameter count of `method` on layers of the given
/// (out, in) shapes.
std::size_t trainable_parameter_count(const PeftMethod& method,
                                      std::span<const DenseLayer> layers);

PeftState init_peft(const PeftMethod& method, std::span<const DenseLayer> layers,
                    RandomSource& source);

/// Output of one frozen layer with the method's contribution, before the
/// layer's activation. `rank` is only accepted for dylora.
Matrix peft_forward(const PeftState& state, std::size_t layer_index, const DenseLayer& frozen,
                    const Matrix& x, std::optional<std::size_t> rank = std::nullopt);

/// Back-propagates `upstream` (dL/dz, out x batch) through the layer.
/// Parameter gradients are accumulated into `grad` (shaped like `state`);
/// returns dL/dx. The frozen layer never receives a gradient.
Matrix peft_backward(const PeftState& state, std::size_t layer_index, const DenseLayer& frozen,
                     const Matrix& x, const Matrix& upstream, PeftState& grad,
                     std::optional<std::size_t> rank = std::nullopt);

/// Convenience wrapper: fresh gradient for a single-layer call.
PeftState peft_gradients(const PeftState& state, std::size_t layer_index,
                         const DenseLayer& frozen, const Matrix& x, const Matrix& upstream,
                         std::optional<std::size_t> rank = std::nullopt);

struct TruncatedFactors {
  Matrix up;    // B[:, :rank]
  Matrix down;  // A[:rank, :]
};

TruncatedFactors truncate_dylora(const PeftState& state, std::size_t layer_index,
                                 std::size_t rank);

/// Keeps at most `target_rank` nonzero singular values per layer, zeroing
/// the smallest-magnitude ones (ties: lower index first) and freezing their
/// factor slices. `importance[layer][k]` defaults to |lambda_k|.
PeftState adalora_prune(const PeftState& state, std::size_t target_rank,
                        const std::vector<std::vector<double>>* importance = nullptr);

/// Flat view: shared tensors, then each layer's tensors in slot order,
/// each row-major.
std::vector<double> flatten(const PeftState& state);
PeftState unflatten(const PeftState& layout, std::span<const double> flat);
/// state += scale * flat
void add_flat(PeftState& state, std::span<const double> flat, double scale = 1.0);

/// Flat indices that training can change: for dylora with a rank, the
/// leading columns of B and rows of A; for adalora, the unpruned slices;
/// otherwise every coordinate.
std::vector<std::size_t> active_coordinates(const PeftState& state,
                                            std::optional<std::size_t> rank = std::nullopt);

/// Checks that `rank` is usable for this state's method.
void check_rank_override(const PeftMethod& method, std::optional<std::size_t> rank);

}  // namespace dpfl
