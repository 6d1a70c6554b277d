// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/peft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

struct KindName {
  PeftKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {PeftKind::kFull, "full"},       {PeftKind::kAdapter, "adapter"},
    {PeftKind::kCompacter, "compacter"}, {PeftKind::kBitFit, "bitfit"},
    {PeftKind::kLora, "lora"},       {PeftKind::kLoha, "loha"},
    {PeftKind::kAdaLora, "adalora"}, {PeftKind::kDyLora, "dylora"},
};

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix frozen_linear(const DenseLayer& frozen, const Matrix& x) {
  Matrix z = matmul(frozen.weight, x);
  add_column_broadcast(z, frozen.bias);
  return z;
}

// Adds `part` into the top-left corner of `target`.
void accumulate_corner(Matrix& target, const Matrix& part) {
  for (std::size_t i = 0; i < part.rows(); ++i) {
    for (std::size_t j = 0; j < part.cols(); ++j) target(i, j) += part(i, j);
  }
}

std::size_t effective_rank(const PeftState& state, std::optional<std::size_t> rank) {
  check_rank_override(state.method, rank);
  return rank.value_or(state.method.stored_rank());
}

// B with column k scaled by lambda_k (zero for pruned slices).
Matrix scaled_up_projection(const PeftState& state, std::size_t layer) {
  const auto& t = state.layers[layer];
  Matrix b = t[slot::kAdaB];
  const Matrix& lambda = t[slot::kAdaLambda];
  const auto& active = state.active_slices[layer];
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t k = 0; k < b.cols(); ++k) b(i, k) *= active[k] ? lambda(k, 0) : 0.0;
  }
  return b;
}

Matrix compacter_delta(const PeftState& state, std::size_t layer) {
  const std::size_t n = state.method.compacter_terms;
  const auto& t = state.layers[layer];
  Matrix delta;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix term = kronecker(state.shared[i],
                            matmul(t[slot::compacter_s(i)], t[slot::compacter_t(n, i)]));
    if (delta.empty()) {
      delta = std::move(term);
    } else {
      delta += term;
    }
  }
  return delta;
}

Matrix loha_delta(const std::vector<Matrix>& t) {
  return hadamard(matmul(t[slot::kLohaB1], t[slot::kLohaA1]),
                  matmul(t[slot::kLohaB2], t[slot::kLohaA2]));
}

void check_layer(const PeftState& state, std::size_t layer_index, const DenseLayer& frozen,
                 const Matrix& x) {
  if (layer_index >= state.layers.size()) {
    throw ShapeError("peft: layer index " + std::to_string(layer_index) + " out of range");
  }
  if (x.rows() != frozen.in_dim()) {
    throw ShapeError("peft: input " + x.shape_string() + " does not match layer " +
                     frozen.weight.shape_string());
  }
}

}  // namespace

std::string_view to_string(PeftKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

std::optional<PeftKind> parse_peft_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  return std::nullopt;
}

void PeftMethod::validate() const {
  if (!(init_std >= 0.0) || !std::isfinite(init_std)) {
    throw ConfigurationError("init_std must be finite and >= 0");
  }
  switch (kind) {
    case PeftKind::kFull:
    case PeftKind::kBitFit:
      return;
    case PeftKind::kDyLora:
      if (min_rank < 1) throw ConfigurationError("dylora: min_rank must be >= 1");
      if (min_rank > max_rank) throw ConfigurationError("dylora: min_rank must be <= max_rank");
      return;
    case PeftKind::kCompacter:
      if (compacter_terms < 1) throw ConfigurationError("compacter: n must be >= 1");
      [[fallthrough]];
    case PeftKind::kAdapter:
    case PeftKind::kLora:
    case PeftKind::kLoha:
      if (rank < 1) throw ConfigurationError(std::string(to_string(kind)) + ": rank must be >= 1");
      return;
    case PeftKind::kAdaLora:
      if (rank < 1) throw ConfigurationError("adalora: rank must be >= 1");
      if (target_rank < 1 || target_rank > rank) {
        throw ConfigurationError("adalora: target_rank must be in [1, rank]");
      }
      if (prune_interval < 1) throw ConfigurationError("adalora: prune_interval must be >= 1");
      return;
  }
}

std::size_t PeftMethod::stored_rank() const noexcept {
  return kind == PeftKind::kDyLora ? max_rank : rank;
}

void check_rank_override(const PeftMethod& method, std::optional<std::size_t> rank) {
  if (!rank) return;
  if (method.kind != PeftKind::kDyLora) {
    throw ParameterError("rank override is only valid for dylora, not " +
                         std::string(to_string(method.kind)));
  }
  if (*rank < method.min_rank || *rank > method.max_rank) {
    throw ParameterError("rank override " + std::to_string(*rank) + " outside [" +
                         std::to_string(method.min_rank) + ", " +
                         std::to_string(method.max_rank) + "]");
  }
}

std::size_t PeftState::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : shared) n += m.size();
  for (const auto& layer : layers) {
    for (const auto& m : layer) n += m.size();
  }
  return n;
}

PeftState PeftState::zeros_like() const {
  PeftState z = *this;
  for (auto& m : z.shared) std::fill(m.data().begin(), m.data().end(), 0.0);
  for (auto& layer : z.layers) {
    for (auto& m : layer) std::fill(m.data().begin(), m.data().end(), 0.0);
  }
  return z;
}

std::size_t trainable_parameter_count(const PeftMethod& method,
                                      std::span<const DenseLayer> layers) {
  const std::size_t r = method.stored_rank();
  const std::size_t n = method.compacter_terms;
  std::size_t total = method.kind == PeftKind::kCompacter ? n * n * n : 0;
  for (const auto& layer : layers) {
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    switch (method.kind) {
      case PeftKind::kFull: total += out * in + out; break;
      case PeftKind::kBitFit: total += out; break;
      case PeftKind::kLora:
      case PeftKind::kDyLora: total += r * (out + in); break;
      case PeftKind::kLoha: total += 2 * r * (out + in); break;
      case PeftKind::kAdaLora: total += r * (out + in) + r; break;
      case PeftKind::kAdapter: total += 2 * out * r + r; break;
      case PeftKind::kCompacter: total += n * r * (out / n + in / n) + out; break;
    }
  }
  return total;
}

PeftState init_peft(const PeftMethod& method, std::span<const DenseLayer> layers,
                    RandomSource& source) {
  method.validate();
  PeftState state;
  state.method = method;
  const std::size_t r = method.stored_rank();
  const double sd = method.init_std;
  const std::size_t n = method.compacter_terms;

  if (method.kind == PeftKind::kCompacter) {
    for (const auto& layer : layers) {
      if (layer.out_dim() % n != 0 || layer.in_dim() % n != 0) {
        throw ConfigurationError("compacter: n=" + std::to_string(n) +
                                 " does not divide layer " + layer.weight.shape_string());
      }
    }
    // Shared mixing matrices at unit scale so they do not shrink the
    // factor gradients further.
    for (std::size_t i = 0; i < n; ++i) {
      state.shared.push_back(draw_gaussian(source, 0.0, 1.0 / std::sqrt(double(n)), n, n));
    }
  }

  for (const auto& layer : layers) {
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    std::vector<Matrix> t;
    switch (method.kind) {
      case PeftKind::kFull:
        t = {layer.weight, layer.bias};
        break;
      case PeftKind::kBitFit:
        t = {layer.bias};
        break;
      case PeftKind::kLora:
      case PeftKind::kDyLora:
        // Up-projection Gaussian, down-projection zero: B A = 0 at start.
        t = {draw_gaussian(source, 0.0, sd, out, r), Matrix(r, in)};
        break;
      case PeftKind::kLoha: {
        // Only A1 is zero, so (B1 A1) o (B2 A2) = 0 while A1 still has a
        // nonzero gradient.
        Matrix b1 = draw_gaussian(source, 0.0, sd, out, r);
        Matrix b2 = draw_gaussian(source, 0.0, sd, out, r);
        Matrix a2 = draw_gaussian(source, 0.0, sd, r, in);
        t = {std::move(b1), Matrix(r, in), std::move(b2), std::move(a2)};
        break;
      }
      case PeftKind::kAdaLora:
        t = {draw_gaussian(source, 0.0, sd, out, r), Matrix(r, 1, 1.0), Matrix(r, in)};
        state.active_slices.emplace_back(r, std::uint8_t{1});
        break;
      case PeftKind::kAdapter:
        t = {Matrix(out, r), draw_gaussian(source, 0.0, sd, r, out), Matrix(r, 1)};
        break;
      case PeftKind::kCompacter:
        for (std::size_t i = 0; i < n; ++i) t.emplace_back(out / n, r);
        for (std::size_t i = 0; i < n; ++i) t.push_back(draw_gaussian(source, 0.0, sd, r, in / n));
        t.emplace_back(out, 1);
        break;
    }
    state.layers.push_back(std::move(t));
  }
  return state;
}

Matrix peft_forward(const PeftState& state, std::size_t layer_index, const DenseLayer& frozen,
                    const Matrix& x, std::optional<std::size_t> rank) {
  check_layer(state, layer_index, frozen, x);
  const std::size_t k = effective_rank(state, rank);
  const auto& t = state.layers[layer_index];

  switch (state.method.kind) {
    case PeftKind::kFull: {
      Matrix z = matmul(t[slot::kFullWeight], x);
      add_column_broadcast(z, t[slot::kFullBias]);
      return z;
    }
    case PeftKind::kBitFit: {
      Matrix z = matmul(frozen.weight, x);
      add_column_broadcast(z, t[slot::kBitFitBias]);
      return z;
    }
    case PeftKind::kLora:
    case PeftKind::kDyLora: {
      Matrix z = frozen_linear(frozen, x);
      if (k == t[slot::kLoraB].cols()) {
        z += matmul(t[slot::kLoraB], matmul(t[slot::kLoraA], x));
      } else {
        const auto f = truncate_dylora(state, layer_index, k);
        z += matmul(f.up, matmul(f.down, x));
      }
      return z;
    }
    case PeftKind::kLoha: {
      Matrix z = frozen_linear(frozen, x);
      z += matmul(loha_delta(t), x);
      return z;
    }
    case PeftKind::kAdaLora: {
      Matrix z = frozen_linear(frozen, x);
      z += matmul(scaled_up_projection(state, layer_index), matmul(t[slot::kAdaA], x));
      return z;
    }
    case PeftKind::kCompacter: {
      Matrix z = frozen_linear(frozen, x);
      Matrix delta = matmul(compacter_delta(state, layer_index), x);
      add_column_broadcast(delta, t[slot::compacter_bias(state.method.compacter_terms)]);
      z += delta;
      return z;
    }
    case PeftKind::kAdapter: {
      Matrix u = frozen_linear(frozen, x);
      Matrix v = matmul(t[slot::kAdapterDown], u);
      add_column_broadcast(v, t[slot::kAdapterDownBias]);
      Matrix z = matmul(t[slot::kAdapterUp], relu(v));
      z += u;
      return z;
    }
  }
  throw ConfigurationError("peft_forward: unknown method");
}

Matrix peft_backward(const PeftState& state, std::size_t layer_index, const DenseLayer& frozen,
                     const Matrix& x, const Matrix& upstream, PeftState& grad,
                     std::optional<std::size_t> rank) {
  check_layer(state, layer_index, frozen, x);
  if (upstream.rows() != frozen.out_dim() || upstream.cols() != x.cols()) {
    throw ShapeError("peft_backward: upstream " + upstream.shape_string() + " does not match " +
                     std::to_string(frozen.out_dim()) + "x" + std::to_string(x.cols()));
  }
  const std::size_t k = effective_rank(state, rank);
  const auto& t = state.layers[layer_index];
  auto& g = grad.layers[layer_index];
  const Matrix xt = x.transpose();

  switch (state.method.kind) {
    case PeftKind::kFull: {
      g[slot::kFullWeight] += matmul(upstream, xt);
      g[slot::kFullBias] += row_sums(upstream);
      return matmul(t[slot::kFullWeight].transpose(), upstream);
    }
    case PeftKind::kBitFit: {
      g[slot::kBitFitBias] += row_sums(upstream);
      return matmul(frozen.weight.transpose(), upstream);
    }
    case PeftKind::kLora:
    case PeftKind::kDyLora: {
      const Matrix up = k == t[slot::kLoraB].cols() ? t[slot::kLoraB]
                                                   : t[slot::kLoraB].leading_columns(k);
      const Matrix down = k == t[slot::kLoraA].rows() ? t[slot::kLoraA]
                                                     : t[slot::kLoraA].leading_rows(k);
      const Matrix hidden = matmul(down, x);                      // k x batch
      const Matrix back = matmul(up.transpose(), upstream);       // k x batch
      accumulate_corner(g[slot::kLoraB], matmul(upstream, hidden.transpose()));
      accumulate_corner(g[slot::kLoraA], matmul(back, xt));
      Matrix dx = matmul(frozen.weight.transpose(), upstream);
      dx += matmul(down.transpose(), back);
      return dx;
    }
    case PeftKind::kLoha: {
      const Matrix outer = matmul(upstream, xt);
      const Matrix m1 = matmul(t[slot::kLohaB1], t[slot::kLohaA1]);
      const Matrix m2 = matmul(t[slot::kLohaB2], t[slot::kLohaA2]);
      const Matrix dm1 = hadamard(outer, m2);
      const Matrix dm2 = hadamard(outer, m1);
      g[slot::kLohaB1] += matmul(dm1, t[slot::kLohaA1].transpose());
      g[slot::kLohaA1] += matmul(t[slot::kLohaB1].transpose(), dm1);
      g[slot::kLohaB2] += matmul(dm2, t[slot::kLohaA2].transpose());
      g[slot::kLohaA2] += matmul(t[slot::kLohaB2].transpose(), dm2);
      return matmul((frozen.weight + hadamard(m1, m2)).transpose(), upstream);
    }
    case PeftKind::kAdaLora: {
      const Matrix& b = t[slot::kAdaB];
      const Matrix& a = t[slot::kAdaA];
      const Matrix& lambda = t[slot::kAdaLambda];
      const auto& active = state.active_slices[layer_index];
      const Matrix outer = matmul(upstream, xt);                  // out x in
      const Matrix outer_at = matmul(outer, a.transpose());       // out x r
      const Matrix bt_outer = matmul(b.transpose(), outer);       // r x in
      const std::size_t r = lambda.rows();
      Matrix db(b.rows(), r), da(r, a.cols()), dl(r, 1);
      for (std::size_t s = 0; s < r; ++s) {
        if (!active[s]) continue;
        const double l = lambda(s, 0);
        for (std::size_t i = 0; i < b.rows(); ++i) db(i, s) = outer_at(i, s) * l;
        double diag = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
          da(s, j) = l * bt_outer(s, j);
          diag += bt_outer(s, j) * a(s, j);
        }
        dl(s, 0) = diag;
      }
      g[slot::kAdaB] += db;
      g[slot::kAdaLambda] += dl;
      g[slot::kAdaA] += da;
      Matrix dx = matmul(frozen.weight.transpose(), upstream);
      dx += matmul(a.transpose(), matmul(scaled_up_projection(state, layer_index).transpose(),
                                         upstream));
      return dx;
    }
    case PeftKind::kCompacter: {
      const std::size_t n = state.method.compacter_terms;
      const Matrix outer = matmul(upstream, xt);                  // out x in
      const std::size_t ro = frozen.out_dim() / n, ci = frozen.in_dim() / n;
      for (std::size_t i = 0; i < n; ++i) {
        const Matrix& s = t[slot::compacter_s(i)];
        const Matrix& tt = t[slot::compacter_t(n, i)];
        const Matrix& mix = state.shared[i];
        const Matrix m = matmul(s, tt);                           // ro x ci
        Matrix dm(ro, ci);
        Matrix dmix(n, n);
        for (std::size_t p = 0; p < n; ++p) {
          for (std::size_t q = 0; q < n; ++q) {
            double acc = 0.0;
            for (std::size_t r = 0; r < ro; ++r) {
              for (std::size_t c = 0; c < ci; ++c) {
                const double gv = outer(p * ro + r, q * ci + c);
                acc += gv * m(r, c);
                dm(r, c) += mix(p, q) * gv;
              }
            }
            dmix(p, q) = acc;
          }
        }
        grad.shared[i] += dmix;
        g[slot::compacter_s(i)] += matmul(dm, tt.transpose());
        g[slot::compacter_t(n, i)] += matmul(s.transpose(), dm);
      }
      g[slot::compacter_bias(n)] += row_sums(upstream);
      return matmul((frozen.weight + compacter_delta(state, layer_index)).transpose(), upstream);
    }
    case PeftKind::kAdapter: {
      const Matrix& up = t[slot::kAdapterUp];
      const Matrix& down = t[slot::kAdapterDown];
      const Matrix u = frozen_linear(frozen, x);
      Matrix v = matmul(down, u);
      add_column_broadcast(v, t[slot::kAdapterDownBias]);
      const Matrix act = relu(v);
      g[slot::kAdapterUp] += matmul(upstream, act.transpose());
      Matrix dv = matmul(up.transpose(), upstream);
      for (std::size_t i = 0; i < dv.size(); ++i) {
        if (!(v.data()[i] > 0.0)) dv.data()[i] = 0.0;
      }
      g[slot::kAdapterDown] += matmul(dv, u.transpose());
      g[slot::kAdapterDownBias] += row_sums(dv);
      Matrix du = upstream;
      du += matmul(down.transpose(), dv);
      return matmul(frozen.weight.transpose(), du);
    }
  }
  throw ConfigurationError("peft_backward: unknown method");
}

PeftState peft_gradients(const PeftState& state, std::size_t layer_index,
                         const DenseLayer& frozen, const Matrix& x, const Matrix& upstream,
                         std::optional<std::size_t> rank) {
  PeftState grad = state.zeros_like();
  peft_backward(state, layer_index, frozen, x, upstream, grad, rank);
  return grad;
}

TruncatedFactors truncate_dylora(const PeftState& state, std::size_t layer_index,
                                 std::size_t rank) {
  if (state.method.kind != PeftKind::kDyLora && state.method.kind != PeftKind::kLora) {
    throw ParameterError("truncate_dylora: method has no B/A factors");
  }
  if (state.method.kind == PeftKind::kDyLora) {
    check_rank_override(state.method, rank);
  } else if (rank < 1 || rank > state.method.rank) {
    throw ParameterError("truncate_dylora: rank out of range");
  }
  const auto& t = state.layers.at(layer_index);
  return {t[slot::kLoraB].leading_columns(rank), t[slot::kLoraA].leading_rows(rank)};
}

PeftState adalora_prune(const PeftState& state, std::size_t target_rank,
                        const std::vector<std::vector<double>>* importance) {
  if (state.method.kind != PeftKind::kAdaLora) {
    throw ParameterError("adalora_prune: state is not adalora");
  }
  PeftState out = state;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    Matrix& lambda = out.layers[l][slot::kAdaLambda];
    auto& active = out.active_slices[l];
    std::vector<std::size_t> alive;
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (active[k]) alive.push_back(k);
    }
    if (alive.size() <= target_rank) continue;
    auto score = [&](std::size_t k) {
      return importance ? importance->at(l).at(k) : std::abs(lambda(k, 0));
    };
    std::stable_sort(alive.begin(), alive.end(),
                     [&](std::size_t a, std::size_t b) { return score(a) < score(b); });
    for (std::size_t i = 0; i + target_rank < alive.size(); ++i) {
      lambda(alive[i], 0) = 0.0;
      active[alive[i]] = 0;
    }
  }
  return out;
}

std::vector<double> flatten(const PeftState& state) {
  std::vector<double> flat;
  flat.reserve(state.parameter_count());
  for (const auto& m : state.shared) flat.insert(flat.end(), m.data().begin(), m.data().end());
  for (const auto& layer : state.layers) {
    for (const auto& m : layer) flat.insert(flat.end(), m.data().begin(), m.data().end());
  }
  return flat;
}

PeftState unflatten(const PeftState& layout, std::span<const double> flat) {
  if (flat.size() != layout.parameter_count()) {
    throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " +
                     std::to_string(layout.parameter_count()) + " parameters");
  }
  PeftState out = layout;
  std::size_t pos = 0;
  auto fill = [&](Matrix& m) {
    std::copy_n(flat.begin() + pos, m.size(), m.data().begin());
    pos += m.size();
  };
  for (auto& m : out.shared) fill(m);
  for (auto& layer : out.layers) {
    for (auto& m : layer) fill(m);
  }
  return out;
}

void add_flat(PeftState& state, std::span<const double> flat, double scale) {
  if (flat.size() != state.parameter_count()) {
    throw ShapeError("add_flat: length mismatch");
  }
  std::size_t pos = 0;
  auto add = [&](Matrix& m) {
    auto d = m.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * flat[pos + i];
    pos += d.size();
  };
  for (auto& m : state.shared) add(m);
  for (auto& layer : state.layers) {
    for (auto& m : layer) add(m);
  }
}

std::vector<std::size_t> active_coordinates(const PeftState& state,
                                            std::optional<std::size_t> rank) {
  const std::size_t k = effective_rank(state, rank);
  std::vector<std::size_t> idx;
  std::size_t pos = 0;
  for (const auto& m : state.shared) {
    for (std::size_t i = 0; i < m.size(); ++i) idx.push_back(pos + i);
    pos += m.size();
  }
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& layer = state.layers[l];
    for (std::size_t s = 0; s < layer.size(); ++s) {
      const Matrix& m = layer[s];
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
          bool keep = true;
          if (state.method.kind == PeftKind::kDyLora) {
            keep = s == slot::kLoraB ? j < k : i < k;
          } else if (state.method.kind == PeftKind::kAdaLora) {
            const auto& active = state.active_slices[l];
            keep = s == slot::kAdaB ? active[j] != 0 : active[i] != 0;
          }
          if (keep) idx.push_back(pos + i * m.cols() + j);
        }
      }
      pos += m.size();
    }
  }
  return idx;
}

}  // namespace dpfl
