// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Serial reference kernels vs their OpenMP counterparts.

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "dpfl/federation.hpp"
#include "dpfl/matrix.hpp"
#include "dpfl/random.hpp"
#include "dpfl/secure_sum.hpp"

namespace {

using namespace dpfl;

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomSource src(1);
  const Matrix a = draw_gaussian(src, 0.0, 1.0, n, n), b = draw_gaussian(src, 0.0, 1.0, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul_serial(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(256);

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomSource src(1);
  const Matrix a = draw_gaussian(src, 0.0, 1.0, n, n), b = draw_gaussian(src, 0.0, 1.0, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul_parallel(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_MatmulParallel)->Arg(64)->Arg(256);

std::vector<std::vector<double>> contributions(std::size_t clients, std::size_t dim) {
  RandomSource src(2);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < clients; ++k) out.push_back(draw_gaussian_vector(src, 0.0, 1.0, dim));
  return out;
}

void BM_MaskSerial(benchmark::State& state) {
  const auto c = contributions(static_cast<std::size_t>(state.range(0)), 1000);
  std::vector<std::size_t> ids(c.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  const FixedPointCodec codec(40);
  for (auto _ : state) benchmark::DoNotOptimize(mask_contributions_serial(c, ids, codec, RandomSource(3)));
}
BENCHMARK(BM_MaskSerial)->Arg(20)->Arg(100);

void BM_MaskParallel(benchmark::State& state) {
  const auto c = contributions(static_cast<std::size_t>(state.range(0)), 1000);
  std::vector<std::size_t> ids(c.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  const FixedPointCodec codec(40);
  for (auto _ : state) benchmark::DoNotOptimize(mask_contributions(c, ids, codec, RandomSource(3)));
}
BENCHMARK(BM_MaskParallel)->Arg(20)->Arg(100);

// One federated round; the argument is the OpenMP thread count.
void BM_Round(benchmark::State& state) {
  RandomSource src(4);
  SyntheticSpec spec;
  spec.classes = 10;
  spec.dim = 16;
  spec.per_class = 500;
  const auto data = generate_synthetic(spec, src);
  FederationTask task;
  const std::vector<std::size_t> hidden{32, 32};
  task.base = std::make_shared<const FrozenBase>(make_random_base(16, hidden, 10, src));
  for (auto& s : partition_dirichlet(data, 100, 0.1, src).shards) task.clients.push_back(std::move(s.data));
  task.test = data;
  PeftMethod m;
  m.kind = PeftKind::kLora;
  m.rank = 16;
  const auto global = init_peft(m, task.base->layers, src);
  FederationConfig cfg;
  cfg.sampling_rate = 0.3;
  cfg.local = {1, 16, 0.1};
  omp_set_num_threads(static_cast<int>(state.range(0)));
  std::size_t t = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_round(task, cfg, global, t++, 0.0, RandomSource(5)));
  omp_set_num_threads(omp_get_num_procs());
}
BENCHMARK(BM_Round)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
