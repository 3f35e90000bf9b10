// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "apsm/batch_engine.hpp"
#include "apsm/rkhs.hpp"

namespace {

constexpr std::size_t kDim = 32;

struct Fixture {
  apsm::FilterState filter;
  std::vector<double> inputs;
  std::size_t count = 0;
};

const Fixture& fixture(std::size_t atoms, std::size_t count) {
  static std::vector<std::pair<std::pair<std::size_t, std::size_t>, Fixture>> cache;
  for (const auto& [key, fx] : cache) {
    if (key == std::pair{atoms, count}) return fx;
  }
  std::mt19937_64 rng(atoms * 7919 + count);
  std::normal_distribution<double> n(0.0, 0.25);
  Fixture fx;
  fx.filter = apsm::FilterState(kDim);
  std::vector<double> r(kDim);
  for (std::size_t i = 0; i < atoms; ++i) {
    for (auto& x : r) x = n(rng);
    fx.filter.append_atom(r, n(rng));
  }
  fx.inputs.resize(count * kDim);
  for (auto& x : fx.inputs) x = n(rng);
  fx.count = count;
  cache.emplace_back(std::pair{atoms, count}, std::move(fx));
  return cache.back().second;
}

void BM_BatchEvaluate(benchmark::State& state) {
  const auto stage = static_cast<apsm::Stage>(state.range(0));
  const auto& fx = fixture(state.range(1), state.range(2));
  apsm::EngineConfig cfg;
  cfg.stage = stage;
  const apsm::KernelParams p;
  for (auto _ : state) {
    auto out = apsm::batch_evaluate(fx.filter, fx.inputs, fx.count, p, cfg);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::string(apsm::to_string(stage)));
  state.SetItemsProcessed(state.iterations() * fx.count);
}

void stage_args(benchmark::internal::Benchmark* b) {
  for (int stage = 0; stage < 4; ++stage) {
    for (int atoms : {1000, 10000}) b->Args({stage, atoms, 1024});
  }
}

BENCHMARK(BM_BatchEvaluate)->Apply(stage_args)->Unit(benchmark::kMillisecond);

void BM_TileAtoms(benchmark::State& state) {
  const auto& fx = fixture(10000, 1024);
  apsm::EngineConfig cfg;
  cfg.stage = apsm::Stage::tiled;
  cfg.tile_atoms = state.range(0);
  const apsm::KernelParams p;
  for (auto _ : state) {
    auto out = apsm::batch_evaluate(fx.filter, fx.inputs, fx.count, p, cfg);
    benchmark::DoNotOptimize(out.data());
  }
}

BENCHMARK(BM_TileAtoms)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMillisecond);

void BM_ChunkDim(benchmark::State& state) {
  const auto& fx = fixture(10000, 1024);
  apsm::EngineConfig cfg;
  cfg.stage = apsm::Stage::balanced;
  cfg.chunk_dim = state.range(0);
  const apsm::KernelParams p;
  for (auto _ : state) {
    auto out = apsm::batch_evaluate(fx.filter, fx.inputs, fx.count, p, cfg);
    benchmark::DoNotOptimize(out.data());
  }
}

BENCHMARK(BM_ChunkDim)->DenseRange(8, 32, 8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
