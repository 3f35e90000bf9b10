// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Batched filter evaluation f(u_1), ..., f(u_B) on CPU worker threads.
//
// Four stages of the same computation, selectable for benchmarking:
//
//   baseline  one task per input, full dictionary pass per input
//   grouped   tile_inputs inputs per task
//   tiled     the dictionary is walked in slices of tile_atoms atoms, each
//             slice reused by all inputs of the task before the next is read
//   balanced  slices are stored dimension-major and each distance is built
//             chunk_dim components at a time into per-(input, atom) partial
//             sums, so one input component is reused across a whole slice
//
// In deterministic mode every stage forms the same per-(input, atom) terms
// with the same operation order and reduces them over fixed 64-atom blocks
// followed by a pairwise tree, so outputs are bitwise identical across
// stages, tile sizes and worker counts. The non-deterministic mode also
// splits the dictionary across workers when there are fewer input groups than
// workers and merges the partial sums in completion order.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "apsm/learner.hpp"
#include "apsm/rkhs.hpp"

namespace apsm {

enum class Stage { baseline, grouped, tiled, balanced };
enum class Precision { f64, f32 };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);
std::string_view to_string(Precision precision);
std::optional<Precision> parse_precision(std::string_view name);

inline constexpr Stage kAllStages[] = {Stage::baseline, Stage::grouped, Stage::tiled,
                                       Stage::balanced};

struct EngineConfig {
  Stage stage = Stage::balanced;
  std::size_t tile_atoms = 256;
  std::size_t tile_inputs = 8;
  std::size_t chunk_dim = 16;
  std::size_t workers = 1;
  bool deterministic_reduction = true;
  /// f32 computes squared distances in single precision (relative accuracy
  /// about 1e-4); kernel values and sums stay in double.
  Precision precision = Precision::f64;

  void validate() const;
};

/// Number of atoms per fixed reduction block in deterministic mode.
inline constexpr std::size_t kReductionBlock = 64;

/// `inputs` is a row-major count x f.dim() matrix.
std::vector<double> batch_evaluate(const FilterState& f, std::span<const double> inputs,
                                   std::size_t count, const KernelParams& p,
                                   const EngineConfig& cfg);

std::vector<double> batch_evaluate(const FilterState& f, std::span<const RealVector> inputs,
                                   const KernelParams& p, const EngineConfig& cfg);

/// detect_symbol over a batch: g(r) = f(r1) + i f(r2) for each r.
std::vector<std::complex<double>> batch_detect(const FilterState& f,
                                               std::span<const ComplexVector> inputs,
                                               const KernelParams& p, const EngineConfig& cfg);

}  // namespace apsm
