// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Detection latency harness for the engine stages.
//
// For every (dict_size, batch_size, workers) cell a random filter and batch
// of receive vectors is generated, the baseline stage output is taken as the
// reference, and each requested stage is timed over `repeats` runs after one
// warm-up. A stage whose output checksum differs from the baseline is a
// correctness failure and no timing is reported for it.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "apsm/batch_engine.hpp"

namespace apsm::bench {

struct BenchOptions {
  std::vector<std::size_t> dict_sizes{10000};
  std::vector<std::size_t> batch_sizes{4096};
  std::vector<Stage> stages{kAllStages[0], kAllStages[1], kAllStages[2], kAllStages[3]};
  std::vector<std::size_t> workers{1};
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
  /// Antennas per receive vector; filters have dimension 2M.
  std::size_t antennas = 16;
  KernelParams params;
  /// Tile sizes and precision; stage and workers are overridden per row.
  EngineConfig engine;
  /// Test hook: perturb this stage's output before the checksum comparison.
  std::optional<Stage> fault_stage;

  void validate() const;
};

struct BenchRow {
  Stage stage = Stage::baseline;
  std::size_t dict_size = 0;
  std::size_t batch_size = 0;
  std::size_t workers = 0;
  double median_us = 0.0;
  double p95_us = 0.0;
  /// Filter evaluations (two per complex receive vector) per second.
  double throughput_evals_per_s = 0.0;
  std::uint64_t checksum = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

class ChecksumMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FNV-1a over the little-endian bytes of the outputs.
std::uint64_t checksum(std::span<const std::complex<double>> outputs);

/// Median and nearest-rank 95th percentile.
double median(std::vector<double> xs);
double percentile(std::vector<double> xs, double q);

/// Throws ChecksumMismatch on the first stage that disagrees with baseline.
BenchReport bench_detection(const BenchOptions& opts);

inline constexpr const char* kCsvHeader =
    "stage,dict_size,batch_size,workers,median_us,p95_us,throughput_evals_per_s,checksum";

void write_csv(std::ostream& out, const BenchReport& report);
void write_json(std::ostream& out, const BenchReport& report);

}  // namespace apsm::bench
