// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration for the apsm-mud tool.
//
// The file is sectioned key = value text:
//
//   # comment
//   [kernel]
//   w_L = 0.5
//   [sweep]
//   schemes = BPSK, QPSK
//   seeds = 1..20
//
// Every key must be known for its section and may appear once. List values
// are comma separated; integer lists also accept inclusive `a..b` ranges.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "apsm/batch_engine.hpp"
#include "apsm/bench.hpp"
#include "apsm/learner.hpp"
#include "apsm/nomasim.hpp"

namespace apsm::cli {

/// Malformed or invalid configuration. `line()` is 0 when the problem is not
/// tied to one line (e.g. a cross-key constraint).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct RunConfig {
  ApsmConfig apsm;  // apsm.params holds the [kernel] section

  std::size_t users = 6;
  std::size_t target_user = 0;
  /// Exactly one of snr_db / noise_var is used; snr_db is the default.
  std::optional<double> snr_db = 20.0;
  std::optional<double> noise_var;
  std::vector<double> power_profile;  // empty: unit power for every user

  sim::FrameSpec frame;
  EngineConfig engine;

  std::vector<sim::Modulation> schemes{sim::Modulation::qpsk};
  std::vector<std::size_t> antennas{16};
  std::vector<std::uint64_t> seeds{1};

  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  /// When set, simulate writes per-trial IQ, pilot and model files here.
  std::optional<std::filesystem::path> frame_dir;

  bench::BenchOptions bench;

  /// Per-user powers for K users (the profile, or all ones).
  std::vector<double> powers() const;
  double noise_variance() const;
  void validate() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace apsm::cli
