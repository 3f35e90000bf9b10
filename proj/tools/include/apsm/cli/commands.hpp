// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "apsm/cli/config.hpp"

namespace apsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Unreadable or inconsistent input files; maps to kExitInput.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrialRow {
  std::uint64_t seed = 0;
  std::size_t users = 0;
  std::size_t antennas = 0;
  sim::Modulation scheme = sim::Modulation::qpsk;
  double noise_var = 0.0;
  double ber = 0.0;
  std::size_t atoms = 0;
  double detect_us = 0.0;
};

/// Runs the scheme x antennas x seeds matrix in that nesting order.
std::vector<TrialRow> simulate(const RunConfig& cfg);

inline constexpr const char* kSimulateCsvHeader =
    "seed,K,M,scheme,epsilon,W,sigma_sq,w_L,w_G,noise_var,ber,atoms,detect_us";

/// Trial rows followed, per (scheme, M) cell, by a `mean` and an `sd`
/// (sample standard deviation) row.
void write_simulate_csv(std::ostream& out, const RunConfig& cfg,
                        const std::vector<TrialRow>& rows);
void write_simulate_json(std::ostream& out, const RunConfig& cfg,
                         const std::vector<TrialRow>& rows);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apsm::cli
