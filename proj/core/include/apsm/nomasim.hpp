// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic NOMA uplink: Gray-coded modulation, flat Rayleigh channels,
//   r(t) = sum_k sqrt(p_k) b_k(t) h_k + n(t),
// and end-to-end BER trials of the APSM detector.
//
// Conventions:
//  * Bit labels are MSB first. The first half of a label selects the
//    quadrature level, the second half the in-phase level (BPSK has only an
//    in-phase bit). Each axis uses a Gray-coded PAM with bit 0 on the
//    positive side, e.g. QPSK 00 -> (+1+i)/sqrt2, 01 -> (-1+i)/sqrt2,
//    11 -> (-1-i)/sqrt2, 10 -> (+1-i)/sqrt2.
//  * Constellation point i carries label i; hard decisions pick the nearest
//    point and break ties toward the lowest index.
//  * noise_var is the total variance of each complex noise entry; real and
//    imaginary parts each have noise_var / 2.
//  * SNR = sum_k p_k E|h_k|^2 E|b|^2 / (M noise_var) = sum_k p_k / noise_var
//    for unit-variance channel entries and unit-energy constellations.

#pragma once

#include <chrono>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "apsm/batch_engine.hpp"
#include "apsm/learner.hpp"

namespace apsm::sim {

using Rng = std::mt19937_64;
using Bits = std::vector<std::uint8_t>;

enum class Modulation { bpsk, qpsk, qam16, qam64 };

std::string_view to_string(Modulation m);
std::optional<Modulation> parse_modulation(std::string_view name);

struct Constellation {
  Modulation scheme;
  unsigned bits_per_symbol;
  /// points[i] carries Gray label i.
  std::vector<std::complex<double>> points;
  /// Side length of the square grid (2 for QPSK); BPSK uses 2 x 1.
  unsigned axis_levels_i;
  unsigned axis_levels_q;
};

const Constellation& constellation(Modulation m);
unsigned bits_per_symbol(Modulation m);

/// Throws FramingError if bits.size() is not a multiple of bits_per_symbol.
std::vector<std::complex<double>> modulate(std::span<const std::uint8_t> bits, Modulation m);

/// Label of the nearest constellation point.
std::uint32_t demodulate_label(std::complex<double> estimate, Modulation m);
Bits demodulate_hard(std::complex<double> estimate, Modulation m);
Bits demodulate_hard(std::span<const std::complex<double>> estimates, Modulation m);

/// Fraction of differing positions. Throws on length mismatch or empty input.
double bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

struct ChannelModel {
  std::size_t users = 0;
  std::size_t antennas = 0;
  std::vector<ComplexVector> h;  // users x antennas
  std::vector<double> power;     // per user
  double noise_var = 0.0;

  void validate() const;
};

/// Empty `power_profile` means uniform unit power.
ChannelModel draw_channel(std::size_t users, std::size_t antennas,
                          std::span<const double> power_profile, double noise_var, Rng& rng);

/// noise_var giving the requested per-dimension SNR for the given powers.
double noise_var_for_snr(double snr_db, std::span<const double> power);

/// symbols is users x T. Returns T receive vectors.
std::vector<ComplexVector> synthesize_received(
    const std::vector<std::vector<std::complex<double>>>& symbols, const ChannelModel& ch,
    Rng& rng);

struct FrameSpec {
  std::size_t n_train = 685;
  std::size_t n_data = 3840;
  Modulation scheme = Modulation::qpsk;
  /// Subcarriers per OFDM symbol. Symbols are streamed in time-then-
  /// subcarrier order; with flat channels this only labels them.
  std::size_t subcarriers = 144;
  /// Scale the received frame so training vectors have unit mean squared norm.
  bool agc = true;

  std::size_t ofdm_symbols_train() const { return (n_train + subcarriers - 1) / subcarriers; }
  std::size_t ofdm_symbols_data() const { return (n_data + subcarriers - 1) / subcarriers; }
};

struct Frame {
  std::vector<Bits> bits;                                  // per user
  std::vector<std::vector<std::complex<double>>> symbols;  // per user, n_train + n_data
  std::vector<ComplexVector> received;                     // n_train + n_data
  double rx_gain = 1.0;
};

/// Draws bits for every user, modulates and synthesizes reception.
Frame generate_frame(const ChannelModel& ch, const FrameSpec& frame, Rng& rng);

struct TrialReport {
  double ber = 0.0;
  std::size_t trained_atoms = 0;
  std::chrono::nanoseconds detect_time{0};
};

/// Trains a filter for `target_user` on the training segment and measures
/// the BER of batch detection on the data segment.
TrialReport run_trial(const ChannelModel& ch, const FrameSpec& frame, const ApsmConfig& cfg,
                      const EngineConfig& engine, std::size_t target_user, Rng& rng);

/// run_trial on an existing frame.
TrialReport run_trial_on_frame(const Frame& frame_data, const FrameSpec& frame,
                               const ApsmConfig& cfg, const EngineConfig& engine,
                               std::size_t target_user, FilterState* trained = nullptr);

}  // namespace apsm::sim
