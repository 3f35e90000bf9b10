// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/nomasim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "apsm/errors.hpp"

namespace apsm::sim {
namespace {

unsigned gray_to_binary(unsigned g) {
  unsigned b = g;
  for (unsigned shift = 1; shift < 32; shift <<= 1) b ^= b >> shift;
  return b;
}

// Level of a Gray-coded PAM axis with `levels` points; code 0 is the most
// positive level.
double pam_level(unsigned code, unsigned levels) {
  return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(gray_to_binary(code));
}

Constellation build(Modulation m) {
  Constellation c;
  c.scheme = m;
  c.bits_per_symbol = bits_per_symbol(m);
  const unsigned count = 1u << c.bits_per_symbol;
  c.points.resize(count);

  if (m == Modulation::bpsk) {
    c.axis_levels_i = 2;
    c.axis_levels_q = 1;
    for (unsigned label = 0; label < count; ++label) c.points[label] = {pam_level(label, 2), 0.0};
    return c;
  }

  const unsigned half = c.bits_per_symbol / 2;
  const unsigned levels = 1u << half;
  c.axis_levels_i = levels;
  c.axis_levels_q = levels;
  const double scale = std::sqrt(3.0 / (2.0 * (levels * levels - 1.0)));
  for (unsigned label = 0; label < count; ++label) {
    const unsigned q_code = label >> half;
    const unsigned i_code = label & (levels - 1);
    c.points[label] = {scale * pam_level(i_code, levels), scale * pam_level(q_code, levels)};
  }
  return c;
}

}  // namespace

std::string_view to_string(Modulation m) {
  switch (m) {
    case Modulation::bpsk: return "BPSK";
    case Modulation::qpsk: return "QPSK";
    case Modulation::qam16: return "QAM16";
    case Modulation::qam64: return "QAM64";
  }
  return "?";
}

std::optional<Modulation> parse_modulation(std::string_view name) {
  for (Modulation m : {Modulation::bpsk, Modulation::qpsk, Modulation::qam16, Modulation::qam64}) {
    if (to_string(m) == name) return m;
  }
  if (name == "16QAM") return Modulation::qam16;
  if (name == "64QAM") return Modulation::qam64;
  return std::nullopt;
}

unsigned bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::bpsk: return 1;
    case Modulation::qpsk: return 2;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 6;
  }
  return 0;
}

const Constellation& constellation(Modulation m) {
  static const Constellation table[] = {build(Modulation::bpsk), build(Modulation::qpsk),
                                        build(Modulation::qam16), build(Modulation::qam64)};
  return table[static_cast<int>(m)];
}

std::vector<std::complex<double>> modulate(std::span<const std::uint8_t> bits, Modulation m) {
  const Constellation& c = constellation(m);
  const unsigned bps = c.bits_per_symbol;
  if (bits.size() % bps != 0) {
    throw FramingError(std::to_string(bits.size()) + " bits do not divide into " +
                       std::to_string(bps) + "-bit symbols");
  }
  std::vector<std::complex<double>> out(bits.size() / bps);
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (unsigned b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
    out[s] = c.points[label];
  }
  return out;
}

std::uint32_t demodulate_label(std::complex<double> estimate, Modulation m) {
  const Constellation& c = constellation(m);
  std::uint32_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < c.points.size(); ++i) {
    const double d = std::norm(estimate - c.points[i]);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

Bits demodulate_hard(std::complex<double> estimate, Modulation m) {
  const unsigned bps = bits_per_symbol(m);
  const std::uint32_t label = demodulate_label(estimate, m);
  Bits out(bps);
  for (unsigned b = 0; b < bps; ++b) out[b] = (label >> (bps - 1 - b)) & 1u;
  return out;
}

Bits demodulate_hard(std::span<const std::complex<double>> estimates, Modulation m) {
  Bits out;
  out.reserve(estimates.size() * bits_per_symbol(m));
  for (const auto& e : estimates) {
    const Bits b = demodulate_hard(e, m);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

double bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
  if (tx.size() != rx.size()) {
    throw DimensionError("bit streams differ in length: " + std::to_string(tx.size()) + " vs " +
                         std::to_string(rx.size()));
  }
  if (tx.empty()) throw std::invalid_argument("bit error rate of an empty stream is undefined");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) errors += (tx[i] & 1u) != (rx[i] & 1u);
  return static_cast<double>(errors) / static_cast<double>(tx.size());
}

void ChannelModel::validate() const {
  if (h.size() != users || power.size() != users) {
    throw DimensionError("channel model holds " + std::to_string(h.size()) + " signatures and " +
                         std::to_string(power.size()) + " powers for " + std::to_string(users) +
                         " users");
  }
  for (const auto& hk : h) {
    if (hk.size() != antennas) throw DimensionError("channel signature length differs from M");
    for (const auto& x : hk) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
        throw ParameterError("channel signature has non-finite entries");
      }
    }
  }
  for (double pk : power) {
    if (!(pk >= 0.0)) throw ParameterError("transmit powers must be non-negative");
  }
  if (!(noise_var >= 0.0)) throw ParameterError("noise variance must be non-negative");
}

ChannelModel draw_channel(std::size_t users, std::size_t antennas,
                          std::span<const double> power_profile, double noise_var, Rng& rng) {
  if (users < 1 || antennas < 1) throw ParameterError("need at least one user and one antenna");
  if (!power_profile.empty() && power_profile.size() != users) {
    throw DimensionError("power profile has " + std::to_string(power_profile.size()) +
                         " entries for " + std::to_string(users) + " users");
  }
  ChannelModel ch;
  ch.users = users;
  ch.antennas = antennas;
  ch.noise_var = noise_var;
  ch.power = power_profile.empty() ? std::vector<double>(users, 1.0)
                                   : std::vector<double>(power_profile.begin(), power_profile.end());
  std::normal_distribution<double> half_unit(0.0, std::sqrt(0.5));
  ch.h.assign(users, ComplexVector(antennas));
  for (auto& hk : ch.h) {
    for (auto& x : hk) {
      const double re = half_unit(rng);
      const double im = half_unit(rng);
      x = {re, im};
    }
  }
  ch.validate();
  return ch;
}

double noise_var_for_snr(double snr_db, std::span<const double> power) {
  double total = 0.0;
  for (double pk : power) total += pk;
  return total / std::pow(10.0, snr_db / 10.0);
}

std::vector<ComplexVector> synthesize_received(
    const std::vector<std::vector<std::complex<double>>>& symbols, const ChannelModel& ch,
    Rng& rng) {
  ch.validate();
  if (symbols.size() != ch.users) {
    throw DimensionError("symbol matrix has " + std::to_string(symbols.size()) + " rows for " +
                         std::to_string(ch.users) + " users");
  }
  const std::size_t t_count = symbols.empty() ? 0 : symbols.front().size();
  for (const auto& row : symbols) {
    if (row.size() != t_count) throw DimensionError("symbol matrix rows differ in length");
  }

  std::vector<double> amp(ch.users);
  for (std::size_t k = 0; k < ch.users; ++k) amp[k] = std::sqrt(ch.power[k]);

  std::normal_distribution<double> noise(0.0, std::sqrt(ch.noise_var / 2.0));
  std::vector<ComplexVector> out(t_count, ComplexVector(ch.antennas));
  for (std::size_t t = 0; t < t_count; ++t) {
    ComplexVector& r = out[t];
    for (std::size_t k = 0; k < ch.users; ++k) {
      const std::complex<double> s = amp[k] * symbols[k][t];
      for (std::size_t m = 0; m < ch.antennas; ++m) r[m] += s * ch.h[k][m];
    }
    if (ch.noise_var > 0.0) {
      for (auto& x : r) {
        const double re = noise(rng);
        const double im = noise(rng);
        x += std::complex<double>(re, im);
      }
    }
  }
  return out;
}

Frame generate_frame(const ChannelModel& ch, const FrameSpec& frame, Rng& rng) {
  const std::size_t total = frame.n_train + frame.n_data;
  const unsigned bps = bits_per_symbol(frame.scheme);
  Frame out;
  out.bits.resize(ch.users);
  out.symbols.resize(ch.users);
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::size_t k = 0; k < ch.users; ++k) {
    out.bits[k].resize(total * bps);
    for (auto& b : out.bits[k]) b = static_cast<std::uint8_t>(coin(rng));
    out.symbols[k] = modulate(out.bits[k], frame.scheme);
  }
  out.received = synthesize_received(out.symbols, ch, rng);

  if (frame.agc && total > 0) {
    const std::size_t span = frame.n_train > 0 ? frame.n_train : total;
    double energy = 0.0;
    for (std::size_t t = 0; t < span; ++t) {
      for (const auto& x : out.received[t]) energy += std::norm(x);
    }
    energy /= static_cast<double>(span);
    if (energy > 0.0) {
      out.rx_gain = 1.0 / std::sqrt(energy);
      for (auto& r : out.received) {
        for (auto& x : r) x *= out.rx_gain;
      }
    }
  }
  return out;
}

TrialReport run_trial_on_frame(const Frame& data, const FrameSpec& frame, const ApsmConfig& cfg,
                               const EngineConfig& engine, std::size_t target_user,
                               FilterState* trained) {
  if (target_user >= data.symbols.size()) {
    throw ParameterError("target user " + std::to_string(target_user) + " out of range");
  }
  if (frame.n_data == 0) throw ParameterError("a trial needs at least one data symbol");
  const std::size_t m = data.received.empty() ? 0 : data.received.front().size();

  std::vector<TrainingSymbol> stream;
  stream.reserve(frame.n_train);
  for (std::size_t t = 0; t < frame.n_train; ++t) {
    stream.emplace_back(data.received[t], data.symbols[target_user][t]);
  }
  FilterState filter = train(FilterState(2 * m), stream, cfg);

  const std::span<const ComplexVector> payload(data.received.data() + frame.n_train,
                                               frame.n_data);
  const auto start = std::chrono::steady_clock::now();
  const auto estimates = batch_detect(filter, payload, cfg.params, engine);
  const auto stop = std::chrono::steady_clock::now();

  const unsigned bps = bits_per_symbol(frame.scheme);
  const Bits rx = demodulate_hard(estimates, frame.scheme);
  const std::span<const std::uint8_t> tx(data.bits[target_user].data() + frame.n_train * bps,
                                         frame.n_data * bps);

  TrialReport report;
  report.ber = bit_error_rate(tx, rx);
  report.trained_atoms = filter.atom_count();
  report.detect_time = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start);
  if (trained) *trained = std::move(filter);
  return report;
}

TrialReport run_trial(const ChannelModel& ch, const FrameSpec& frame, const ApsmConfig& cfg,
                      const EngineConfig& engine, std::size_t target_user, Rng& rng) {
  if (target_user >= ch.users) {
    throw ParameterError("target user " + std::to_string(target_user) + " out of range for K = " +
                         std::to_string(ch.users));
  }
  const Frame data = generate_frame(ch, frame, rng);
  return run_trial_on_frame(data, frame, cfg, engine, target_user);
}

}  // namespace apsm::sim
