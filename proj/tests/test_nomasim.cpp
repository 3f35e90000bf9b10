// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <complex>

#include "apsm/errors.hpp"
#include "apsm/nomasim.hpp"

namespace apsm::sim {
namespace {

using cd = std::complex<double>;

constexpr Modulation kSchemes[] = {Modulation::bpsk, Modulation::qpsk, Modulation::qam16,
                                   Modulation::qam64};

TEST(Constellation, UnitAverageEnergy) {
  for (Modulation m : kSchemes) {
    const auto& c = constellation(m);
    ASSERT_EQ(c.points.size(), std::size_t{1} << c.bits_per_symbol);
    double e = 0.0;
    for (const cd& x : c.points) e += std::norm(x);
    EXPECT_NEAR(e / static_cast<double>(c.points.size()), 1.0, 1e-12) << to_string(m);
  }
}

TEST(Constellation, GrayNeighboursDifferInOneBit) {
  for (Modulation m : kSchemes) {
    const auto& c = constellation(m);
    // Grid spacing is the smallest distance between two points.
    double step = 1e9;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      for (std::size_t j = i + 1; j < c.points.size(); ++j) {
        step = std::min(step, std::abs(c.points[i] - c.points[j]));
      }
    }
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      for (std::size_t j = i + 1; j < c.points.size(); ++j) {
        if (std::abs(std::abs(c.points[i] - c.points[j]) - step) < 1e-9) {
          ++pairs;
          EXPECT_EQ(std::popcount(i ^ j), 1) << to_string(m) << " " << i << " " << j;
        }
      }
    }
    const std::size_t li = c.axis_levels_i, lq = c.axis_levels_q;
    EXPECT_EQ(pairs, (li - 1) * lq + (lq - 1) * li) << to_string(m);
  }
}

TEST(Modulate, Conventions) {
  const double a = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(modulate(Bits{0, 1}, Modulation::bpsk), (std::vector<cd>{cd(1, 0), cd(-1, 0)}));
  const auto q = modulate(Bits{0, 0, 0, 1, 1, 1, 1, 0}, Modulation::qpsk);
  EXPECT_NEAR(std::abs(q[0] - cd(a, a)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q[1] - cd(-a, a)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q[2] - cd(-a, -a)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q[3] - cd(a, -a)), 0.0, 1e-15);
  EXPECT_THROW(modulate(Bits{0, 1, 1}, Modulation::qpsk), FramingError);
}

TEST(Modulate, RoundTripsThroughHardDecisions) {
  Rng rng(41);
  for (Modulation m : kSchemes) {
    Bits bits(bits_per_symbol(m) * 500);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    EXPECT_EQ(demodulate_hard(modulate(bits, m), m), bits) << to_string(m);
  }
}

TEST(Demodulate, NearestPointAndTieBreak) {
  const auto& c = constellation(Modulation::qpsk);
  for (std::uint32_t i = 0; i < c.points.size(); ++i) {
    EXPECT_EQ(demodulate_label(c.points[i], Modulation::qpsk), i);
  }
  EXPECT_EQ(demodulate_label(cd(0.9, 0.8), Modulation::qpsk), 0u);
  EXPECT_EQ(demodulate_label(cd(0.0, 0.0), Modulation::qpsk), 0u);
  EXPECT_EQ(demodulate_hard(cd(-0.1, -3.0), Modulation::qpsk), (Bits{1, 1}));
}

TEST(ModulationNames, RoundTrip) {
  for (Modulation m : kSchemes) EXPECT_EQ(parse_modulation(to_string(m)), m);
  EXPECT_FALSE(parse_modulation("8psk").has_value());
}

TEST(BitErrorRate, Examples) {
  const Bits a{0, 1, 1, 0};
  EXPECT_EQ(bit_error_rate(a, a), 0.0);
  EXPECT_EQ(bit_error_rate(a, Bits{1, 0, 0, 1}), 1.0);
  EXPECT_EQ(bit_error_rate(a, Bits{1, 0, 1, 0}), 0.5);
  EXPECT_THROW(bit_error_rate(a, Bits{0}), DimensionError);
  EXPECT_THROW(bit_error_rate(Bits{}, Bits{}), std::invalid_argument);
}

ChannelModel fixed_channel(std::vector<ComplexVector> h, std::vector<double> p, double nv) {
  ChannelModel ch;
  ch.users = h.size();
  ch.antennas = h.empty() ? 0 : h[0].size();
  ch.h = std::move(h);
  ch.power = std::move(p);
  ch.noise_var = nv;
  return ch;
}

TEST(Synthesize, SingleUserUnitChannel) {
  Rng rng(42);
  const auto ch = fixed_channel({{cd(1, 0), cd(0, 0)}}, {1.0}, 0.0);
  const auto r = synthesize_received({{cd(1, 0), cd(1, 0)}}, ch, rng);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (ComplexVector{cd(1, 0), cd(0, 0)}));
}

TEST(Synthesize, LinearInUsersAndPowers) {
  Rng rng(43);
  const ComplexVector h1{cd(0.3, -0.2), cd(1.1, 0.4)};
  const ComplexVector h2{cd(-0.7, 0.5), cd(0.2, 0.9)};
  const std::vector<cd> b1{cd(1, 0), cd(0, -1), cd(0.5, 0.5)};
  const std::vector<cd> b2{cd(-1, 0), cd(0.3, 0.1), cd(0, 1)};
  const auto both = synthesize_received({b1, b2}, fixed_channel({h1, h2}, {4.0, 0.25}, 0.0), rng);
  const auto one = synthesize_received({b1}, fixed_channel({h1}, {4.0}, 0.0), rng);
  const auto two = synthesize_received({b2}, fixed_channel({h2}, {0.25}, 0.0), rng);
  const auto unit = synthesize_received({b1}, fixed_channel({h1}, {1.0}, 0.0), rng);
  for (std::size_t t = 0; t < b1.size(); ++t) {
    for (std::size_t m = 0; m < 2; ++m) {
      EXPECT_NEAR(std::abs(both[t][m] - (one[t][m] + two[t][m])), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(one[t][m] - 2.0 * unit[t][m]), 0.0, 1e-15);
    }
  }
}

TEST(Synthesize, NoiseVariancePerComponent) {
  Rng rng(44);
  // K = 0 carries no symbol rows, so draw through a silent user instead.
  const auto silent = fixed_channel({{cd(0, 0)}}, {0.0}, 0.1);
  const std::size_t n = 100000;
  const auto noise = synthesize_received({std::vector<cd>(n, cd(1, 0))}, silent, rng);
  double sr = 0.0, si = 0.0;
  for (const auto& x : noise) {
    sr += x[0].real() * x[0].real();
    si += x[0].imag() * x[0].imag();
  }
  EXPECT_NEAR(sr / n, 0.05, 0.05 * 0.05);
  EXPECT_NEAR(si / n, 0.05, 0.05 * 0.05);
}

TEST(Synthesize, DimensionMismatchThrows) {
  Rng rng(45);
  const auto ch = fixed_channel({{cd(1, 0)}}, {1.0}, 0.0);
  EXPECT_THROW(synthesize_received({{cd(1, 0)}, {cd(1, 0)}}, ch, rng), DimensionError);
}

TEST(DrawChannel, SeededAndUniform) {
  Rng a(46), b(46);
  const auto c1 = draw_channel(6, 16, {}, 0.01, a);
  const auto c2 = draw_channel(6, 16, {}, 0.01, b);
  EXPECT_EQ(c1.h, c2.h);
  for (double p : c1.power) EXPECT_EQ(p, 1.0);
  const std::vector<double> profile{1.0, 2.0};
  EXPECT_EQ(draw_channel(2, 3, profile, 0.0, a).power, profile);
  EXPECT_THROW(draw_channel(3, 3, profile, 0.0, a), DimensionError);
  EXPECT_THROW(draw_channel(0, 3, {}, 0.0, a), ParameterError);
}

TEST(DrawChannel, MeanSignatureEnergyIsM) {
  Rng rng(47);
  const std::size_t m = 8, draws = 10000;
  double total = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto ch = draw_channel(1, m, {}, 0.0, rng);
    for (const cd& x : ch.h[0]) total += std::norm(x);
  }
  EXPECT_NEAR(total / draws, static_cast<double>(m), 0.05 * m);
}

TEST(NoiseVarForSnr, Definition) {
  const std::vector<double> p(6, 1.0);
  EXPECT_NEAR(noise_var_for_snr(20.0, p), 0.06, 1e-15);
  EXPECT_NEAR(noise_var_for_snr(0.0, std::vector<double>{1.0}), 1.0, 1e-15);
}

TEST(GenerateFrame, ShapesAndGain) {
  Rng rng(48);
  const auto ch = draw_channel(3, 4, {}, 0.01, rng);
  FrameSpec spec;
  spec.n_train = 50;
  spec.n_data = 70;
  spec.scheme = Modulation::qam16;
  const Frame fr = generate_frame(ch, spec, rng);
  ASSERT_EQ(fr.bits.size(), 3u);
  EXPECT_EQ(fr.bits[0].size(), 120u * 4);
  EXPECT_EQ(fr.symbols[2].size(), 120u);
  ASSERT_EQ(fr.received.size(), 120u);
  double e = 0.0;
  for (std::size_t t = 0; t < spec.n_train; ++t) {
    for (const cd& x : fr.received[t]) e += std::norm(x);
  }
  EXPECT_NEAR(e / spec.n_train, 1.0, 1e-12);
  EXPECT_EQ(spec.ofdm_symbols_train(), 1u);
}

TEST(RunTrial, NoiselessSingleUserBpskIsErrorFree) {
  Rng rng(49);
  const auto ch = draw_channel(1, 2, {}, 0.0, rng);
  FrameSpec spec;
  spec.scheme = Modulation::bpsk;
  spec.n_train = 200;
  spec.n_data = 1000;
  const auto rep = run_trial(ch, spec, ApsmConfig{}, EngineConfig{}, 0, rng);
  EXPECT_EQ(rep.ber, 0.0);
  EXPECT_GT(rep.trained_atoms, 0u);
}

TEST(RunTrial, SameSeedSameResult) {
  FrameSpec spec;
  spec.n_train = 150;
  spec.n_data = 300;
  auto once = [&] {
    Rng rng(50);
    const auto ch = draw_channel(3, 4, {}, 0.05, rng);
    return run_trial(ch, spec, ApsmConfig{}, EngineConfig{}, 1, rng);
  };
  const auto a = once();
  const auto b = once();
  EXPECT_EQ(a.ber, b.ber);
  EXPECT_EQ(a.trained_atoms, b.trained_atoms);
}

TEST(RunTrial, RejectsBadTargetUser) {
  Rng rng(51);
  const auto ch = draw_channel(2, 2, {}, 0.0, rng);
  EXPECT_THROW(run_trial(ch, FrameSpec{}, ApsmConfig{}, EngineConfig{}, 2, rng), ParameterError);
}

}  // namespace
}  // namespace apsm::sim
