// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>

namespace apsm::detail {

// exp(x) from only IEEE add/mul and integer bit operations, so a SIMD lane
// and a scalar call return the same bits for the same x. Relative error is a
// few ulp on [-708, 709]; smaller arguments return exactly 0.
inline double fast_exp(double x) noexcept {
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShift = 0x1.8p52;
  constexpr double kLow = -708.0;
  constexpr double kHigh = 709.0;

  // Branch-free so loops over it vectorize.
  const std::uint64_t keep = 0 - static_cast<std::uint64_t>(x >= kLow);
  x = std::min(std::max(x, kLow), kHigh);

  const double kd = x * kLog2e + kShift;
  const double k = kd - kShift;
  const double r = (x - k * kLn2Hi) - k * kLn2Lo;

  // Taylor series to degree 13; |r| <= ln(2)/2 keeps the remainder below 1e-17.
  double p = 1.0 / 6227020800.0;
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;

  const std::int64_t ki = std::bit_cast<std::int64_t>(kd) - std::bit_cast<std::int64_t>(kShift);
  const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(ki + 1023) << 52);
  const double y = p * scale;
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(y) & keep);
}

}  // namespace apsm::detail
