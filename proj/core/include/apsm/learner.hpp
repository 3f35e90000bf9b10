// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Online APSM learner in the sum RKHS.
//
// Each real training sample (r_n, b_n) defines the hyperslab
//   C_n = { f : |<f, kappa(r_n, .)> - b_n| <= epsilon }
// and every step replaces f by a convex combination of its projections onto
// the sets of the last W samples. All projections in one step are computed
// from the same f.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "apsm/rkhs.hpp"

namespace apsm {

using ComplexVector = std::vector<std::complex<double>>;

struct TrainingSample {
  RealVector r;
  double b = 0.0;
};

enum class WeightScheme { uniform };

struct ApsmConfig {
  std::size_t window = 20;
  double epsilon = 0.01;
  KernelParams params;
  WeightScheme weights = WeightScheme::uniform;
  std::optional<std::size_t> max_atoms;

  void validate() const;
};

/// Inclusive index range {first, ..., last}.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const noexcept { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// J_n = {n-W+1, ..., n} once n >= W-1, else {0, ..., n}.
IndexRange window_indices(std::size_t n, std::size_t window);

/// The two real samples of symbol time t, in stream order n = 2t, 2t+1:
///   ([Re r; Im r], Re b) and ([Im r; -Re r], Im b).
std::pair<TrainingSample, TrainingSample> complex_to_real_pair(const ComplexVector& r,
                                                               std::complex<double> b);

/// r1 = [Re r; Im r] and r2 = [Im r; -Re r].
std::pair<RealVector, RealVector> realify(std::span<const std::complex<double>> r);

/// Projection coefficient of f onto the hyperslab of s:
///   (b - y - eps) / k(r,r)  if y - b < -eps
///   0                       if |y - b| <= eps
///   (b - y + eps) / k(r,r)  if y - b >  eps
/// with y = f(r). Throws DegenerateSampleError when k(r,r) == 0.
double projection_coefficient(const FilterState& f, const TrainingSample& s, double epsilon,
                              const KernelParams& params);

/// Same as above with y = f(r) already known.
double projection_coefficient_from_response(double response, const TrainingSample& s,
                                            double epsilon, const KernelParams& params);

/// q_j for a window of the given size; sums to exactly one.
std::vector<double> window_weights(std::size_t count, WeightScheme scheme);

/// In-place APSM step over `window`, whose entries carry sample indices
/// first_index, first_index + 1, ... .
///
/// theta gains sum_j q_j beta_j w_L r_j. Each nonzero q_j beta_j is added to
/// the Gaussian dictionary in window order: onto the atom already holding
/// sample j when one exists, else as a new atom tagged with j. Returns the
/// number of nonzero projection coefficients.
std::size_t apsm_update(FilterState& f, std::span<const TrainingSample> window,
                        std::size_t first_index, const ApsmConfig& cfg);

/// Value-returning form of apsm_update.
FilterState apsm_step(const FilterState& f, std::span<const TrainingSample> window,
                      std::size_t first_index, const ApsmConfig& cfg);

/// Sliding-window trainer. Each push() advances n by one and performs one
/// apsm_update over J_n.
class OnlineTrainer {
 public:
  OnlineTrainer(FilterState f0, ApsmConfig cfg);

  void push(TrainingSample sample);
  /// Pushes both realified samples of one symbol time.
  void push_symbol(const ComplexVector& r, std::complex<double> b);

  const FilterState& filter() const noexcept { return filter_; }
  FilterState release() && { return std::move(filter_); }
  std::size_t samples_seen() const noexcept { return next_index_; }
  /// Samples of J_{n} for the most recent n (oldest first).
  std::span<const TrainingSample> window() const noexcept { return window_; }

 private:
  FilterState filter_;
  ApsmConfig cfg_;
  std::vector<TrainingSample> window_;
  std::size_t next_index_ = 0;
};

using TrainingSymbol = std::pair<ComplexVector, std::complex<double>>;

/// Realifies each (r(t), b(t)) pair and runs one step per real sample.
FilterState train(FilterState f0, std::span<const TrainingSymbol> stream, const ApsmConfig& cfg);

/// g(r) = f(r1) + i f(r2).
std::complex<double> detect_symbol(const FilterState& f, std::span<const std::complex<double>> r,
                                   const KernelParams& params);

}  // namespace apsm
