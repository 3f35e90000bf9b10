// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apsm/errors.hpp"

namespace apsm {

void ApsmConfig::validate() const {
  if (window < 1) throw ParameterError("window size W must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (max_atoms && *max_atoms == 0) throw ParameterError("max_atoms must be positive when set");
  params.validate();
}

IndexRange window_indices(std::size_t n, std::size_t window) {
  if (window == 0) throw ParameterError("window size W must be at least 1");
  if (n + 1 >= window) return {n + 1 - window, n};
  return {0, n};
}

std::pair<RealVector, RealVector> realify(std::span<const std::complex<double>> r) {
  const std::size_t m = r.size();
  RealVector r1(2 * m), r2(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    r1[i] = r[i].real();
    r1[m + i] = r[i].imag();
    r2[i] = r[i].imag();
    r2[m + i] = -r[i].real();
  }
  return {std::move(r1), std::move(r2)};
}

std::pair<TrainingSample, TrainingSample> complex_to_real_pair(const ComplexVector& r,
                                                               std::complex<double> b) {
  auto [r1, r2] = realify(r);
  return {TrainingSample{std::move(r1), b.real()}, TrainingSample{std::move(r2), b.imag()}};
}

double projection_coefficient_from_response(double response, const TrainingSample& s,
                                            double epsilon, const KernelParams& params) {
  const double residual = response - s.b;
  if (std::abs(residual) <= epsilon) return 0.0;
  const double k = self_kernel(s.r, params);
  if (!(k > 0.0)) {
    throw DegenerateSampleError("kappa(r, r) is zero; the consistency set of r is degenerate");
  }
  if (residual < -epsilon) return (s.b - response - epsilon) / k;
  return (s.b - response + epsilon) / k;
}

double projection_coefficient(const FilterState& f, const TrainingSample& s, double epsilon,
                              const KernelParams& params) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  return projection_coefficient_from_response(evaluate(f, s.r, params), s, epsilon, params);
}

std::vector<double> window_weights(std::size_t count, WeightScheme scheme) {
  std::vector<double> q;
  if (count == 0) return q;
  switch (scheme) {
    case WeightScheme::uniform:
      q.assign(count, 1.0 / static_cast<double>(count));
      break;
  }
  // The last weight absorbs the rounding so that summing q in order gives 1.
  double head = 0.0;
  for (std::size_t j = 0; j + 1 < count; ++j) head += q[j];
  q.back() = 1.0 - head;
  return q;
}

std::size_t apsm_update(FilterState& f, std::span<const TrainingSample> window,
                        std::size_t first_index, const ApsmConfig& cfg) {
  if (window.empty()) throw ParameterError("APSM step needs a nonempty window");
  for (const auto& s : window) {
    if (s.r.size() != f.dim()) {
      throw DimensionError("training sample of length " + std::to_string(s.r.size()) +
                           " for a filter of dimension " + std::to_string(f.dim()));
    }
  }

  const std::vector<double> q = window_weights(window.size(), cfg.weights);

  // All coefficients come from the same f before anything is committed.
  std::vector<double> step(window.size());
  std::size_t active = 0;
  for (std::size_t j = 0; j < window.size(); ++j) {
    const double beta = projection_coefficient(f, window[j], cfg.epsilon, cfg.params);
    step[j] = q[j] * beta;
    if (beta != 0.0) ++active;
  }
  if (active == 0) return 0;

  // Atoms of samples still inside the window were created within the last
  // |J| steps, so they sit in the last W * W dictionary slots.
  std::vector<std::ptrdiff_t> slot_of(window.size(), -1);
  if (cfg.params.w_gaussian != 0.0) {
    const std::size_t n = f.atom_count();
    const std::size_t horizon = std::min(n, cfg.window * cfg.window + window.size());
    const auto tags = f.tags();
    for (std::size_t k = n; k > n - horizon; --k) {
      const std::int64_t tag = tags[k - 1];
      if (tag < static_cast<std::int64_t>(first_index)) continue;
      const auto rel = static_cast<std::size_t>(tag) - first_index;
      if (rel < window.size() && slot_of[rel] < 0) slot_of[rel] = static_cast<std::ptrdiff_t>(k - 1);
    }
  }

  std::size_t new_atoms = 0;
  if (cfg.params.w_gaussian != 0.0) {
    for (std::size_t j = 0; j < window.size(); ++j) {
      if (step[j] != 0.0 && slot_of[j] < 0) ++new_atoms;
    }
  }
  if (cfg.max_atoms && f.atom_count() + new_atoms > *cfg.max_atoms) {
    throw DictionaryFullError(*cfg.max_atoms);
  }

  for (std::size_t j = 0; j < window.size(); ++j) {
    if (step[j] == 0.0) continue;
    if (cfg.params.w_linear != 0.0) f.add_linear(window[j].r, cfg.params.w_linear * step[j]);
    if (cfg.params.w_gaussian == 0.0) continue;
    if (slot_of[j] >= 0) {
      f.add_to_coeff(static_cast<std::size_t>(slot_of[j]), step[j]);
    } else {
      f.append_atom(window[j].r, step[j], static_cast<std::int64_t>(first_index + j));
    }
  }
  return active;
}

FilterState apsm_step(const FilterState& f, std::span<const TrainingSample> window,
                      std::size_t first_index, const ApsmConfig& cfg) {
  FilterState next = f;
  apsm_update(next, window, first_index, cfg);
  return next;
}

OnlineTrainer::OnlineTrainer(FilterState f0, ApsmConfig cfg)
    : filter_(std::move(f0)), cfg_(std::move(cfg)) {
  cfg_.validate();
  window_.reserve(cfg_.window);
}

void OnlineTrainer::push(TrainingSample sample) {
  if (sample.r.size() != filter_.dim()) {
    throw DimensionError("training sample of length " + std::to_string(sample.r.size()) +
                         " for a filter of dimension " + std::to_string(filter_.dim()));
  }
  if (window_.size() == cfg_.window) window_.erase(window_.begin());
  window_.push_back(std::move(sample));
  const IndexRange j = window_indices(next_index_, cfg_.window);
  apsm_update(filter_, window_, j.first, cfg_);
  ++next_index_;
}

void OnlineTrainer::push_symbol(const ComplexVector& r, std::complex<double> b) {
  auto [s1, s2] = complex_to_real_pair(r, b);
  push(std::move(s1));
  push(std::move(s2));
}

FilterState train(FilterState f0, std::span<const TrainingSymbol> stream, const ApsmConfig& cfg) {
  if (stream.empty()) return f0;
  const std::size_t m = stream.front().first.size();
  for (const auto& [r, b] : stream) {
    if (r.size() != m) throw DimensionError("training stream mixes antenna counts");
  }
  if (f0.dim() == 0 && f0.empty()) f0 = FilterState(2 * m);
  if (f0.dim() != 2 * m) {
    throw DimensionError("filter dimension " + std::to_string(f0.dim()) +
                         " does not match 2M = " + std::to_string(2 * m));
  }
  OnlineTrainer trainer(std::move(f0), cfg);
  for (const auto& [r, b] : stream) trainer.push_symbol(r, b);
  return std::move(trainer).release();
}

std::complex<double> detect_symbol(const FilterState& f, std::span<const std::complex<double>> r,
                                   const KernelParams& params) {
  if (2 * r.size() != f.dim()) {
    throw DimensionError("receive vector with M = " + std::to_string(r.size()) +
                         " for a filter of dimension " + std::to_string(f.dim()));
  }
  const auto [r1, r2] = realify(r);
  return {evaluate(f, r1, params), evaluate(f, r2, params)};
}

}  // namespace apsm
