// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Kernels of the partially linear sum space H = H_L + H_G and the filter
// representation used throughout the library.
//
// A filter f in H is stored with its linear part collapsed into a single
// coefficient vector theta (f_L(u) = theta . u) and its Gaussian part as an
// explicit dictionary of atoms r_i with raw coefficients gamma_i:
//
//   f(u) = theta . u + w_G * sum_i gamma_i * exp(-|u - r_i|^2 / (2 sigma^2))
//
// Adding a kernel section gamma * kappa(r, .) therefore updates theta by
// w_L * gamma * r and appends (r, gamma) to the dictionary.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace apsm {

/// Realified receive vector of length 2M.
using RealVector = std::vector<double>;

struct KernelParams {
  double w_linear = 0.5;
  double w_gaussian = 0.5;
  double sigma_sq = 0.05;

  /// Throws ParameterError unless sigma_sq > 0, both weights >= 0 and their
  /// sum > 0.
  void validate() const;
};

double kernel_linear(std::span<const double> u, std::span<const double> v);
double kernel_gaussian(std::span<const double> u, std::span<const double> v, double sigma_sq);
double kernel_sum(std::span<const double> u, std::span<const double> v, const KernelParams& p);

/// kappa(u, u) = w_L |u|^2 + w_G.
double self_kernel(std::span<const double> u, const KernelParams& p);

class FilterState {
 public:
  static constexpr std::int64_t kNoTag = -1;

  FilterState() = default;
  explicit FilterState(std::size_t dim);

  /// Linear warm start: f(u) = theta . u, empty Gaussian dictionary.
  static FilterState from_theta(RealVector theta);

  std::size_t dim() const noexcept { return theta_.size(); }
  std::size_t atom_count() const noexcept { return coeffs_.size(); }
  bool empty() const noexcept { return coeffs_.empty(); }

  std::span<const double> theta() const noexcept { return theta_; }
  std::span<const double> atom(std::size_t i) const noexcept {
    return {atoms_.data() + i * dim(), dim()};
  }
  /// Row-major atom_count() x dim() matrix of dictionary entries.
  std::span<const double> atom_data() const noexcept { return atoms_; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  /// Source-sample index of each atom, or kNoTag.
  std::span<const std::int64_t> tags() const noexcept { return tags_; }

  /// theta += scale * r.
  void add_linear(std::span<const double> r, double scale);
  /// Appends a Gaussian atom and returns its slot.
  std::size_t append_atom(std::span<const double> r, double coeff, std::int64_t tag = kNoTag);
  void add_to_coeff(std::size_t slot, double delta) { coeffs_[slot] += delta; }

  /// f += gamma * kappa(r, .) in the sum space.
  void add_section(std::span<const double> r, double gamma, const KernelParams& p,
                   std::int64_t tag = kNoTag);

  void reserve_atoms(std::size_t n);

  friend bool operator==(const FilterState&, const FilterState&) = default;

 private:
  RealVector theta_;
  std::vector<double> atoms_;
  std::vector<double> coeffs_;
  std::vector<std::int64_t> tags_;
};

/// a * f + b * g, with the dictionaries concatenated.
FilterState linear_combination(double a, const FilterState& f, double b, const FilterState& g);

/// f(u) = <f, kappa(u, .)>_H.
double evaluate(const FilterState& f, std::span<const double> u, const KernelParams& p);

/// Sum-space inner product
///   <f, g>_H = theta_f . theta_g / w_L + w_G * sum_ij c_f[i] c_g[j] k_G(a_f[i], a_g[j]).
/// A zero weight is accepted only when the matching components are zero in
/// both arguments.
double inner_product(const FilterState& f, const FilterState& g, const KernelParams& p);

double norm_sq(const FilterState& f, const KernelParams& p);

}  // namespace apsm
