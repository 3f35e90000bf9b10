// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apsm/errors.hpp"

namespace apsm {
namespace {

void require_same_length(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("vector length mismatch: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
}

double squared_distance(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    acc += d * d;
  }
  return acc;
}

bool all_zero(std::span<const double> xs) {
  for (double x : xs) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace

void KernelParams::validate() const {
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ParameterError("sigma_sq must be positive, got " + std::to_string(sigma_sq));
  }
  if (!(w_linear >= 0.0) || !(w_gaussian >= 0.0)) {
    throw ParameterError("kernel weights must be non-negative");
  }
  if (!(w_linear + w_gaussian > 0.0)) {
    throw ParameterError("at least one kernel weight must be positive");
  }
}

double kernel_linear(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double kernel_gaussian(std::span<const double> u, std::span<const double> v, double sigma_sq) {
  if (!(sigma_sq > 0.0)) {
    throw ParameterError("sigma_sq must be positive, got " + std::to_string(sigma_sq));
  }
  require_same_length(u, v);
  return std::exp(-squared_distance(u, v) / (2.0 * sigma_sq));
}

double kernel_sum(std::span<const double> u, std::span<const double> v, const KernelParams& p) {
  p.validate();
  double k = 0.0;
  if (p.w_linear != 0.0) k += p.w_linear * kernel_linear(u, v);
  if (p.w_gaussian != 0.0) k += p.w_gaussian * kernel_gaussian(u, v, p.sigma_sq);
  else require_same_length(u, v);
  return k;
}

double self_kernel(std::span<const double> u, const KernelParams& p) {
  double sq = 0.0;
  for (double x : u) sq += x * x;
  return p.w_linear * sq + p.w_gaussian;
}

FilterState::FilterState(std::size_t dim) : theta_(dim, 0.0) {}

FilterState FilterState::from_theta(RealVector theta) {
  FilterState f;
  f.theta_ = std::move(theta);
  return f;
}

void FilterState::add_linear(std::span<const double> r, double scale) {
  require_same_length(theta_, r);
  for (std::size_t i = 0; i < r.size(); ++i) theta_[i] += scale * r[i];
}

std::size_t FilterState::append_atom(std::span<const double> r, double coeff, std::int64_t tag) {
  require_same_length(theta_, r);
  atoms_.insert(atoms_.end(), r.begin(), r.end());
  coeffs_.push_back(coeff);
  tags_.push_back(tag);
  return coeffs_.size() - 1;
}

void FilterState::add_section(std::span<const double> r, double gamma, const KernelParams& p,
                              std::int64_t tag) {
  require_same_length(theta_, r);
  if (p.w_linear != 0.0) add_linear(r, p.w_linear * gamma);
  if (p.w_gaussian != 0.0 && gamma != 0.0) append_atom(r, gamma, tag);
}

void FilterState::reserve_atoms(std::size_t n) {
  atoms_.reserve(n * dim());
  coeffs_.reserve(n);
  tags_.reserve(n);
}

FilterState linear_combination(double a, const FilterState& f, double b, const FilterState& g) {
  require_same_length(f.theta(), g.theta());
  FilterState out(f.dim());
  out.add_linear(f.theta(), a);
  out.add_linear(g.theta(), b);
  out.reserve_atoms(f.atom_count() + g.atom_count());
  for (std::size_t i = 0; i < f.atom_count(); ++i) {
    out.append_atom(f.atom(i), a * f.coeffs()[i], f.tags()[i]);
  }
  for (std::size_t i = 0; i < g.atom_count(); ++i) {
    out.append_atom(g.atom(i), b * g.coeffs()[i], g.tags()[i]);
  }
  return out;
}

double evaluate(const FilterState& f, std::span<const double> u, const KernelParams& p) {
  require_same_length(f.theta(), u);
  double linear = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) linear += f.theta()[i] * u[i];
  if (f.empty()) return linear;

  const double inv = 1.0 / (2.0 * p.sigma_sq);
  double gaussian = 0.0;
  for (std::size_t i = 0; i < f.atom_count(); ++i) {
    gaussian += f.coeffs()[i] * std::exp(-squared_distance(f.atom(i), u) * inv);
  }
  return linear + p.w_gaussian * gaussian;
}

double inner_product(const FilterState& f, const FilterState& g, const KernelParams& p) {
  require_same_length(f.theta(), g.theta());
  double result = 0.0;

  const bool linear_zero = all_zero(f.theta()) || all_zero(g.theta());
  if (!linear_zero) {
    if (!(p.w_linear > 0.0)) {
      throw ParameterError("inner product of nonzero linear parts requires w_L > 0");
    }
    result += kernel_linear(f.theta(), g.theta()) / p.w_linear;
  }

  const bool gaussian_zero = all_zero(f.coeffs()) || all_zero(g.coeffs());
  if (!gaussian_zero) {
    if (!(p.w_gaussian > 0.0)) {
      throw ParameterError("inner product of nonzero Gaussian parts requires w_G > 0");
    }
    if (!(p.sigma_sq > 0.0)) throw ParameterError("sigma_sq must be positive");
    const double inv = 1.0 / (2.0 * p.sigma_sq);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.atom_count(); ++i) {
      const double ci = f.coeffs()[i];
      if (ci == 0.0) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < g.atom_count(); ++j) {
        row += g.coeffs()[j] * std::exp(-squared_distance(f.atom(i), g.atom(j)) * inv);
      }
      acc += ci * row;
    }
    result += p.w_gaussian * acc;
  }
  return result;
}

double norm_sq(const FilterState& f, const KernelParams& p) {
  // Rounding can push a PSD quadratic form a few ulp below zero.
  return std::max(0.0, inner_product(f, f, p));
}

}  // namespace apsm
