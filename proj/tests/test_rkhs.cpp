// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "apsm/errors.hpp"
#include "apsm/rkhs.hpp"
#include "oracle.hpp"

namespace apsm {
namespace {

TEST(KernelLinear, DotProducts) {
  EXPECT_EQ(kernel_linear(RealVector{1, 0}, RealVector{0, 1}), 0.0);
  EXPECT_EQ(kernel_linear(RealVector{1, 2}, RealVector{3, 4}), 11.0);
  const RealVector v{0.3, -1.5, 2.25};
  for (std::size_t m = 0; m < v.size(); ++m) {
    RealVector e(v.size(), 0.0);
    e[m] = 1.0;
    EXPECT_EQ(kernel_linear(e, v), v[m]);
  }
}

TEST(KernelLinear, LengthMismatchThrows) {
  EXPECT_THROW(kernel_linear(RealVector{1, 2}, RealVector{1}), DimensionError);
}

TEST(KernelGaussian, KnownExponents) {
  const RealVector u{0.3, -0.2};
  EXPECT_EQ(kernel_gaussian(u, u, 0.05), 1.0);
  // |u - v|^2 = 0.1 and 0.2 at sigma^2 = 0.05.
  const RealVector a{0.0, 0.0};
  EXPECT_NEAR(kernel_gaussian(a, RealVector{std::sqrt(0.1), 0.0}, 0.05), 0.3678794, 1e-7);
  EXPECT_NEAR(kernel_gaussian(a, RealVector{0.0, std::sqrt(0.2)}, 0.05), 0.1353353, 1e-7);
}

TEST(KernelGaussian, RejectsNonPositiveWidth) {
  const RealVector u{1.0};
  EXPECT_THROW(kernel_gaussian(u, u, 0.0), ParameterError);
  EXPECT_THROW(kernel_gaussian(u, u, -1.0), ParameterError);
}

TEST(KernelSum, Compositions) {
  const KernelParams half{0.5, 0.5, 0.05};
  const RealVector unit{0.6, 0.8};
  EXPECT_DOUBLE_EQ(kernel_sum(unit, unit, half), 1.0);

  const KernelParams lin_only{1.0, 0.0, 0.05};
  const RealVector u{1, 2}, v{3, 4};
  EXPECT_EQ(kernel_sum(u, v, lin_only), kernel_linear(u, v));

  // Orthogonal with |u - v|^2 = 0.1.
  const RealVector p{std::sqrt(0.05), 0.0}, q{0.0, std::sqrt(0.05)};
  EXPECT_NEAR(kernel_sum(p, q, half), 0.1839397, 1e-7);
}

TEST(SelfKernel, Values) {
  const KernelParams half{0.5, 0.5, 0.05};
  EXPECT_DOUBLE_EQ(self_kernel(RealVector{0.6, 0.8}, half), 1.0);
  EXPECT_EQ(self_kernel(RealVector{0.0, 0.0}, half), 0.5);
  EXPECT_EQ(self_kernel(RealVector{2.0, 0.0}, KernelParams{1.0, 0.0, 0.05}), 4.0);
}

TEST(KernelProperties, SymmetryAndRange) {
  std::mt19937_64 rng(11);
  const KernelParams p{0.5, 0.5, 0.05};
  for (int i = 0; i < 500; ++i) {
    const auto u = oracle::random_vector(6, 0.3, rng);
    const auto v = oracle::random_vector(6, 0.3, rng);
    EXPECT_EQ(kernel_sum(u, v, p), kernel_sum(v, u, p));
    const double g = kernel_gaussian(u, v, p.sigma_sq);
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, 1.0);
  }
}

TEST(KernelProperties, GramMatrixIsPositiveSemidefinite) {
  std::mt19937_64 rng(12);
  const KernelParams p{0.5, 0.5, 0.05};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12;
    std::vector<RealVector> pts;
    for (int i = 0; i < n; ++i) pts.push_back(oracle::random_vector(4, 0.4, rng));
    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) gram(i, j) = kernel_sum(pts[i], pts[j], p);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(Evaluate, Basics) {
  const KernelParams p;
  FilterState zero(3);
  EXPECT_EQ(evaluate(zero, RealVector{1, 2, 3}, p), 0.0);

  const auto e1 = FilterState::from_theta({1.0, 0.0, 0.0});
  EXPECT_EQ(evaluate(e1, RealVector{4, 5, 6}, p), 4.0);

  const RealVector r{0.1, -0.3, 0.2}, u{0.0, 0.4, -0.1};
  FilterState single(3);
  single.add_section(r, 1.0, p);
  EXPECT_NEAR(evaluate(single, u, p), kernel_sum(r, u, p), 1e-15);
}

TEST(Evaluate, DimensionMismatchThrows) {
  EXPECT_THROW(evaluate(FilterState(3), RealVector{1, 2}, KernelParams{}), DimensionError);
}

TEST(InnerProduct, ReproducingProperty) {
  std::mt19937_64 rng(13);
  const KernelParams p{0.5, 0.5, 0.05};
  for (int i = 0; i < 200; ++i) {
    const auto u = oracle::random_vector(4, 0.3, rng);
    const auto v = oracle::random_vector(4, 0.3, rng);
    FilterState ku(4), kv(4);
    ku.add_section(u, 1.0, p);
    kv.add_section(v, 1.0, p);
    const double want = kernel_sum(u, v, p);
    EXPECT_NEAR(inner_product(ku, kv, p), want, 1e-10 * std::max(1.0, std::abs(want)));
    // evaluate(f, u) == <f, kappa(u, .)> for a single-atom f.
    FilterState f(4);
    f.add_section(v, 0.7, p);
    EXPECT_NEAR(evaluate(f, u, p), inner_product(f, ku, p), 1e-10);
  }
}

TEST(InnerProduct, UnitSectionHasUnitNorm) {
  // <kappa(u,.), kappa(u,.)> = kappa(u,u) = 0.5 * 1 + 0.5 * 1 for |u| = 1.
  const KernelParams p{0.5, 0.5, 0.05};
  FilterState f(2);
  f.add_section(RealVector{0.6, 0.8}, 1.0, p);
  EXPECT_NEAR(norm_sq(f, p), 1.0, 1e-15);
  const oracle::Expansion e{{{0.6, 0.8}}, {1.0}};
  EXPECT_NEAR(oracle::inner_product(e, e, p), 1.0, 1e-15);
}

TEST(InnerProduct, GaussianAtomNorm) {
  // ||w_G k_G(u, .)||^2 = w_G k_G(u, u).
  const KernelParams p{0.5, 0.5, 0.05};
  FilterState f(2);
  f.append_atom(RealVector{0.3, 0.1}, 1.0);
  EXPECT_NEAR(norm_sq(f, p), 0.5, 1e-15);
}

TEST(InnerProduct, ZeroFilter) {
  const KernelParams p;
  FilterState zero(3);
  FilterState g(3);
  g.add_section(RealVector{1, 2, 3}, 0.4, p);
  EXPECT_EQ(inner_product(zero, g, p), 0.0);
  EXPECT_EQ(norm_sq(zero, p), 0.0);
}

TEST(InnerProduct, MatchesExplicitDoubleSum) {
  std::mt19937_64 rng(14);
  const KernelParams p{0.3, 0.7, 0.08};
  for (int i = 0; i < 100; ++i) {
    const auto ef = oracle::random_expansion(1 + i % 9, 6, 0.3, rng);
    const auto eg = oracle::random_expansion(1 + i % 5, 6, 0.3, rng);
    const double want = oracle::inner_product(ef, eg, p);
    const double got = inner_product(oracle::build(ef, 6, p), oracle::build(eg, 6, p), p);
    EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(InnerProduct, ZeroWeightWithNonzeroComponentThrows) {
  const KernelParams lin_only{1.0, 0.0, 0.05};
  FilterState f(2);
  f.append_atom(RealVector{0.1, 0.2}, 1.0);
  EXPECT_THROW(inner_product(f, f, lin_only), ParameterError);
}

TEST(NormSq, NonNegativeOnRandomFilters) {
  std::mt19937_64 rng(15);
  const KernelParams p;
  for (int i = 0; i < 100; ++i) {
    const auto e = oracle::random_expansion(1 + i % 12, 4, 0.3, rng);
    EXPECT_GE(norm_sq(oracle::build(e, 4, p), p), 0.0);
  }
}

TEST(Representation, CollapsedMatchesExplicitExpansion) {
  std::mt19937_64 rng(16);
  const KernelParams p;
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 2 * (1 + i % 8);
    const auto e = oracle::random_expansion(1 + (i * 7) % 60, dim, 0.3, rng);
    const auto f = oracle::build(e, dim, p);
    const auto u = oracle::random_vector(dim, 0.3, rng);
    const double want = oracle::evaluate(e, u, p);
    EXPECT_NEAR(evaluate(f, u, p), want, 1e-10 * oracle::evaluate_scale(e, u, p));
  }
}

TEST(FilterState, ZeroCoefficientSectionsAreNotStored) {
  const KernelParams p;
  FilterState f(2);
  f.add_section(RealVector{1, 1}, 0.0, p);
  EXPECT_EQ(f.atom_count(), 0u);
  f.add_section(RealVector{1, 1}, 0.5, KernelParams{1.0, 0.0, 0.05});
  EXPECT_EQ(f.atom_count(), 0u);
  EXPECT_EQ(f.theta()[0], 0.5);
}

TEST(LinearCombination, EvaluatesAsCombination) {
  std::mt19937_64 rng(17);
  const KernelParams p;
  const auto f = oracle::build(oracle::random_expansion(5, 4, 0.3, rng), 4, p);
  const auto g = oracle::build(oracle::random_expansion(3, 4, 0.3, rng), 4, p);
  const auto h = linear_combination(2.0, f, -0.5, g);
  const auto u = oracle::random_vector(4, 0.3, rng);
  EXPECT_NEAR(evaluate(h, u, p), 2.0 * evaluate(f, u, p) - 0.5 * evaluate(g, u, p), 1e-12);
}

TEST(KernelParams, Validation) {
  EXPECT_NO_THROW((KernelParams{0.5, 0.5, 0.05}.validate()));
  EXPECT_THROW((KernelParams{0.0, 0.0, 0.05}.validate()), ParameterError);
  EXPECT_THROW((KernelParams{-0.1, 0.5, 0.05}.validate()), ParameterError);
  EXPECT_THROW((KernelParams{0.5, 0.5, 0.0}.validate()), ParameterError);
}

}  // namespace
}  // namespace apsm
