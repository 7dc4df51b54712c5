// Copyright 2026 The TBP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oracles.hpp"
#include "tbp/ensembles.hpp"
#include "tbp/l1_solver.hpp"
#include "tbp/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tbp {
namespace {

Index nnz(const Vector& v) { return (v.array() != 0.0).count(); }

void expect_valid(const LpSolution& sol, const SensingMatrix& g, const Vector& y) {
  ASSERT_TRUE(sol.certified()) << sol.message;
  const auto cert = extract_dual_certificate(sol, g);
  const ToleranceSet tol;
  EXPECT_LE(cert.feasibility_residual, tol.feas_tol * std::max(1.0, y.lpNorm<Eigen::Infinity>()));
  EXPECT_LE(cert.max_dual_correlation, 1.0 + tol.dual_tol);
  EXPECT_LE(cert.max_slackness_violation, tol.dual_tol);
  EXPECT_LE(cert.duality_gap, 1e-6 * std::max(1.0, sol.beta.lpNorm<1>()));
  EXPECT_LE(nnz(sol.beta), g.m());
  EXPECT_EQ(cert.nnz, nnz(sol.beta));
  EXPECT_EQ(static_cast<Index>(sol.basis.size()), g.m());
  EXPECT_TRUE(std::is_sorted(sol.basis.begin(), sol.basis.end()));
  for (Index j = 0; j < sol.beta.size(); ++j)
    if (sol.beta[j] != 0.0) {
      EXPECT_TRUE(std::binary_search(sol.basis.begin(), sol.basis.end(), j)) << j;
    }
  EXPECT_NEAR(sol.objective, sol.beta.lpNorm<1>(), 1e-12 * std::max(1.0, sol.objective));
  EXPECT_TRUE(cert.passes(tol, g.m(), y.lpNorm<Eigen::Infinity>(), sol.objective));
}

SensingMatrix seeded_4x6() {
  RngStream rng(2024, 0);
  return gen_matrix(4, 6, Ensemble::Gaussian, rng);
}

TEST(BasisPursuit, IdentitySensing) {
  const SensingMatrix g(Matrix::Identity(4, 4));
  const Vector y = (Vector(4) << 1, -2, 0, 3).finished();
  const auto sol = basis_pursuit(g, y);
  expect_valid(sol, g, y);
  EXPECT_LE((sol.beta - y).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_NEAR(sol.objective, 6.0, 1e-12);
  const auto cert = extract_dual_certificate(sol, g);
  EXPECT_NEAR(cert.max_dual_correlation, 1.0, 1e-12);
  EXPECT_NEAR(cert.duality_gap, 0.0, 1e-12);
  for (Index i : {0, 1, 3}) EXPECT_NEAR(sol.duals[i], sign_of(y[i]), 1e-12);
}

TEST(BasisPursuit, ZeroRightHandSide) {
  RngStream rng(1, 0);
  for (const auto& g : {gen_matrix(5, 9, Ensemble::Gaussian, rng), SensingMatrix(Matrix::Identity(3, 3))}) {
    const Vector y = Vector::Zero(g.m());
    const auto sol = basis_pursuit(g, y);
    ASSERT_TRUE(sol.certified()) << sol.message;
    EXPECT_TRUE(sol.beta.isZero(0.0));
    EXPECT_EQ(sol.objective, 0.0);
    EXPECT_NEAR(extract_dual_certificate(sol, g).duality_gap, 0.0, 1e-15);
  }
}

TEST(BasisPursuit, SeededOneSparseMatchesVertexEnumeration) {
  const auto g = seeded_4x6();
  const SparseSignal x(6, {1}, {1.0});
  const Vector y = g.entries * x.dense();
  const auto sol = basis_pursuit(g, y);
  expect_valid(sol, g, y);
  EXPECT_LE((sol.beta - x.dense()).lpNorm<Eigen::Infinity>(), 1e-8);
  const auto ref = oracle::bp_by_vertex_enumeration(g.entries, y);
  EXPECT_EQ(ref.bases_tried, 15u);
  EXPECT_NEAR(sol.objective, ref.objective, 1e-8);
  EXPECT_LE(extract_dual_certificate(sol, g).duality_gap, 1e-8);
  EXPECT_NEAR(sol.duals.dot(y), ref.objective, 1e-8);
}

TEST(BasisPursuit, MatchesVertexEnumerationOnSmallInstances) {
  int solved = 0, infeasible = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    RngStream rng(seed, 0);
    const Index m = 2 + static_cast<Index>(seed % 4);  // 2..5
    const Index n = m + 1 + static_cast<Index>((seed / 4) % (9 - m));
    const auto g = gen_matrix(m, n, seed % 2 ? Ensemble::Gaussian : Ensemble::Bernoulli, rng);
    Vector y(m);
    for (Index i = 0; i < m; ++i) y[i] = rng.gaussian();
    const auto sol = basis_pursuit(g, y);
    const auto ref = oracle::bp_by_vertex_enumeration(g.entries, y);
    if (std::isinf(ref.objective)) {
      // A singular +-1 matrix leaves a generic y unreachable.
      EXPECT_EQ(sol.status, LpStatus::NumericalFailure) << "seed " << seed;
      ++infeasible;
      continue;
    }
    expect_valid(sol, g, y);
    EXPECT_NEAR(sol.objective, ref.objective, 1e-8) << "seed " << seed << " m=" << m << " n=" << n;
    ++solved;
  }
  EXPECT_EQ(solved + infeasible, 60);
  EXPECT_GE(solved, 50);
}

TEST(BasisPursuit, Homogeneity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream rng(seed, 0);
    const auto g = gen_matrix(30, 60, Ensemble::Gaussian, rng);
    Vector y(30);
    for (Index i = 0; i < 30; ++i) y[i] = rng.gaussian();
    const auto base = basis_pursuit(g, y);
    ASSERT_TRUE(base.certified());
    for (double c : {0.25, 3.0, 1000.0}) {
      const auto scaled = basis_pursuit(g, c * y);
      ASSERT_TRUE(scaled.certified());
      EXPECT_LE((scaled.beta - c * base.beta).lpNorm<Eigen::Infinity>(), 1e-8 * std::max(1.0, c)) << c;
      EXPECT_EQ(scaled.basis, base.basis);
    }
  }
}

TEST(BasisPursuit, VertexSparsityAndCertificatesOnRandomSolves) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    RngStream rng(seed, 7);
    const Index n = 20 + static_cast<Index>(seed) * 3;
    const Index m = n / 2;
    const auto g = gen_matrix(m, n, seed % 3 == 0 ? Ensemble::Bernoulli : Ensemble::Gaussian, rng);
    const auto x = gen_signal(n, m / 4, SignMode::RandomSigns, AmplitudeMode::Unit, rng);
    const auto meas = gen_measurement(g, x, OutputGaussian{seed % 2 ? 0.1 : 0.0}, rng);
    const auto sol = basis_pursuit(g, meas.y);
    expect_valid(sol, g, meas.y);
  }
}

TEST(BasisPursuit, NoiselessSparseRecovery) {
  RngStream rng(77, 0);
  const auto g = gen_matrix(50, 100, Ensemble::Gaussian, rng);
  const auto x = gen_signal(100, 5, SignMode::RandomSigns, AmplitudeMode::Unit, rng);
  const Vector y = g.entries * x.dense();
  const auto sol = basis_pursuit(g, y);
  expect_valid(sol, g, y);
  EXPECT_LE((sol.beta - x.dense()).lpNorm<Eigen::Infinity>(), 1e-9);
  // Only k of the m basic variables are nonzero.
  EXPECT_EQ(sol.status, LpStatus::Degenerate);
}

TEST(BasisPursuit, RankDeficientMatrixFails) {
  Matrix a(3, 5);
  a << 1, 2, 0, 1, 3,
       0, 1, 1, 2, 1,
       1, 3, 1, 3, 4;  // third row = first + second
  const SensingMatrix g(a);
  const Vector y = a * (Vector(5) << 1, 0, 0, 0, 0).finished();
  const auto sol = basis_pursuit(g, y);
  EXPECT_EQ(sol.status, LpStatus::NumericalFailure);
  EXPECT_FALSE(sol.certified());
  EXPECT_FALSE(sol.message.empty());
  EXPECT_THROW(extract_dual_certificate(sol, g), std::invalid_argument);

  // Inconsistent right-hand side on the same rank-deficient matrix.
  const Vector bad = (Vector(3) << 1, 1, 0).finished();
  EXPECT_EQ(basis_pursuit(g, bad).status, LpStatus::NumericalFailure);
}

TEST(BasisPursuit, IterationCapReportsFailure) {
  RngStream rng(5, 0);
  const auto g = gen_matrix(20, 40, Ensemble::Gaussian, rng);
  Vector y(20);
  for (Index i = 0; i < 20; ++i) y[i] = rng.gaussian();
  ToleranceSet tol;
  tol.iter_factor = 0;
  const auto sol = basis_pursuit(g, y, tol);
  EXPECT_EQ(sol.status, LpStatus::NumericalFailure);
  EXPECT_NE(sol.message.find("cap"), std::string::npos);
}

TEST(BasisPursuit, ArgumentErrors) {
  const SensingMatrix g(Matrix::Identity(3, 3));
  EXPECT_THROW(basis_pursuit(g, Vector::Zero(2)), std::invalid_argument);
}

TEST(LeastSquares, Identity) {
  const Vector b = (Vector(3) << 1, -4, 2).finished();
  const auto r = least_squares(Matrix::Identity(3, 3), b);
  EXPECT_LE((r.xhat - b).norm(), 1e-14);
  EXPECT_NEAR(r.residual, 0.0, 1e-14);
  EXPECT_FALSE(r.rank_deficient);
}

TEST(LeastSquares, ColumnOfOnesGivesMean) {
  const auto r = least_squares(Matrix::Ones(3, 1), (Vector(3) << 1, 2, 3).finished());
  EXPECT_NEAR(r.xhat[0], 2.0, 1e-14);
  EXPECT_NEAR(r.residual, std::sqrt(2.0), 1e-14);
}

TEST(LeastSquares, MatchesNormalEquations) {
  RngStream rng(8, 0);
  Matrix a(8, 3);
  Vector b(8);
  for (Index i = 0; i < 8; ++i) {
    b[i] = rng.gaussian();
    for (Index j = 0; j < 3; ++j) a(i, j) = rng.gaussian();
  }
  const auto r = least_squares(a, b);
  EXPECT_LE((r.xhat - oracle::normal_equations(a, b)).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_NEAR(r.residual, (a * r.xhat - b).norm(), 1e-12);
  EXPECT_EQ(r.rank, 3);
}

TEST(LeastSquares, RankDeficientGivesMinimumNorm) {
  Matrix a(3, 2);
  a << 1, 1, 1, 1, 1, 1;
  const auto r = least_squares(a, (Vector(3) << 1, 2, 3).finished());
  EXPECT_TRUE(r.rank_deficient);
  EXPECT_EQ(r.rank, 1);
  EXPECT_NEAR(r.xhat[0], 1.0, 1e-12);
  EXPECT_NEAR(r.xhat[1], 1.0, 1e-12);
  EXPECT_NEAR(r.residual, std::sqrt(2.0), 1e-12);
}

TEST(LeastSquares, Errors) {
  EXPECT_THROW(least_squares(Matrix::Ones(2, 3), Vector::Ones(2)), std::invalid_argument);
  EXPECT_THROW(least_squares(Matrix::Ones(3, 2), Vector::Ones(2)), std::invalid_argument);
}

}  // namespace
}  // namespace tbp
