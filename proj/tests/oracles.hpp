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

// Independent reference computations used only by the tests. None of these
// call into the library's solvers.

#pragma once

#include "tbp/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace tbp::oracle {

inline bool next_subset(std::vector<Index>& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

struct VertexOptimum {
  double objective = std::numeric_limits<double>::infinity();
  Vector beta;
  std::size_t bases_tried = 0;
};

/// min ||b||_1 s.t. G b = y over all basic solutions: every m-column square
/// subsystem that is nonsingular is solved directly.
inline VertexOptimum bp_by_vertex_enumeration(const Matrix& g, const Vector& y) {
  const Index m = g.rows(), n = g.cols();
  VertexOptimum best;
  std::vector<Index> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), Index{0});
  do {
    Matrix b(m, m);
    for (Index c = 0; c < m; ++c) b.col(c) = g.col(cols[c]);
    Eigen::FullPivLU<Matrix> lu(b);
    if (lu.rank() < m) continue;
    ++best.bases_tried;
    const Vector xb = lu.solve(y);
    if ((b * xb - y).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, y.lpNorm<Eigen::Infinity>())) continue;
    const double obj = xb.lpNorm<1>();
    if (obj < best.objective) {
      best.objective = obj;
      best.beta = Vector::Zero(n);
      for (Index c = 0; c < m; ++c) best.beta[cols[c]] = xb[c];
    }
  } while (next_subset(cols, n));
  return best;
}

/// delta_2 by closed-form eigenvalues of every 2x2 Gram block.
inline double rip2_pairwise(const Matrix& g) {
  double worst = 0.0;
  for (Index i = 0; i < g.cols(); ++i)
    for (Index j = i + 1; j < g.cols(); ++j) {
      const double a = g.col(i).squaredNorm(), c = g.col(j).squaredNorm(), b = g.col(i).dot(g.col(j));
      const double mid = 0.5 * (a + c);
      const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      worst = std::max({worst, mid + rad - 1.0, 1.0 - (mid - rad)});
    }
  return worst;
}

/// Proximal gradient (ISTA) for 0.5 ||y - G b||^2 + lambda ||b||_1 with step
/// 1 / ||G||_2^2, run until the subgradient residual is below `stat_tol`.
inline Vector lasso_ista(const Matrix& g, const Vector& y, double lambda, double stat_tol = 1e-10,
                         long max_iters = 5'000'000) {
  const double lip = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
  const double step = 1.0 / (lip * lip);
  Vector b = Vector::Zero(g.cols());
  for (long it = 0; it < max_iters; ++it) {
    const Vector grad = g.transpose() * (g * b - y);
    Vector next = b - step * grad;
    for (Index j = 0; j < next.size(); ++j) {
      const double a = std::abs(next[j]) - step * lambda;
      next[j] = a > 0.0 ? std::copysign(a, next[j]) : 0.0;
    }
    b.swap(next);
    if (it % 100 == 99) {
      const Vector corr = g.transpose() * (y - g * b);
      double worst = 0.0;
      for (Index j = 0; j < b.size(); ++j)
        worst = std::max(worst, b[j] == 0.0 ? std::max(0.0, std::abs(corr[j]) - lambda)
                                            : std::abs(corr[j] - std::copysign(lambda, b[j])));
      if (worst < stat_tol) break;
    }
  }
  return b;
}

/// (A'A)^-1 A'b through an explicit inverse.
inline Vector normal_equations(const Matrix& a, const Vector& b) {
  const Matrix ata = a.transpose() * a;
  return ata.inverse() * (a.transpose() * b);
}

/// Orthonormal basis of the orthogonal complement of the row space of G,
/// by modified Gram-Schmidt on the rows followed by the unit vectors.
inline Matrix gram_schmidt_complement(const Matrix& g) {
  const Index m = g.rows(), n = g.cols();
  std::vector<Vector> basis;
  auto orthonormalize = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= q.dot(v) * q;
    const double nv = v.norm();
    if (nv < 1e-8) return false;
    basis.push_back(v / nv);
    return true;
  };
  for (Index i = 0; i < m; ++i) orthonormalize(g.row(i).transpose());
  const std::size_t row_rank = basis.size();
  for (Index j = 0; j < n && static_cast<Index>(basis.size()) < n; ++j) orthonormalize(Vector::Unit(n, j));
  Matrix out(n, static_cast<Index>(basis.size() - row_rank));
  for (std::size_t c = row_rank; c < basis.size(); ++c) out.col(static_cast<Index>(c - row_rank)) = basis[c];
  return out;
}

/// (n-1) x n matrix with G'G = I - s s'/n for a random sign vector s, so
/// every k-column Gram block has eigenvalues 1 and 1 - k/n and delta_k is
/// exactly k/n. Built as Q B' with B an orthonormal basis of s-perp and Q a
/// random orthogonal matrix.
template <class Rng>
Matrix rank_one_deficit_design(Index n, Rng& rng) {
  Matrix s(1, n);
  for (Index j = 0; j < n; ++j) s(0, j) = rng.coin() ? 1.0 : -1.0;
  const Matrix b = gram_schmidt_complement(s);
  Matrix z(n - 1, n - 1);
  for (Index i = 0; i < n - 1; ++i)
    for (Index j = 0; j < n - 1; ++j) z(i, j) = rng.gaussian();
  const Matrix q = Eigen::HouseholderQR<Matrix>(z).householderQ();
  return q * b.transpose();
}

/// The k indices with largest |G_j' y|, found by sorting (|c|, index) pairs.
inline std::vector<Index> top_correlations(const Matrix& g, const Vector& y, Index k) {
  const Vector corr = g.transpose() * y;
  std::vector<std::pair<double, Index>> keyed;
  for (Index j = 0; j < corr.size(); ++j) keyed.emplace_back(-std::abs(corr[j]), j);
  std::sort(keyed.begin(), keyed.end());
  std::vector<Index> out;
  for (Index i = 0; i < k; ++i) out.push_back(keyed[static_cast<std::size_t>(i)].second);
  std::sort(out.begin(), out.end());
  return out;
}

/// Standard error of a binomial proportion estimate.
inline double binomial_se(double p, double trials) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / trials); }

/// Wilson 95% interval for `successes` out of `trials`.
inline std::pair<double, double> wilson95(double successes, double trials) {
  const double z = 1.959963984540054;
  const double p = successes / trials;
  const double den = 1.0 + z * z / trials;
  const double centre = (p + z * z / (2.0 * trials)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / den;
  return {centre - half, centre + half};
}

/// P(lo <= X <= hi) for X ~ chi-square(dof), by composite Simpson
/// integration of the density in log space.
inline double chi2_interval(double dof, double lo, double hi, int panels = 20000) {
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double h = 0.5 * dof;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h));
  };
  const double step = (hi - lo) / panels;
  double acc = pdf(lo) + pdf(hi);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(lo + step * i);
  return acc * step / 3.0;
}

}  // namespace tbp::oracle
