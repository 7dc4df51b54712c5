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

// Basis pursuit, min ||b||_1 s.t. G b = y, solved as the split linear
// program
//
//   min 1'(u + v)  s.t.  G u - G v = y,  u, v >= 0
//
// with a dense two-phase revised simplex. The solver returns a vertex, the
// G-columns of its optimal basis and the simplex multipliers, which are a
// dual certificate: |G_j' pi| <= 1 for all j, G_j' pi = sgn(b_j) on the
// support and pi' y = ||b||_1.

#pragma once

#include "tbp/core.hpp"
#include "tbp/ensembles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tbp {

enum class LpStatus {
  /// Certified optimal, nondegenerate vertex.
  Optimal,
  /// Certified optimal; some basic variable sits at zero, so the optimal
  /// basis is not unique.
  Degenerate,
  NumericalFailure,
};

inline std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Degenerate: return "degenerate";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct LpSolution {
  Vector beta;
  /// Columns of G in the optimal basis, ascending (size m).
  IndexSet basis;
  /// Simplex multipliers of the equality rows.
  Vector duals;
  Vector rhs;
  double objective = 0.0;
  LpStatus status = LpStatus::NumericalFailure;
  int iterations = 0;
  std::string message;

  bool certified() const { return status != LpStatus::NumericalFailure; }
};

struct CertificateReport {
  /// max_j |pi' G_j|
  double max_dual_correlation = 0.0;
  /// max over the support of |pi' G_j - sgn(b_j)|
  double max_slackness_violation = 0.0;
  /// |pi' y - ||b||_1|
  double duality_gap = 0.0;
  /// ||G b - y||_inf
  double feasibility_residual = 0.0;
  Index nnz = 0;

  /// Checks every certificate quantity against `tol`. The feasibility
  /// residual is compared relative to max(1, ||y||_inf) and the gap
  /// relative to max(1, ||b||_1).
  bool passes(const ToleranceSet& tol, Index m, double y_inf, double objective) const {
    return max_dual_correlation <= 1.0 + tol.dual_tol && max_slackness_violation <= tol.dual_tol &&
           duality_gap <= tol.gap_tol * std::max(1.0, objective) &&
           feasibility_residual <= tol.feas_tol * std::max(1.0, y_inf) && nnz <= m;
  }
};

inline CertificateReport extract_dual_certificate(const LpSolution& sol, const SensingMatrix& g) {
  detail::require(sol.certified(), "certificate requires a certified solution");
  detail::require(sol.beta.size() == g.n() && sol.duals.size() == g.m(), "solution does not match matrix");
  CertificateReport rep;
  const Vector corr = g.entries.transpose() * sol.duals;
  rep.max_dual_correlation = corr.size() ? corr.cwiseAbs().maxCoeff() : 0.0;
  for (Index j = 0; j < sol.beta.size(); ++j) {
    if (sol.beta[j] == 0.0) continue;
    ++rep.nnz;
    rep.max_slackness_violation = std::max(rep.max_slackness_violation, std::abs(corr[j] - sign_of(sol.beta[j])));
  }
  const Vector& y = sol.rhs.size() == g.m() ? sol.rhs : Vector(g.entries * sol.beta);
  rep.duality_gap = std::abs(sol.duals.dot(y) - sol.beta.lpNorm<1>());
  rep.feasibility_residual = g.m() ? (g.entries * sol.beta - y).lpNorm<Eigen::Infinity>() : 0.0;
  return rep;
}

namespace detail {

/// LU of a basis matrix plus a product-form eta file for the pivots since
/// the last factorization.
class BasisFactor {
 public:
  /// Returns false when the matrix is numerically singular.
  bool factor(const Matrix& b, double rel_pivot_tol) {
    lu_.compute(b);
    etas_.clear();
    const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
    if (diag.size() == 0) return true;
    return diag.minCoeff() > rel_pivot_tol * std::max(1.0, diag.maxCoeff());
  }

  Vector ftran(const Vector& a) const {
    Vector z = lu_.solve(a);
    for (const auto& e : etas_) {
      const double zr = z[e.row] / e.col[e.row];
      z.noalias() -= zr * e.col;
      z[e.row] = zr;
    }
    return z;
  }

  Vector btran(Vector c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const double dr = it->col[it->row];
      const double cr = c[it->row];
      c[it->row] = 0.0;
      c[it->row] = (cr - it->col.dot(c)) / dr;
    }
    return lu_.transpose().solve(c);
  }

  void push(Index row, Vector col) { etas_.push_back({row, std::move(col)}); }
  std::size_t updates() const { return etas_.size(); }

 private:
  struct Eta {
    Index row;
    Vector col;
  };
  Eigen::PartialPivLU<Matrix> lu_;
  std::vector<Eta> etas_;
};

/// Two-phase revised simplex on the split basis pursuit program. Variable
/// j < n is u_j, n <= j < 2n is v_{j-n}, and 2n + i is the artificial of
/// row i.
class SplitSimplex {
 public:
  SplitSimplex(const Matrix& g, const Vector& y, const ToleranceSet& tol)
      : g_(g), m_(g.rows()), n_(g.cols()), tol_(tol) {
    scale_ = y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0;
    if (scale_ == 0.0) scale_ = 1.0;
    rhs_ = y / scale_;
    art_sign_.resize(m_);
    for (Index i = 0; i < m_; ++i) art_sign_[i] = rhs_[i] < 0.0 ? -1.0 : 1.0;
    basic_.assign(static_cast<std::size_t>(2 * n_ + m_), 0);
    basis_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      basis_[i] = 2 * n_ + i;
      basic_[basis_[i]] = 1;
    }
    xb_ = rhs_.cwiseAbs();
  }

  LpSolution run() {
    LpSolution sol;
    sol.rhs = rhs_ * scale_;
    sol.beta = Vector::Zero(n_);
    sol.duals = Vector::Zero(m_);
    const int cap = tol_.iter_factor * static_cast<int>(n_ + m_);

    if (!refactor()) return fail(sol, "singular basis at start");
    bool fresh = true;
    int phase = 1;
    int degenerate_streak = 0;

    while (true) {
      if (iterations_ > cap) return fail(sol, "iteration cap exceeded");
      if (factor_.updates() >= static_cast<std::size_t>(tol_.refactor_every)) {
        if (!refactor()) return fail(sol, "basis became singular");
        fresh = true;
      }
      const Vector pi = factor_.btran(basic_costs(phase));
      const Vector h = g_.transpose() * pi;
      const bool bland = degenerate_streak >= tol_.bland_after;
      const Index q = choose_entering(phase, h, bland);

      if (q < 0) {
        if (!fresh) {
          if (!refactor()) return fail(sol, "basis became singular");
          fresh = true;
          continue;
        }
        if (phase == 1) {
          double infeas = 0.0;
          for (Index i = 0; i < m_; ++i)
            if (basis_[i] >= 2 * n_) infeas += xb_[i];
          if (infeas > tol_.feas_tol) return fail(sol, "phase one infeasible (rank-deficient G)");
          if (!drive_out_artificials()) return fail(sol, "redundant rows (rank-deficient G)");
          if (!refactor()) return fail(sol, "basis became singular");
          phase = 2;
          degenerate_streak = 0;
          continue;
        }
        return finish(sol);
      }

      const Vector alpha = factor_.ftran(column(q));
      const Index r = ratio_test(alpha, bland);
      if (r < 0) return fail(sol, "unbounded direction");
      const double theta = std::max(xb_[r], 0.0) / alpha[r];
      degenerate_streak = theta <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(q, r, alpha, theta);
      fresh = false;
    }
  }

 private:
  Vector column(Index j) const {
    if (j < n_) return g_.col(j);
    if (j < 2 * n_) return -g_.col(j - n_);
    Vector e = Vector::Zero(m_);
    e[j - 2 * n_] = art_sign_[j - 2 * n_];
    return e;
  }

  Vector basic_costs(int phase) const {
    Vector c(m_);
    for (Index i = 0; i < m_; ++i) {
      const bool art = basis_[i] >= 2 * n_;
      c[i] = phase == 1 ? (art ? 1.0 : 0.0) : (art ? 0.0 : 1.0);
    }
    return c;
  }

  // Dantzig pricing (most negative reduced cost, lowest index on ties) or
  // Bland (lowest index with negative reduced cost). Artificials never
  // re-enter.
  Index choose_entering(int phase, const Vector& h, bool bland) const {
    const double c = phase == 1 ? 0.0 : 1.0;
    const double enter_tol = 1e-9;
    Index best = -1;
    double best_d = -enter_tol;
    for (Index j = 0; j < 2 * n_; ++j) {
      if (basic_[j]) continue;
      const double d = j < n_ ? c - h[j] : c + h[j - n_];
      if (d < best_d) {
        best = j;
        if (bland) return best;
        best_d = d;
      }
    }
    return best;
  }

  Index ratio_test(const Vector& alpha, bool bland) const {
    double theta = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m_; ++i)
      if (alpha[i] > tol_.pivot_tol) theta = std::min(theta, std::max(xb_[i], 0.0) / alpha[i]);
    if (!std::isfinite(theta)) return -1;
    const double slack = theta * 1e-9 + 1e-12;
    Index best = -1;
    for (Index i = 0; i < m_; ++i) {
      if (alpha[i] <= tol_.pivot_tol) continue;
      if (std::max(xb_[i], 0.0) / alpha[i] > theta + slack) continue;
      if (best < 0) {
        best = i;
      } else if (bland ? basis_[i] < basis_[best] : alpha[i] > alpha[best]) {
        best = i;
      }
    }
    return best;
  }

  void pivot(Index q, Index r, const Vector& alpha, double theta) {
    xb_.noalias() -= theta * alpha;
    xb_[r] = theta;
    for (Index i = 0; i < m_; ++i)
      if (xb_[i] < 0.0) xb_[i] = 0.0;
    basic_[basis_[r]] = 0;
    basis_[r] = q;
    basic_[q] = 1;
    factor_.push(r, alpha);
    ++iterations_;
  }

  bool refactor() {
    Matrix b(m_, m_);
    for (Index i = 0; i < m_; ++i) b.col(i) = column(basis_[i]);
    if (!factor_.factor(b, tol_.pivot_tol)) return false;
    xb_ = factor_.ftran(rhs_);
    return true;
  }

  // Swaps every zero-level artificial for a structural column through a
  // degenerate pivot; fails if a row of B^-1 G vanishes.
  bool drive_out_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[r] < 2 * n_) continue;
      Vector er = Vector::Zero(m_);
      er[r] = 1.0;
      const Vector row = g_.transpose() * factor_.btran(er);
      Index best = -1;
      double best_abs = 1e-7;
      for (Index j = 0; j < n_; ++j) {
        if (basic_[j] || basic_[j + n_]) continue;
        if (std::abs(row[j]) > best_abs) {
          best_abs = std::abs(row[j]);
          best = j;
        }
      }
      if (best < 0) return false;
      const Index q = row[best] > 0.0 ? best : best + n_;
      const Vector alpha = factor_.ftran(column(q));
      pivot(q, r, alpha, std::max(xb_[r], 0.0) / alpha[r]);
    }
    return true;
  }

  LpSolution& fail(LpSolution& sol, const std::string& why) {
    sol.status = LpStatus::NumericalFailure;
    sol.message = why;
    sol.iterations = iterations_;
    return sol;
  }

  LpSolution& finish(LpSolution& sol) {
    sol.iterations = iterations_;
    bool degenerate = false;
    for (Index i = 0; i < m_; ++i) {
      if (xb_[i] < -tol_.feas_tol) return fail(sol, "primal infeasible after refactorization");
      if (xb_[i] <= 1e-11) {
        xb_[i] = 0.0;
        degenerate = true;
      }
    }
    for (Index i = 0; i < m_; ++i) {
      const Index q = basis_[i];
      if (q < n_) {
        sol.beta[q] = xb_[i] * scale_;
      } else {
        sol.beta[q - n_] = -xb_[i] * scale_;
      }
      sol.basis.push_back(q % n_);
    }
    std::sort(sol.basis.begin(), sol.basis.end());
    sol.duals = factor_.btran(basic_costs(2));
    sol.objective = sol.beta.lpNorm<1>();
    sol.status = degenerate ? LpStatus::Degenerate : LpStatus::Optimal;

    const SensingMatrix gm(g_);
    const auto cert = extract_dual_certificate(sol, gm);
    const double y_inf = sol.rhs.size() ? sol.rhs.lpNorm<Eigen::Infinity>() : 0.0;
    if (!cert.passes(tol_, m_, y_inf, sol.objective)) return fail(sol, "final certificate check failed");
    return sol;
  }

  const Matrix& g_;
  Index m_;
  Index n_;
  ToleranceSet tol_;
  double scale_ = 1.0;
  Vector rhs_;
  std::vector<double> art_sign_;
  std::vector<char> basic_;
  IndexSet basis_;
  Vector xb_;
  BasisFactor factor_;
  int iterations_ = 0;
};

}  // namespace detail

/// Vertex solution of min ||b||_1 s.t. G b = y.
///
/// A solution that cannot be certified (singular basis, rank-deficient G,
/// iteration cap, failed final certificate) comes back with status
/// NumericalFailure; `message` says which.
inline LpSolution basis_pursuit(const SensingMatrix& g, const Vector& y, const ToleranceSet& tol = {}) {
  detail::require(g.m() >= 1 && g.n() >= 1, "basis_pursuit: empty matrix");
  detail::require(y.size() == g.m(), "basis_pursuit: rhs length does not match matrix rows");
  detail::SplitSimplex simplex(g.entries, y, tol);
  return simplex.run();
}

}  // namespace tbp
