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

// Theory constants and empirical verifiers: restricted isometry constants,
// the l2 stability constant C_s, the admissible noise level eps0, the
// null-space form of basis pursuit, minimum-norm noise conversion and the
// critical input-noise scale gamma0.

#pragma once

#include "tbp/core.hpp"
#include "tbp/ensembles.hpp"
#include "tbp/l1_solver.hpp"
#include "tbp/linalg.hpp"
#include "tbp/recovery.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

namespace tbp {

// ---------------------------------------------------------------------------
// Restricted isometry constants

enum class RipMethod { ExactEnumeration, MonteCarloLowerBound };

struct RipReport {
  Index k = 0;
  double delta_k = 0.0;
  IndexSet extremal_support;
  RipMethod method = RipMethod::ExactEnumeration;
  std::size_t supports_checked = 0;
};

/// Largest number of supports rip_exact will enumerate.
inline constexpr double kRipEnumerationCap = 1e6;

namespace detail {

/// max(lambda_max - 1, 1 - lambda_min) of the Gram block indexed by `t`.
inline double isometry_defect(const Matrix& gram, const IndexSet& t) {
  const Index k = static_cast<Index>(t.size());
  Matrix block(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) block(a, b) = gram(t[a], t[b]);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return std::max(ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff());
}

}  // namespace detail

/// Exact delta_k by enumerating every k-column support.
///
/// Supports smaller than k need not be scanned: the eigenvalues of a
/// principal sub-block interlace those of the block, so the extremes are
/// attained at |T| = k.
inline RipReport rip_exact(const SensingMatrix& g, Index k) {
  detail::require(k >= 1 && k <= g.n(), "rip_exact: need 1 <= k <= n");
  detail::require(detail::binomial(g.n(), k) <= kRipEnumerationCap,
                  "rip_exact: too many supports to enumerate; use rip_monte_carlo");
  const Matrix gram = g.entries.transpose() * g.entries;
  RipReport rep;
  rep.k = k;
  rep.method = RipMethod::ExactEnumeration;
  rep.delta_k = -std::numeric_limits<double>::infinity();
  IndexSet t(static_cast<std::size_t>(k));
  std::iota(t.begin(), t.end(), Index{0});
  do {
    const double d = detail::isometry_defect(gram, t);
    ++rep.supports_checked;
    if (d > rep.delta_k) {
      rep.delta_k = d;
      rep.extremal_support = t;
    }
  } while (detail::next_combination(t, g.n()));
  rep.delta_k = std::max(rep.delta_k, 0.0);
  return rep;
}

/// Lower bound on delta_k from `samples` uniformly drawn k-supports.
inline RipReport rip_monte_carlo(const SensingMatrix& g, Index k, std::size_t samples, RngStream& rng) {
  detail::require(k >= 1 && k <= g.n(), "rip_monte_carlo: need 1 <= k <= n");
  detail::require(samples >= 1, "rip_monte_carlo: need at least one sample");
  const Matrix gram = g.entries.transpose() * g.entries;
  RipReport rep;
  rep.k = k;
  rep.method = RipMethod::MonteCarloLowerBound;
  rep.delta_k = -std::numeric_limits<double>::infinity();
  IndexSet perm(static_cast<std::size_t>(g.n()));
  for (std::size_t s = 0; s < samples; ++s) {
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, g.n() - 1);
      std::swap(perm[i], perm[pick(rng.engine())]);
    }
    IndexSet t(perm.begin(), perm.begin() + k);
    std::sort(t.begin(), t.end());
    const double d = detail::isometry_defect(gram, t);
    ++rep.supports_checked;
    if (d > rep.delta_k) {
      rep.delta_k = d;
      rep.extremal_support = t;
    }
  }
  rep.delta_k = std::max(rep.delta_k, 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// Closed-form constants

/// C_s in ||x_hat - (x + w)||_2 <= C_s ||w||_1 / sqrt(k), from the tail
/// bound with block size M = 2k:
///
///   C_M = sqrt(1 - delta_3k) - sqrt((1 + delta_2k) / 2)
///   C_s = sqrt(2) (sqrt(1 + delta_2k) (1 + 1/sqrt(2)) / C_M + 1)
///
/// Throws std::domain_error when C_M <= 0.
inline double compute_cs(double delta_2k, double delta_3k) {
  detail::require(delta_2k >= 0.0 && delta_3k >= 0.0, "compute_cs: RIP constants must be nonnegative");
  detail::require_domain(delta_3k < 1.0, "compute_cs: delta_3k must be below 1");
  const double cm = std::sqrt(1.0 - delta_3k) - std::sqrt(0.5 * (1.0 + delta_2k));
  detail::require_domain(cm > 0.0, "compute_cs: C_M <= 0, (1 + delta_2k)/2 + delta_3k < 1 violated");
  const double r2 = std::sqrt(2.0);
  return r2 * (std::sqrt(1.0 + delta_2k) * (1.0 + 1.0 / r2) / cm + 1.0);
}

/// ||x_hat - (x + w)||_2 bound C_s ||w||_1 / sqrt(k).
inline double l2_stability_bound(double c_s, const Vector& w, Index k) {
  detail::require(k >= 1, "l2_stability_bound: need k >= 1");
  return c_s * w.lpNorm<1>() / std::sqrt(static_cast<double>(k));
}

struct TheoryConstants {
  double alpha = 0.0;
  double C = 0.0;
  double C_s = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double epsilon0 = 0.0;
};

/// Perturbation constants d1, d2 and the admissible l_inf noise level
///
///   r   = sqrt(C / (C - 1))
///   d1  = (2 sqrt(2) / alpha) (r - 1)^-1 C_s
///   d2  = (2 sqrt(2) / sqrt(alpha)) (r - 1)^-1 r C_s
///   eps0 = 1/2 (1 + d1 + d2 sqrt(2 log n))^-1
inline TheoryConstants compute_epsilon0(double alpha, double C, double c_s, Index n) {
  detail::require_domain(C > 1.0, "compute_epsilon0: need C > 1");
  detail::require_domain(alpha > 0.0 && alpha < 1.0, "compute_epsilon0: need 0 < alpha < 1");
  detail::require(c_s > 0.0 && n >= 2, "compute_epsilon0: need C_s > 0 and n >= 2");
  TheoryConstants t;
  t.alpha = alpha;
  t.C = C;
  t.C_s = c_s;
  const double r = std::sqrt(C / (C - 1.0));
  const double amp = 2.0 * std::sqrt(2.0) / (r - 1.0) * c_s;
  t.d1 = amp / alpha;
  t.d2 = amp / std::sqrt(alpha) * r;
  t.epsilon0 = 0.5 / (1.0 + t.d1 + t.d2 * std::sqrt(2.0 * std::log(static_cast<double>(n))));
  return t;
}

// ---------------------------------------------------------------------------
// Null-space reformulation

struct NullSpaceBasis {
  /// n x (n - m), orthonormal columns spanning null(G).
  Matrix A;
};

/// Orthonormal null-space basis from a Householder QR of G'.
inline NullSpaceBasis null_space_basis(const SensingMatrix& g) {
  detail::require(g.m() <= g.n(), "null_space_basis: need m <= n");
  const Matrix gt = g.entries.transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(gt);
  if (qr.rank() < g.m()) throw RankDeficientError("null_space_basis: G is not full row rank");
  const Matrix q = qr.householderQ();
  return {q.rightCols(g.n() - g.m())};
}

/// Max deviation of the BP solution from the affine set z + range(A),
/// where z = x + w is any point with G z = y. The null-space coordinate
/// v_hat is the least-squares fit of b_hat - z onto A.
inline double verify_null_space_equivalence(const SensingMatrix& g, const Vector& y, const Vector& x_plus_w,
                                            const Vector& beta, const NullSpaceBasis& ns,
                                            const ToleranceSet& tol = {}) {
  detail::require(x_plus_w.size() == g.n() && beta.size() == g.n(), "verify_null_space_equivalence: length mismatch");
  detail::require(ns.A.rows() == g.n(), "verify_null_space_equivalence: basis does not match matrix");
  const double y_inf = y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0;
  const double infeas = (g.entries * x_plus_w - y).lpNorm<Eigen::Infinity>();
  detail::require(infeas <= tol.feas_tol * std::max(1.0, y_inf), "verify_null_space_equivalence: y != G (x + w)");
  if (ns.A.cols() == 0) return (x_plus_w - beta).lpNorm<Eigen::Infinity>();
  const auto fit = least_squares(ns.A, beta - x_plus_w);
  return (x_plus_w + ns.A * fit.xhat - beta).lpNorm<Eigen::Infinity>();
}

inline double verify_null_space_equivalence(const SensingMatrix& g, const Vector& y, const Vector& x_plus_w,
                                            const LpSolution& sol, const ToleranceSet& tol = {}) {
  return verify_null_space_equivalence(g, y, x_plus_w, sol.beta, null_space_basis(g), tol);
}

// ---------------------------------------------------------------------------
// Output-to-input noise conversion

/// Minimum-l2-norm w with G w = e, i.e. w = G'(GG')^-1 e, computed with a
/// complete orthogonal decomposition of G.
inline Vector min_norm_noise(const SensingMatrix& g, const Vector& e) {
  detail::require(e.size() == g.m(), "min_norm_noise: length mismatch");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(g.entries);
  if (cod.rank() < g.m()) throw RankDeficientError("min_norm_noise: G is not full row rank");
  return cod.solve(e);
}

struct BoundReport {
  double linf = 0.0;
  double linf_bound = 0.0;
  double l1 = 0.0;
  double l1_bound = 0.0;
  /// ||G w - e||_inf
  double residual = 0.0;
  bool linf_ok = false;
  bool l1_ok = false;
};

/// Evaluates the high-probability bounds on the minimum-norm conversion of
/// N(0, eps^2) output noise, with C = n / m > 1:
///
///   ||w||_inf <= 2 eps / (sqrt(C) - 1) sqrt(2 log n)
///   ||w||_1   <= 2 sqrt(2C) / (sqrt(C) - 1) m eps
inline BoundReport check_min_norm_bounds(const SensingMatrix& g, const Vector& e, const Vector& w, double eps) {
  detail::require(w.size() == g.n() && e.size() == g.m(), "check_min_norm_bounds: length mismatch");
  detail::require(eps >= 0.0, "check_min_norm_bounds: eps must be nonnegative");
  const double n = static_cast<double>(g.n());
  const double m = static_cast<double>(g.m());
  const double C = n / m;
  detail::require_domain(C > 1.0, "check_min_norm_bounds: need n > m");
  const double root_c = std::sqrt(C);
  BoundReport r;
  r.linf = w.lpNorm<Eigen::Infinity>();
  r.l1 = w.lpNorm<1>();
  r.linf_bound = 2.0 * eps / (root_c - 1.0) * std::sqrt(2.0 * std::log(n));
  r.l1_bound = 2.0 * std::sqrt(2.0 * C) / (root_c - 1.0) * m * eps;
  r.residual = (g.entries * w - e).lpNorm<Eigen::Infinity>();
  r.linf_ok = r.linf <= r.linf_bound;
  r.l1_ok = r.l1 <= r.l1_bound;
  return r;
}

// ---------------------------------------------------------------------------
// Critical noise scale

enum class Gamma0Status {
  Ok,
  /// The noiseless instance is not recovered exactly.
  PreconditionFailed,
  /// Misses already at the smallest bracket eps = 2^-20.
  FailedAtSmallest,
  /// No miss up to eps = 2^20; value is that last passing level.
  NoFailureFound,
};

struct Gamma0Result {
  double value = 0.0;
  Gamma0Status status = Gamma0Status::Ok;
  int solves = 0;
};

/// Largest eps for which TBP on y = G(x + eps w) has no misses, along a
/// fixed direction w with ||w||_inf = 1. The bracket doubles from 2^-20
/// until the first miss, then bisects for at most 40 steps or until the
/// bracket is narrower than rel_tol times its lower end.
inline Gamma0Result empirical_gamma0(const SensingMatrix& g, const SparseSignal& x, const Vector& w_direction,
                                     const ToleranceSet& tol = {}, double rel_tol = 1e-3) {
  detail::require(w_direction.size() == g.n() && x.n() == g.n(), "empirical_gamma0: length mismatch");
  detail::require(std::abs(w_direction.lpNorm<Eigen::Infinity>() - 1.0) <= 1e-12,
                  "empirical_gamma0: direction must have unit l_inf norm");
  detail::require(x.k() >= 1, "empirical_gamma0: needs a nonzero signal");
  const Vector xd = x.dense();
  Gamma0Result out;
  auto no_miss = [&](double eps, bool exact) {
    ++out.solves;
    auto r = tbp(g, g.entries * (xd + eps * w_direction), x.x_min(), tol);
    if (r.status != RecoveryStatus::Ok) return false;
    score(r, x);
    return exact ? r.metrics->exact_sign_recovery : r.metrics->n_miss == 0;
  };

  if (!no_miss(0.0, true)) {
    out.status = Gamma0Status::PreconditionFailed;
    return out;
  }
  double lo = 0.0;
  double hi = std::ldexp(1.0, -20);
  while (no_miss(hi, false)) {
    lo = hi;
    hi *= 2.0;
    if (hi > std::ldexp(1.0, 20)) {
      out.value = lo;
      out.status = Gamma0Status::NoFailureFound;
      return out;
    }
  }
  if (lo == 0.0) {
    out.status = Gamma0Status::FailedAtSmallest;
    return out;
  }
  for (int step = 0; step < 40 && hi - lo > rel_tol * lo; ++step) {
    const double mid = 0.5 * (lo + hi);
    (no_miss(mid, false) ? lo : hi) = mid;
  }
  out.value = lo;
  return out;
}

// ---------------------------------------------------------------------------
// Support-error bound

/// max{N_m, N_f} <= (n / alpha) (2 C_s eps / (1 - 2 eps))^2 for input noise
/// with ||w||_inf <= eps x_min.
inline double corollary_support_bound(Index n, double c_s, double alpha, double eps) {
  detail::require_domain(eps >= 0.0 && eps < 0.5, "corollary bound needs 0 <= eps < 1/2");
  detail::require(alpha > 0.0, "corollary bound needs alpha > 0");
  const double t = 2.0 * c_s * eps / (1.0 - 2.0 * eps);
  return static_cast<double>(n) / alpha * t * t;
}

/// The same bound written directly in k: n^2 eps^2 C_s^2 / (k (1/2 - eps)^2).
/// Equals corollary_support_bound with alpha = k / n, and is the form to use
/// when k is not a fixed fraction of n.
inline double corollary_support_bound_direct(Index n, Index k, double c_s, double eps) {
  detail::require_domain(eps >= 0.0 && eps < 0.5, "corollary bound needs 0 <= eps < 1/2");
  detail::require(k >= 1, "corollary bound needs k >= 1");
  const double nn = static_cast<double>(n);
  return nn * nn * eps * eps * c_s * c_s / (static_cast<double>(k) * (0.5 - eps) * (0.5 - eps));
}

/// True iff both N_m and N_f of a scored report respect the support bound.
inline bool corollary_bound_check(const RecoveryReport& report, double c_s, double alpha, double eps) {
  detail::require(report.metrics.has_value(), "corollary_bound_check: report has not been scored");
  const double bound = corollary_support_bound(report.estimate.size(), c_s, alpha, eps);
  return static_cast<double>(report.metrics->n_miss) <= bound && static_cast<double>(report.metrics->n_false) <= bound;
}

}  // namespace tbp
