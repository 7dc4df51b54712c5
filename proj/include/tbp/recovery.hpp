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

// Sign-pattern recovery: thresholded basis pursuit, its two-block OLS
// variant, and the LASSO / max-correlation / exhaustive maximum-likelihood
// baselines.

#pragma once

#include "tbp/core.hpp"
#include "tbp/ensembles.hpp"
#include "tbp/l1_solver.hpp"
#include "tbp/linalg.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace tbp {

enum class RecoveryStatus { Ok, SolverFailure, NotConverged };

inline std::string to_string(RecoveryStatus s) {
  switch (s) {
    case RecoveryStatus::Ok: return "ok";
    case RecoveryStatus::SolverFailure: return "solver_failure";
    case RecoveryStatus::NotConverged: return "not_converged";
  }
  return "?";
}

/// Miss / false-alarm counts against a known truth.
struct SupportMetrics {
  Index n_miss = 0;
  Index n_false = 0;
  /// Support entries whose sign is reproduced by the estimate.
  Index sign_matched = 0;
  bool exact_sign_recovery = false;
  double l2_error = 0.0;
};

struct SolverSummary {
  LpStatus status = LpStatus::NumericalFailure;
  int iterations = 0;
  double objective = 0.0;
  IndexSet basis;
};

struct RecoveryReport {
  Vector estimate;
  IndexSet est_support;
  std::vector<int> est_signs;
  /// Unprocessed solver output (BP vertex or LASSO iterate) before any
  /// thresholding or refitting.
  Vector raw;
  /// Magnitudes at or below this count as zero when scoring.
  double support_cutoff = 0.0;
  std::optional<SupportMetrics> metrics;
  double runtime_ms = 0.0;
  std::optional<SolverSummary> solver_stats;
  /// Least-squares residual for the refitting estimators.
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  RecoveryStatus status = RecoveryStatus::Ok;
  std::string message;
};

/// N_m and N_f computed literally from the positive/negative support sets of
/// truth and estimate.
inline SupportMetrics compute_metrics(const SparseSignal& truth, const Vector& estimate, double cutoff = 0.0) {
  detail::require(estimate.size() == truth.n(), "compute_metrics: dimension mismatch");
  SupportMetrics out;
  Index est_support = 0;
  for (Index j = 0; j < estimate.size(); ++j)
    if (std::abs(estimate[j]) > cutoff) ++est_support;
  for (std::size_t i = 0; i < truth.support().size(); ++i) {
    const double e = estimate[truth.support()[i]];
    if (std::abs(e) > cutoff && sign_of(e) == sign_of(truth.values()[i])) ++out.sign_matched;
  }
  out.n_miss = truth.k() - out.sign_matched;
  out.n_false = est_support - out.sign_matched;
  out.exact_sign_recovery = out.n_miss == 0 && out.n_false == 0;
  out.l2_error = (estimate - truth.dense()).norm();
  return out;
}

/// Fills `report.metrics` against the ground truth.
inline RecoveryReport& score(RecoveryReport& report, const SparseSignal& truth) {
  report.metrics = compute_metrics(truth, report.estimate, report.support_cutoff);
  return report;
}

/// Zeroes every entry with |v_j| < x_min / 2; entries exactly at the
/// threshold are kept.
inline Vector threshold(const Vector& v, double x_min) {
  Vector q = v;
  const double t = 0.5 * x_min;
  for (Index j = 0; j < q.size(); ++j)
    if (std::abs(q[j]) < t) q[j] = 0.0;
  return q;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void fill_support(RecoveryReport& r) {
  r.est_support = support_of(r.estimate, r.support_cutoff);
  r.est_signs.clear();
  for (Index j : r.est_support) r.est_signs.push_back(sign_of(r.estimate[j]));
}

inline SolverSummary summarize(const LpSolution& s) { return {s.status, s.iterations, s.objective, s.basis}; }

inline double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Advances `c` (ascending k-subset of {0..n-1}) to the next subset in
/// lexicographic order; false after the last one.
inline bool next_combination(IndexSet& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  Index i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

}  // namespace detail

/// Thresholded basis pursuit: basis pursuit on (G, y), then zero every
/// coefficient below x_min / 2.
inline RecoveryReport tbp(const SensingMatrix& g, const Vector& y, double x_min, const ToleranceSet& tol = {}) {
  detail::require(x_min > 0.0, "tbp: x_min must be positive");
  detail::Stopwatch clock;
  RecoveryReport r;
  const LpSolution sol = basis_pursuit(g, y, tol);
  r.solver_stats = detail::summarize(sol);
  if (!sol.certified()) {
    r.status = RecoveryStatus::SolverFailure;
    r.message = sol.message;
    r.estimate = r.raw = Vector::Zero(g.n());
  } else {
    r.raw = sol.beta;
    r.estimate = threshold(sol.beta, x_min);
  }
  detail::fill_support(r);
  r.runtime_ms = clock.ms();
  return r;
}

/// TBP+OLS on 3m measurements: basis pursuit on the first m rows selects a
/// candidate set I (|I| <= m), least squares on the remaining 2m rows
/// restricted to I re-estimates the amplitudes, then the x_min / 2
/// threshold is applied.
inline RecoveryReport tbp_ols(const SensingMatrix& g, const Vector& y, double x_min, const ToleranceSet& tol = {}) {
  detail::require(x_min > 0.0, "tbp_ols: x_min must be positive");
  detail::require(g.m() % 3 == 0 && g.m() >= 3, "tbp_ols: row count must be a positive multiple of 3");
  detail::require(y.size() == g.m(), "tbp_ols: rhs length does not match matrix rows");
  detail::Stopwatch clock;
  const Index m = g.m() / 3;
  const SensingMatrix g1(g.entries.topRows(m), g.ensemble);
  const Matrix g2 = g.entries.bottomRows(2 * m);

  RecoveryReport r;
  const LpSolution sol = basis_pursuit(g1, y.head(m), tol);
  r.solver_stats = detail::summarize(sol);
  r.estimate = Vector::Zero(g.n());
  if (!sol.certified()) {
    r.status = RecoveryStatus::SolverFailure;
    r.message = sol.message;
    r.raw = r.estimate;
  } else {
    r.raw = sol.beta;
    const IndexSet candidates = support_of(sol.beta);
    if (static_cast<Index>(candidates.size()) > 2 * m)
      throw std::logic_error("tbp_ols: candidate set larger than the regression block");
    const auto fit = least_squares(select_columns(g2, candidates), y.tail(2 * m));
    Vector refit = Vector::Zero(g.n());
    for (std::size_t c = 0; c < candidates.size(); ++c) refit[candidates[c]] = fit.xhat[static_cast<Index>(c)];
    r.fit_residual = fit.residual;
    r.estimate = threshold(refit, x_min);
  }
  detail::fill_support(r);
  r.runtime_ms = clock.ms();
  return r;
}

enum class LambdaRule {
  Explicit,
  /// 2 sigma sqrt(2 log n)
  CandesPlan,
  /// 2 sigma sqrt(n)
  Tropp,
};

struct LassoConfig {
  double lambda = 0.0;
  int max_iters = 100000;
  double conv_tol = 1e-8;
  LambdaRule lambda_rule = LambdaRule::Explicit;
  /// Entries with |b_j| <= cutoff count as zero in support metrics.
  double support_cutoff = 1e-6;
};

/// Regularization weight for a configuration; the noise-based rules need the
/// per-component noise standard deviation and the signal dimension.
inline double resolve_lambda(const LassoConfig& cfg, double sigma, Index n) {
  switch (cfg.lambda_rule) {
    case LambdaRule::Explicit: return cfg.lambda;
    case LambdaRule::CandesPlan: return 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
    case LambdaRule::Tropp: return 2.0 * sigma * std::sqrt(static_cast<double>(n));
  }
  return cfg.lambda;
}

/// Worst violation of the LASSO stationarity conditions at `beta`:
/// |G_j'r| <= lambda off the support, G_j'r = lambda sgn(b_j) on it.
inline double lasso_stationarity(const Matrix& g, const Vector& y, const Vector& beta, double lambda) {
  const Vector corr = g.transpose() * (y - g * beta);
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j] == 0.0 ? std::max(0.0, std::abs(corr[j]) - lambda)
                                    : std::abs(corr[j] - lambda * sign_of(beta[j]));
    worst = std::max(worst, v);
  }
  return worst;
}

/// min 0.5 ||y - G b||^2 + lambda ||b||_1 by cyclic coordinate descent.
///
/// `cfg.lambda` is used as given; apply resolve_lambda first for the
/// noise-based rules. Convergence means the stationarity violation is at
/// most `conv_tol`; otherwise the report is marked NotConverged.
inline RecoveryReport lasso(const SensingMatrix& g, const Vector& y, const LassoConfig& cfg) {
  detail::require(cfg.lambda >= 0.0, "lasso: lambda must be nonnegative");
  detail::require(cfg.max_iters >= 1 && cfg.conv_tol > 0.0, "lasso: invalid iteration settings");
  detail::require(y.size() == g.m(), "lasso: rhs length does not match matrix rows");
  detail::Stopwatch clock;
  const Matrix& a = g.entries;
  const Index n = g.n();
  const Vector colsq = a.colwise().squaredNorm();
  Vector beta = Vector::Zero(n);
  Vector resid = y;
  bool converged = false;

  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    double max_step = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (colsq[j] == 0.0) continue;
      const double rho = a.col(j).dot(resid) + colsq[j] * beta[j];
      const double shrunk = std::max(std::abs(rho) - cfg.lambda, 0.0);
      const double next = shrunk == 0.0 ? 0.0 : std::copysign(shrunk, rho) / colsq[j];
      const double step = next - beta[j];
      if (step != 0.0) {
        resid.noalias() -= step * a.col(j);
        beta[j] = next;
        max_step = std::max(max_step, std::abs(step) * std::sqrt(colsq[j]));
      }
    }
    if (max_step < cfg.conv_tol || sweep % 50 == 49) {
      resid = y - a * beta;
      if (lasso_stationarity(a, y, beta, cfg.lambda) <= cfg.conv_tol) {
        converged = true;
        break;
      }
    }
  }

  RecoveryReport r;
  r.raw = beta;
  r.estimate = beta;
  r.support_cutoff = cfg.support_cutoff;
  if (!converged) {
    r.status = RecoveryStatus::NotConverged;
    r.message = "stationarity not reached within max_iters sweeps";
  }
  detail::fill_support(r);
  r.runtime_ms = clock.ms();
  return r;
}

/// LASSO followed by the x_min / 2 threshold. Not one of the reference
/// baselines; offered for like-for-like comparisons with TBP.
inline RecoveryReport thresholded_lasso(const SensingMatrix& g, const Vector& y, const LassoConfig& cfg, double x_min) {
  detail::require(x_min > 0.0, "thresholded_lasso: x_min must be positive");
  RecoveryReport r = lasso(g, y, cfg);
  r.estimate = threshold(r.raw, x_min);
  r.support_cutoff = 0.0;
  detail::fill_support(r);
  return r;
}

/// Keeps the k columns with the largest |G_j' y| (lowest index wins ties),
/// refits their amplitudes by least squares. `est_signs` are the
/// correlation signs; `estimate` carries the refitted amplitudes.
inline RecoveryReport max_correlation(const SensingMatrix& g, const Vector& y, Index k) {
  detail::require(k >= 1 && k <= g.n(), "max_correlation: need 1 <= k <= n");
  detail::require(y.size() == g.m(), "max_correlation: rhs length does not match matrix rows");
  detail::Stopwatch clock;
  const Vector corr = g.entries.transpose() * y;
  IndexSet order(static_cast<std::size_t>(g.n()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(corr[a]) > std::abs(corr[b]); });
  IndexSet chosen(order.begin(), order.begin() + k);
  std::sort(chosen.begin(), chosen.end());

  RecoveryReport r;
  r.raw = corr;
  r.estimate = Vector::Zero(g.n());
  const Matrix sub = select_columns(g.entries, chosen);
  if (sub.rows() >= sub.cols()) {
    const auto fit = least_squares(sub, y);
    for (std::size_t c = 0; c < chosen.size(); ++c) r.estimate[chosen[c]] = fit.xhat[static_cast<Index>(c)];
    r.fit_residual = fit.residual;
  } else {
    // More columns than rows: the correlations themselves are the estimate.
    for (Index j : chosen) r.estimate[j] = corr[j];
  }
  r.est_support = chosen;
  for (Index j : chosen) r.est_signs.push_back(sign_of(corr[j]));
  r.runtime_ms = clock.ms();
  return r;
}

enum class MlFit {
  /// Amplitudes fitted by least squares on each subset.
  LeastSquares,
  /// Amplitudes fixed to +-1; all sign patterns enumerated per subset.
  SignedUnit,
};

/// Largest number of candidate fits ml_oracle will evaluate.
inline constexpr double kMlEnumerationCap = 1e6;

/// Exhaustive maximum-likelihood decoder: scans every k-subset and keeps
/// the one whose fit leaves the smallest residual (first in lexicographic
/// order on ties). Refuses to run past kMlEnumerationCap fits.
inline RecoveryReport ml_oracle(const SensingMatrix& g, const Vector& y, Index k, MlFit fit = MlFit::LeastSquares) {
  detail::require(k >= 1 && k <= g.n(), "ml_oracle: need 1 <= k <= n");
  detail::require(g.m() >= k, "ml_oracle: need m >= k");
  detail::require(y.size() == g.m(), "ml_oracle: rhs length does not match matrix rows");
  double fits = detail::binomial(g.n(), k);
  if (fit == MlFit::SignedUnit) fits *= std::ldexp(1.0, static_cast<int>(std::min<Index>(k, 60)));
  detail::require(fits <= kMlEnumerationCap, "ml_oracle: enumeration exceeds the combinatorial cap");
  detail::Stopwatch clock;

  IndexSet subset(static_cast<std::size_t>(k));
  std::iota(subset.begin(), subset.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  IndexSet best_subset;
  Vector best_amp;
  do {
    const Matrix sub = select_columns(g.entries, subset);
    if (fit == MlFit::LeastSquares) {
      const auto ls = least_squares(sub, y);
      if (ls.residual < best) {
        best = ls.residual;
        best_subset = subset;
        best_amp = ls.xhat;
      }
    } else {
      Vector s(k);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        for (Index i = 0; i < k; ++i) s[i] = (mask >> i) & 1U ? -1.0 : 1.0;
        const double res = (y - sub * s).norm();
        if (res < best) {
          best = res;
          best_subset = subset;
          best_amp = s;
        }
      }
    }
  } while (detail::next_combination(subset, g.n()));

  RecoveryReport r;
  r.estimate = Vector::Zero(g.n());
  for (std::size_t c = 0; c < best_subset.size(); ++c) r.estimate[best_subset[c]] = best_amp[static_cast<Index>(c)];
  r.raw = r.estimate;
  r.fit_residual = best;
  detail::fill_support(r);
  r.runtime_ms = clock.ms();
  return r;
}

}  // namespace tbp
