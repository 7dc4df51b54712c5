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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<Index>;

/// Tolerances shared by the LP solver and its certificate checks.
///
/// `feas_tol` is relative to max(1, ||y||_inf); the others are absolute on
/// the scaled problem.
struct ToleranceSet {
  double feas_tol = 1e-8;
  double pivot_tol = 1e-9;
  double dual_tol = 1e-7;
  double gap_tol = 1e-6;
  /// Iteration cap is `iter_factor * (n + m)`.
  int iter_factor = 50;
  /// Pivots between fresh LU factorizations of the basis.
  int refactor_every = 100;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
};

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

/// Indices of entries with |v_j| > cutoff, ascending.
inline IndexSet support_of(const Vector& v, double cutoff = 0.0) {
  IndexSet s;
  for (Index j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) > cutoff) s.push_back(j);
  return s;
}

/// Columns of `a` listed in `cols`, in order.
inline Matrix select_columns(const Matrix& a, const IndexSet& cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = a.col(cols[c]);
  return out;
}

/// Raised when an operation needs a full-rank matrix and does not get one.
struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace detail
}  // namespace tbp
