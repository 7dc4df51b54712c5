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

#include "tbp/core.hpp"

#include <Eigen/QR>

namespace tbp {

struct LeastSquaresResult {
  Vector xhat;
  /// ||A xhat - b||_2
  double residual = 0.0;
  Index rank = 0;
  /// Set when A is numerically rank deficient; xhat is then the
  /// minimum-norm minimizer.
  bool rank_deficient = false;
};

/// Solves min ||A x - b||_2 for a tall or square A through a column-pivoted
/// Householder QR. Rank-deficient systems fall back to a complete
/// orthogonal decomposition so the minimum-norm minimizer is returned.
inline LeastSquaresResult least_squares(const Matrix& a, const Vector& b) {
  detail::require(a.rows() == b.size(), "least_squares: row count mismatch");
  detail::require(a.rows() >= a.cols(), "least_squares: needs at least as many rows as columns");
  LeastSquaresResult out;
  if (a.cols() == 0) {
    out.xhat = Vector(0);
    out.residual = b.norm();
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  out.rank = qr.rank();
  if (out.rank == a.cols()) {
    out.xhat = qr.solve(b);
  } else {
    out.rank_deficient = true;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    out.xhat = cod.solve(b);
  }
  out.residual = (a * out.xhat - b).norm();
  return out;
}

}  // namespace tbp
