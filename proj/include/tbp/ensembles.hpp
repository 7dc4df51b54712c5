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

// Seeded generators for sensing matrices, sparse signals and noise.

#pragma once

#include "tbp/core.hpp"
#include "tbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>

namespace tbp {

enum class Ensemble { Gaussian, Bernoulli, Explicit };

inline std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::Gaussian: return "gaussian";
    case Ensemble::Bernoulli: return "bernoulli";
    case Ensemble::Explicit: return "explicit";
  }
  return "?";
}

/// Dense m x n measurement operator with its provenance.
struct SensingMatrix {
  Matrix entries;
  Ensemble ensemble = Ensemble::Explicit;

  SensingMatrix() = default;
  explicit SensingMatrix(Matrix g, Ensemble e = Ensemble::Explicit) : entries(std::move(g)), ensemble(e) {}

  Index m() const { return entries.rows(); }
  Index n() const { return entries.cols(); }
};

/// k-sparse ground truth. Off-support entries are zero by construction.
///
/// A k = 0 signal has an empty support and `x_min == 0`.
class SparseSignal {
 public:
  SparseSignal() = default;

  /// Builds a signal from (index, value) pairs. Indices are sorted here;
  /// duplicates, out-of-range indices and zero values are rejected.
  SparseSignal(Index n, IndexSet support, std::vector<double> values) : n_(n) {
    detail::require(n >= 1, "signal dimension must be positive");
    detail::require(support.size() == values.size(), "support/value length mismatch");
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
    for (auto o : order) {
      detail::require(support[o] >= 0 && support[o] < n, "support index out of range");
      detail::require(values[o] != 0.0 && std::isfinite(values[o]), "support values must be finite and nonzero");
      if (!support_.empty()) detail::require(support_.back() != support[o], "duplicate support index");
      support_.push_back(support[o]);
      values_.push_back(values[o]);
    }
    x_min_ = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
      x_min_ = (i == 0) ? std::abs(values_[i]) : std::min(x_min_, std::abs(values_[i]));
  }

  Index n() const { return n_; }
  Index k() const { return static_cast<Index>(support_.size()); }
  const IndexSet& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double x_min() const { return x_min_; }

  Vector dense() const {
    Vector x = Vector::Zero(n_);
    for (std::size_t i = 0; i < support_.size(); ++i) x[support_[i]] = values_[i];
    return x;
  }

  /// Same support, every value multiplied by c > 0.
  SparseSignal scaled(double c) const {
    detail::require(c > 0.0, "scale must be positive");
    std::vector<double> v = values_;
    for (auto& e : v) e *= c;
    return SparseSignal(n_, support_, v);
  }

 private:
  Index n_ = 0;
  IndexSet support_;
  std::vector<double> values_;
  double x_min_ = 0.0;
};

/// y = Gx + e with e_j ~ N(0, sigma^2).
struct OutputGaussian {
  double sigma = 0.0;
};
/// y = G(x + w) for a fixed w with ||w||_inf <= eps_inf.
struct InputDeterministic {
  Vector w;
  double eps_inf = 0.0;
};
/// y = G(x + w) with w_j ~ N(0, sigma^2).
struct InputGaussian {
  double sigma = 0.0;
};
using NoiseSpec = std::variant<OutputGaussian, InputDeterministic, InputGaussian>;

struct Measurement {
  Vector y;
  /// e (length m) for output noise, w (length n) for input noise.
  Vector noise;
  bool input_noise = false;
};

/// m x n matrix from the requested ensemble: N(0, 1/m) entries for
/// Gaussian, +-1/sqrt(m) for Bernoulli.
inline SensingMatrix gen_matrix(Index m, Index n, Ensemble ensemble, RngStream& rng) {
  detail::require(m >= 1 && n >= 1, "matrix dimensions must be positive");
  detail::require(ensemble != Ensemble::Explicit, "explicit matrices are constructed directly");
  Matrix g(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  // Column-major fill so that the draw order matches the storage order.
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i)
      g(i, j) = ensemble == Ensemble::Gaussian ? scale * rng.gaussian() : (rng.coin() ? scale : -scale);
  return SensingMatrix(std::move(g), ensemble);
}

enum class SignMode { RandomSigns, Given };
enum class AmplitudeMode { Unit, Given };

/// Draws a uniformly random k-subset of {0..n-1} as the support.
///
/// `signs` (+-1) and `amplitudes` (> 0) are used only in the corresponding
/// `Given` modes and must then have length k.
inline SparseSignal gen_signal(Index n, Index k, SignMode sign_mode, AmplitudeMode amplitude_mode, RngStream& rng,
                               const std::vector<int>& signs = {}, const std::vector<double>& amplitudes = {}) {
  detail::require(n >= 1, "signal dimension must be positive");
  detail::require(k >= 0 && k <= n, "sparsity must satisfy 0 <= k <= n");
  if (sign_mode == SignMode::Given) detail::require(static_cast<Index>(signs.size()) == k, "need k signs");
  if (amplitude_mode == AmplitudeMode::Given)
    detail::require(static_cast<Index>(amplitudes.size()) == k, "need k amplitudes");

  // Partial Fisher-Yates over the index range.
  IndexSet perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng.engine())]);
  }
  IndexSet support(perm.begin(), perm.begin() + k);
  std::sort(support.begin(), support.end());

  std::vector<double> values(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    double s = 1.0;
    if (sign_mode == SignMode::RandomSigns) {
      s = rng.coin() ? 1.0 : -1.0;
    } else {
      detail::require(signs[i] == 1 || signs[i] == -1, "signs must be +1 or -1");
      s = signs[i];
    }
    double a = 1.0;
    if (amplitude_mode == AmplitudeMode::Given) {
      detail::require(amplitudes[i] > 0.0, "amplitudes must be positive");
      a = amplitudes[i];
    }
    values[i] = s * a;
  }
  return SparseSignal(n, std::move(support), std::move(values));
}

/// Input-noise vector with i.i.d. U[-eps, eps] entries, clipped to the bound.
inline InputDeterministic uniform_input_noise(Index n, double eps, RngStream& rng) {
  detail::require(eps >= 0.0, "noise bound must be nonnegative");
  Vector w(n);
  for (Index j = 0; j < n; ++j) w[j] = std::clamp(rng.uniform(-eps, eps), -eps, eps);
  return {std::move(w), eps};
}

inline Measurement gen_measurement(const SensingMatrix& g, const SparseSignal& x, const NoiseSpec& noise,
                                   RngStream& rng) {
  detail::require(x.n() == g.n(), "signal length does not match matrix columns");
  const Vector xd = x.dense();
  Measurement out;
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, OutputGaussian>) {
          detail::require(spec.sigma >= 0.0, "sigma must be nonnegative");
          Vector e(g.m());
          for (Index i = 0; i < g.m(); ++i) e[i] = spec.sigma * rng.gaussian();
          out.y = g.entries * xd + e;
          out.noise = std::move(e);
        } else if constexpr (std::is_same_v<T, InputDeterministic>) {
          detail::require(spec.w.size() == g.n(), "input noise length does not match matrix columns");
          detail::require(spec.w.size() == 0 || spec.w.template lpNorm<Eigen::Infinity>() <= spec.eps_inf,
                          "input noise exceeds its stated bound");
          out.y = g.entries * (xd + spec.w);
          out.noise = spec.w;
          out.input_noise = true;
        } else {
          detail::require(spec.sigma >= 0.0, "sigma must be nonnegative");
          Vector w(g.n());
          for (Index j = 0; j < g.n(); ++j) w[j] = spec.sigma * rng.gaussian();
          out.y = g.entries * (xd + w);
          out.noise = std::move(w);
          out.input_noise = true;
        }
      },
      noise);
  return out;
}

}  // namespace tbp
