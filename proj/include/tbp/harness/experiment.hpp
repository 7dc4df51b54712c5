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

// Monte-Carlo sweeps: grid expansion, per-trial seeding, execution,
// aggregation and CSV output.

#pragma once

#include "tbp/ensembles.hpp"
#include "tbp/recovery.hpp"
#include "tbp/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace tbp::harness {

enum class Algo { Tbp, TbpOls, Lasso, LassoThresholded, MaxCorr, Ml };
enum class NoiseModel { Output, InputDet, InputGauss };
enum class SnrMode { FixedSnr, ThetaScan };

/// How a fixed SNR maps to the noise level on the normalized model
/// y = Gx + e with G_ij ~ N(0, 1/m).
enum class SnrConvention {
  /// SNR is the inverse noise variance: sigma^2 = 1 / SNR.
  Normalized,
  /// SNR is the inverse noise variance of the unnormalized system
  /// sqrt(m) y = (sqrt(m) G) x + e', so sigma^2 = 1 / (m SNR).
  UnitEntry,
  /// SNR is the per-measurement signal power over the noise variance. With
  /// unit-norm columns the signal power is k x_min^2 / m, so
  /// sigma^2 = k x_min^2 / (m SNR).
  SignalPower,
};

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::Tbp: return "tbp";
    case Algo::TbpOls: return "tbp-ols";
    case Algo::Lasso: return "lasso";
    case Algo::LassoThresholded: return "lasso-thr";
    case Algo::MaxCorr: return "maxcorr";
    case Algo::Ml: return "ml";
  }
  return "?";
}

inline Algo parse_algo(const std::string& s) {
  for (Algo a : {Algo::Tbp, Algo::TbpOls, Algo::Lasso, Algo::LassoThresholded, Algo::MaxCorr, Algo::Ml})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

inline std::string to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::Output: return "output";
    case NoiseModel::InputDet: return "input-det";
    case NoiseModel::InputGauss: return "input-gauss";
  }
  return "?";
}

inline std::string to_string(SnrConvention c) {
  switch (c) {
    case SnrConvention::Normalized: return "normalized";
    case SnrConvention::UnitEntry: return "unit-entry";
    case SnrConvention::SignalPower: return "signal-power";
  }
  return "?";
}

inline SnrConvention parse_snr_convention(const std::string& s) {
  for (SnrConvention c : {SnrConvention::Normalized, SnrConvention::UnitEntry, SnrConvention::SignalPower})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown SNR convention '" + s + "'");
}

/// Output-noise standard deviation for a fixed SNR under `c`.
inline double snr_to_sigma(double snr, SnrConvention c, Index m, Index k, double x_min) {
  switch (c) {
    case SnrConvention::Normalized: return 1.0 / std::sqrt(snr);
    case SnrConvention::UnitEntry: return 1.0 / std::sqrt(static_cast<double>(m) * snr);
    case SnrConvention::SignalPower:
      return x_min * std::sqrt(static_cast<double>(k) / (static_cast<double>(m) * snr));
  }
  return 1.0 / std::sqrt(snr);
}

inline NoiseModel parse_noise(const std::string& s) {
  for (NoiseModel m : {NoiseModel::Output, NoiseModel::InputDet, NoiseModel::InputGauss})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown noise model '" + s + "'");
}

inline Ensemble parse_ensemble(const std::string& s) {
  if (s == "gaussian") return Ensemble::Gaussian;
  if (s == "bernoulli") return Ensemble::Bernoulli;
  throw std::invalid_argument("unknown ensemble '" + s + "'");
}

/// Noise standard deviation (or l_inf bound for input-det) whose inverse
/// is (2 sqrt(12 log n) + 2) theta.
inline double theta_sigma(Index n, double theta) {
  return 1.0 / ((2.0 * std::sqrt(12.0 * std::log(static_cast<double>(n))) + 2.0) * theta);
}

/// One algorithm with its parameters. `lasso` is used by the LASSO variants
/// only; x_min by the thresholding ones.
struct AlgoSpec {
  Algo algo = Algo::Tbp;
  LassoConfig lasso{};

  std::string label() const {
    if (algo != Algo::Lasso && algo != Algo::LassoThresholded) return to_string(algo);
    switch (lasso.lambda_rule) {
      case LambdaRule::CandesPlan: return to_string(algo) + "[candes]";
      case LambdaRule::Tropp: return to_string(algo) + "[tropp]";
      default: break;
    }
    std::ostringstream os;
    os << to_string(algo) << "[" << lasso.lambda << "]";
    return os.str();
  }
};

struct GridPoint {
  AlgoSpec algo;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  Ensemble ensemble = Ensemble::Gaussian;
  NoiseModel noise = NoiseModel::Output;
  SnrMode mode = SnrMode::FixedSnr;
  /// Used in FixedSnr mode; infinity means noiseless.
  double snr = std::numeric_limits<double>::infinity();
  SnrConvention convention = SnrConvention::Normalized;
  /// Used in ThetaScan mode.
  double theta = std::numeric_limits<double>::quiet_NaN();
  double x_min = 1.0;

  double sigma() const {
    if (mode == SnrMode::ThetaScan) return theta_sigma(n, theta);
    if (std::isinf(snr)) return 0.0;
    return snr_to_sigma(snr, convention, m, k, x_min);
  }
  double effective_snr() const {
    const double s = sigma();
    return s == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (s * s);
  }
  double lambda() const {
    if (algo.algo != Algo::Lasso && algo.algo != Algo::LassoThresholded) return std::numeric_limits<double>::quiet_NaN();
    return resolve_lambda(algo.lasso, sigma(), n);
  }

  /// Problem-instance fields only. The algorithm is left out so that every
  /// algorithm at a grid point sees the same instances.
  std::string instance_key() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "n=%lld|m=%lld|k=%lld|ens=%s|noise=%s|mode=%d|snr=%.17g|conv=%d|theta=%.17g|xmin=%.17g",
                  static_cast<long long>(n), static_cast<long long>(m), static_cast<long long>(k),
                  tbp::to_string(ensemble).c_str(), to_string(noise).c_str(), static_cast<int>(mode),
                  mode == SnrMode::FixedSnr ? snr : 0.0,
                  mode == SnrMode::FixedSnr ? static_cast<int>(convention) : 0, mode == SnrMode::ThetaScan ? theta : 0.0, x_min);
    return buf;
  }
};

/// Deterministic seed for trial `trial_index` at `point`.
inline std::uint64_t trial_seed(const GridPoint& point, std::uint64_t trial_index, std::uint64_t master_seed) {
  std::uint64_t h = fnv1a(point.instance_key());
  h = mix64(h ^ mix64(master_seed));
  return mix64(h ^ mix64(trial_index + 0x5851f42d4c957f2dULL));
}

struct TrialRecord {
  std::size_t point_index = 0;
  std::string algo;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  std::string ensemble;
  std::string noise_model;
  double snr = 0.0;
  double theta = 0.0;
  double lambda = 0.0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  /// ok, vacuous (k = 0), not_converged or solver_failure.
  std::string status;
  Index n_miss = 0;
  Index n_false = 0;
  int success = 0;
  double l2_err = 0.0;
  double runtime_ms = 0.0;

  bool failed() const { return status == "solver_failure"; }
};

/// Draws the instance for one trial and runs the configured algorithm.
inline TrialRecord run_trial(const GridPoint& p, std::uint64_t trial_index, std::uint64_t master_seed,
                             bool record_timing = true) {
  tbp::detail::require(p.n >= 1 && p.m >= 1 && p.k >= 0 && p.k <= p.n, "run_trial: invalid grid point");
  const std::uint64_t seed = trial_seed(p, trial_index, master_seed);
  RngStream matrix_rng(seed, 0), signal_rng(seed, 1), noise_rng(seed, 2);

  const SensingMatrix g = gen_matrix(p.m, p.n, p.ensemble, matrix_rng);
  const SparseSignal x = gen_signal(p.n, p.k, SignMode::RandomSigns, AmplitudeMode::Unit, signal_rng);
  const SparseSignal xs = p.x_min == 1.0 ? x : x.scaled(p.x_min);
  const double sigma = p.sigma();
  NoiseSpec noise;
  switch (p.noise) {
    case NoiseModel::Output: noise = OutputGaussian{sigma}; break;
    case NoiseModel::InputDet: noise = uniform_input_noise(p.n, sigma, noise_rng); break;
    case NoiseModel::InputGauss: noise = InputGaussian{sigma}; break;
  }
  const Measurement meas = gen_measurement(g, xs, noise, noise_rng);

  RecoveryReport rep;
  LassoConfig lcfg = p.algo.lasso;
  lcfg.lambda = p.lambda();
  switch (p.algo.algo) {
    case Algo::Tbp: rep = tbp(g, meas.y, p.x_min); break;
    case Algo::TbpOls: rep = tbp_ols(g, meas.y, p.x_min); break;
    case Algo::Lasso: rep = lasso(g, meas.y, lcfg); break;
    case Algo::LassoThresholded: rep = thresholded_lasso(g, meas.y, lcfg, p.x_min); break;
    case Algo::MaxCorr:
      if (p.k > 0) rep = max_correlation(g, meas.y, p.k);
      else rep.estimate = Vector::Zero(p.n);
      break;
    case Algo::Ml:
      if (p.k > 0) rep = ml_oracle(g, meas.y, p.k);
      else rep.estimate = Vector::Zero(p.n);
      break;
  }
  score(rep, xs);

  TrialRecord r;
  r.algo = p.algo.label();
  r.n = p.n;
  r.m = p.m;
  r.k = p.k;
  r.ensemble = tbp::to_string(p.ensemble);
  r.noise_model = to_string(p.noise);
  r.snr = p.effective_snr();
  r.theta = p.theta;
  r.lambda = p.lambda();
  r.trial = trial_index;
  r.seed = seed;
  r.status = to_string(rep.status);
  if (rep.status == RecoveryStatus::Ok && p.k == 0) r.status = "vacuous";
  r.n_miss = rep.metrics->n_miss;
  r.n_false = rep.metrics->n_false;
  r.success = rep.metrics->exact_sign_recovery && !r.failed() ? 1 : 0;
  r.l2_err = rep.metrics->l2_error;
  r.runtime_ms = record_timing ? rep.runtime_ms : 0.0;
  return r;
}

struct ExperimentConfig {
  Index n = 200;
  std::vector<Index> m_grid;
  std::vector<Index> k_grid;
  std::vector<Ensemble> ensembles{Ensemble::Gaussian};
  NoiseModel noise = NoiseModel::Output;
  SnrMode snr_mode = SnrMode::FixedSnr;
  SnrConvention snr_convention = SnrConvention::Normalized;
  /// Exactly one of these is set, matching snr_mode.
  std::optional<double> snr;
  std::vector<double> theta_grid;
  std::vector<AlgoSpec> algorithms{AlgoSpec{}};
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  double x_min = 1.0;
  /// CSV destination; empty skips writing.
  std::string output_path;
  /// 0 picks TBP_WORKERS or the hardware concurrency.
  unsigned workers = 0;
  /// When false runtime_ms is written as 0 so output is byte-reproducible.
  bool record_timing = true;

  void validate() const {
    tbp::detail::require(n >= 1, "config: n must be positive");
    tbp::detail::require(!m_grid.empty() && !k_grid.empty(), "config: m and k grids must be nonempty");
    tbp::detail::require(!ensembles.empty() && !algorithms.empty(), "config: need an ensemble and an algorithm");
    tbp::detail::require(trials >= 1, "config: trials must be at least 1");
    if (snr_mode == SnrMode::FixedSnr) {
      tbp::detail::require(snr.has_value() && theta_grid.empty(), "config: fixed_snr mode needs --snr and no theta grid");
      tbp::detail::require(*snr > 0.0, "config: snr must be positive");
    } else {
      tbp::detail::require(!snr.has_value() && !theta_grid.empty(), "config: theta_scan mode needs a theta grid and no snr");
      for (double t : theta_grid) tbp::detail::require(t > 0.0, "config: theta values must be positive");
    }
    for (Index k : k_grid) tbp::detail::require(k >= 0 && k <= n, "config: k must lie in [0, n]");
    for (Index m : m_grid) tbp::detail::require(m >= 1, "config: m must be positive");
    tbp::detail::require(x_min > 0.0, "config: x_min must be positive");
  }

  /// Grid points in a fixed order: algorithm, ensemble, m, k, noise level.
  std::vector<GridPoint> expand() const {
    validate();
    std::vector<GridPoint> pts;
    const std::vector<double> levels = snr_mode == SnrMode::FixedSnr ? std::vector<double>{*snr} : theta_grid;
    for (const auto& a : algorithms)
      for (Ensemble e : ensembles)
        for (Index m : m_grid)
          for (Index k : k_grid)
            for (double level : levels) {
              GridPoint p;
              p.algo = a;
              p.n = n;
              p.m = m;
              p.k = k;
              p.ensemble = e;
              p.noise = noise;
              p.mode = snr_mode;
              p.convention = snr_convention;
              p.x_min = x_min;
              if (snr_mode == SnrMode::FixedSnr) p.snr = level;
              else p.theta = level;
              pts.push_back(p);
            }
    return pts;
  }
};

struct SweepRow {
  GridPoint point;
  std::string algo;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t successes = 0;
  double success_probability = 0.0;
  double mean_l2_err = 0.0;

  /// Binomial standard error of the success probability.
  double std_error() const {
    if (trials == 0) return 0.0;
    const double p = success_probability;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Sorted by (point_index, trial).
  std::vector<TrialRecord> records;
  std::size_t failures = 0;
};

/// Per-point success probability and mean error; solver failures are
/// excluded from the denominators and counted separately.
inline std::vector<SweepRow> aggregate(const std::vector<GridPoint>& points, const std::vector<TrialRecord>& records) {
  std::vector<SweepRow> rows(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    rows[i].point = points[i];
    rows[i].algo = points[i].algo.label();
  }
  for (const auto& r : records) {
    auto& row = rows.at(r.point_index);
    if (r.failed()) {
      ++row.failures;
      continue;
    }
    ++row.trials;
    row.successes += static_cast<std::size_t>(r.success);
    row.mean_l2_err += r.l2_err;
  }
  for (auto& row : rows) {
    if (row.trials == 0) continue;
    row.success_probability = static_cast<double>(row.successes) / static_cast<double>(row.trials);
    row.mean_l2_err /= static_cast<double>(row.trials);
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "algo,n,m,k,ensemble,noise_model,snr,theta,lambda,trial,seed,status,n_miss,n_false,success,l2_err,runtime_ms";

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string csv_line(const TrialRecord& r) {
  std::ostringstream os;
  os << r.algo << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.ensemble << ',' << r.noise_model << ','
     << detail::fmt_double(r.snr) << ',' << detail::fmt_double(r.theta) << ',' << detail::fmt_double(r.lambda) << ','
     << r.trial << ',' << r.seed << ',' << r.status << ',' << r.n_miss << ',' << r.n_false << ',' << r.success << ','
     << detail::fmt_double(r.l2_err) << ',' << detail::fmt_double(r.runtime_ms);
  return os.str();
}

/// Writes header plus records with LF endings. The file is built next to
/// `path` and renamed into place; on any I/O error the partial file is
/// removed and std::runtime_error is thrown.
inline void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path partial = fs::path(path + ".partial");
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + partial.string() + " for writing");
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << csv_line(r) << '\n';
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(partial, ec);
      throw std::runtime_error("write failed for " + partial.string());
    }
  }
  std::error_code ec;
  fs::rename(partial, target, ec);
  if (ec) {
    fs::remove(partial, ec);
    throw std::runtime_error("cannot move output into " + path);
  }
}

inline unsigned resolve_workers(unsigned requested) {
  unsigned w = requested;
  if (w == 0) {
    w = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TBP_WORKERS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap > 0) w = std::min<unsigned>(w, static_cast<unsigned>(cap));
    }
  }
  return std::max(1U, w);
}

/// Runs every grid point x trial, in parallel when workers > 1. Records
/// land in fixed slots, so the output does not depend on scheduling.
inline SweepTable run_sweep(const ExperimentConfig& cfg) {
  const auto points = cfg.expand();
  const std::size_t total = points.size() * cfg.trials;
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      try {
        const std::size_t pi = task / cfg.trials;
        const std::size_t ti = task % cfg.trials;
        records[task] = run_trial(points[pi], ti, cfg.master_seed, cfg.record_timing);
        records[task].point_index = pi;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = total;
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(resolve_workers(cfg.workers), std::max<std::size_t>(total, 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  SweepTable table;
  table.records = std::move(records);
  table.rows = aggregate(points, table.records);
  for (const auto& r : table.rows) table.failures += r.failures;
  if (!cfg.output_path.empty()) write_csv(table.records, cfg.output_path);
  return table;
}

/// Ground truth plus the raw basis pursuit and LASSO estimates on one
/// instance, for amplitude comparisons.
struct AmplitudeComparison {
  Vector truth;
  /// Output-noise standard deviation used.
  double sigma = 0.0;
  std::vector<std::pair<std::string, Vector>> estimates;
};

/// One output-noise instance whose first k/2 entries are +1 and next k - k/2
/// are -1, solved by basis pursuit and by LASSO with `lambda`.
inline AmplitudeComparison amplitude_comparison(Index n, Index m, Index k, double snr, std::uint64_t seed,
                                                const LassoConfig& lasso_cfg, Ensemble ensemble = Ensemble::Gaussian,
                                                SnrConvention convention = SnrConvention::Normalized) {
  tbp::detail::require(k >= 1 && k <= n, "amplitude_comparison: need 1 <= k <= n");
  RngStream matrix_rng(seed, 0), noise_rng(seed, 2);
  const SensingMatrix g = gen_matrix(m, n, ensemble, matrix_rng);
  IndexSet support(static_cast<std::size_t>(k));
  std::vector<double> values(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    support[i] = i;
    values[i] = i < k / 2 ? 1.0 : -1.0;
  }
  const SparseSignal x(n, support, values);
  const double sigma = snr_to_sigma(snr, convention, m, k, 1.0);
  const Measurement meas = gen_measurement(g, x, OutputGaussian{sigma}, noise_rng);

  AmplitudeComparison out;
  out.truth = x.dense();
  out.sigma = sigma;
  const LpSolution bp = basis_pursuit(g, meas.y);
  out.estimates.emplace_back("basis pursuit", bp.certified() ? bp.beta : Vector::Zero(n));
  LassoConfig cfg = lasso_cfg;
  cfg.lambda = resolve_lambda(cfg, sigma, n);
  out.estimates.emplace_back("lasso", lasso(g, meas.y, cfg).raw);
  return out;
}

}  // namespace tbp::harness
