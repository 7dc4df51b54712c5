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

// Minimal standalone SVG line/scatter plots for sweep tables.

#pragma once

#include "tbp/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace tbp::harness {

enum class PlotKind { SuccessVsK, SuccessVsM, SuccessVsTheta, AmplitudeScatter };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "success_vs_k") return PlotKind::SuccessVsK;
  if (s == "success_vs_m") return PlotKind::SuccessVsM;
  if (s == "success_vs_theta") return PlotKind::SuccessVsTheta;
  if (s == "amplitude_scatter") return PlotKind::AmplitudeScatter;
  throw std::invalid_argument("unknown plot kind '" + s + "'");
}

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  /// Draw markers only, no connecting line.
  bool scatter = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  /// Fixed y range when set (success probabilities use [0, 1]).
  std::optional<std::pair<double, double>> y_range;
};

namespace detail {

inline std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  return colors[i % (sizeof colors / sizeof *colors)];
}

}  // namespace detail

/// Writes `series` as an SVG to `path` and the raw points to `path + ".csv"`
/// (columns series,x,y).
inline void write_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec, const std::string& path) {
  using detail::num;
  tbp::detail::require(!series.empty(), "plot: nothing to draw");
  const double width = 720, height = 460, left = 70, right = 190, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      const double xv = spec.log_x ? std::log10(x) : x;
      x0 = std::min(x0, xv);
      x1 = std::max(x1, xv);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  tbp::detail::require(std::isfinite(x0), "plot: series have no points");
  if (spec.y_range) std::tie(y0, y1) = *spec.y_range;
  if (x1 == x0) { x0 -= 1; x1 += 1; }
  if (y1 == y0) { y0 -= 1; y1 += 1; }
  auto sx = [&](double x) { return left + ((spec.log_x ? std::log10(x) : x) - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::esc(spec.title) << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double yv = y0 + (y1 - y0) * i / 5.0;
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\"" << sy(yv)
        << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
  }
  if (spec.log_x) {
    for (int d = static_cast<int>(std::ceil(x0 - 1e-9)); d <= static_cast<int>(std::floor(x1 + 1e-9)); ++d) {
      const double px = sx(std::pow(10.0, d));
      svg << "<line x1=\"" << px << "\" y1=\"" << top + ph << "\" x2=\"" << px << "\" y2=\"" << top + ph + 4
          << "\" stroke=\"black\"/><text x=\"" << px << "\" y=\"" << top + ph + 18
          << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double xv = x0 + (x1 - x0) * i / 5.0;
      svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\"" << top + ph + 4
          << "\" stroke=\"black\"/><text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18
          << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    }
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << detail::esc(spec.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << detail::esc(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = detail::palette(si);
    if (!s.scatter && s.points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : s.points) svg << num(sx(x)) << ',' << num(sy(y)) << ' ';
      svg << "\"/>\n";
    }
    for (auto [x, y] : s.points)
      svg << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(si);
    svg << "<circle cx=\"" << left + pw + 16 << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << color << "\"/>"
        << "<text x=\"" << left + pw + 26 << "\" y=\"" << ly << "\">" << detail::esc(s.name) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << svg.str();
  std::ofstream side(path + ".csv", std::ios::binary | std::ios::trunc);
  if (!side) throw std::runtime_error("cannot open " + path + ".csv for writing");
  side << "series,x,y\n";
  for (const auto& s : series)
    for (auto [x, y] : s.points) side << s.name << ',' << num(x) << ',' << num(y) << '\n';
  if (!out || !side) throw std::runtime_error("plot write failed for " + path);
}

/// Success-probability curves from a sweep table. One series per
/// combination of the fields that are not on the x axis.
inline std::vector<PlotSeries> success_series(const SweepTable& table, PlotKind kind) {
  std::map<std::string, PlotSeries> by_name;
  std::vector<std::string> order;
  for (const auto& row : table.rows) {
    if (row.trials == 0) continue;
    const auto& p = row.point;
    std::ostringstream name;
    name << row.algo << ' ' << tbp::to_string(p.ensemble);
    double x = 0.0;
    switch (kind) {
      case PlotKind::SuccessVsK:
        x = static_cast<double>(p.k);
        name << " m=" << p.m;
        if (p.mode == SnrMode::ThetaScan) name << " theta=" << p.theta;
        break;
      case PlotKind::SuccessVsM:
        x = static_cast<double>(p.m);
        name << " k=" << p.k;
        if (p.mode == SnrMode::ThetaScan) name << " theta=" << p.theta;
        break;
      case PlotKind::SuccessVsTheta:
        tbp::detail::require(p.mode == SnrMode::ThetaScan, "success_vs_theta needs a theta sweep");
        x = p.theta;
        name << " m=" << p.m << " k=" << p.k;
        break;
      case PlotKind::AmplitudeScatter:
        throw std::invalid_argument("amplitude_scatter plots an AmplitudeComparison, not a sweep table");
    }
    auto [it, fresh] = by_name.try_emplace(name.str());
    if (fresh) {
      it->second.name = name.str();
      order.push_back(name.str());
    }
    it->second.points.emplace_back(x, row.success_probability);
  }
  std::vector<PlotSeries> out;
  for (const auto& n : order) {
    auto s = by_name[n];
    std::sort(s.points.begin(), s.points.end());
    out.push_back(std::move(s));
  }
  return out;
}

inline void emit_plot(const SweepTable& table, PlotKind kind, const std::string& path) {
  tbp::detail::require(!table.rows.empty(), "emit_plot: empty table");
  PlotSpec spec;
  spec.y_label = "success probability";
  spec.y_range = std::make_pair(0.0, 1.0);
  switch (kind) {
    case PlotKind::SuccessVsK: spec.x_label = "sparsity k"; spec.title = "Exact sign recovery vs sparsity"; break;
    case PlotKind::SuccessVsM: spec.x_label = "measurements m"; spec.title = "Exact sign recovery vs measurements"; break;
    case PlotKind::SuccessVsTheta:
      spec.x_label = "theta";
      spec.title = "Exact sign recovery vs noise level";
      spec.log_x = true;
      break;
    case PlotKind::AmplitudeScatter:
      throw std::invalid_argument("amplitude_scatter plots an AmplitudeComparison, not a sweep table");
  }
  write_svg(success_series(table, kind), spec, path);
}

/// Estimated amplitude against index for each estimator, over the truth.
inline void emit_plot(const AmplitudeComparison& cmp, const std::string& path) {
  std::vector<PlotSeries> series;
  PlotSeries truth{"truth", {}, true};
  for (Index j = 0; j < cmp.truth.size(); ++j) truth.points.emplace_back(static_cast<double>(j), cmp.truth[j]);
  series.push_back(std::move(truth));
  for (const auto& [name, est] : cmp.estimates) {
    PlotSeries s{name, {}, true};
    for (Index j = 0; j < est.size(); ++j) s.points.emplace_back(static_cast<double>(j), est[j]);
    series.push_back(std::move(s));
  }
  PlotSpec spec{"Estimated amplitudes", "index", "amplitude", false, std::nullopt};
  write_svg(series, spec, path);
}

}  // namespace tbp::harness
