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

// Parsers for the textual grid and level arguments of the bench runner.

#pragma once

#include "tbp/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace tbp::harness {

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline long long to_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

/// "lo:hi:step" (inclusive range) or "a,b,c".
inline std::vector<Index> parse_int_grid(const std::string& text) {
  std::vector<Index> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    tbp::detail::require(parts.size() == 3, "integer range must be lo:hi:step");
    const long long lo = detail::to_int(parts[0]), hi = detail::to_int(parts[1]), step = detail::to_int(parts[2]);
    tbp::detail::require(step > 0 && lo <= hi, "integer range needs lo <= hi and step > 0");
    for (long long v = lo; v <= hi; v += step) out.push_back(static_cast<Index>(v));
  } else {
    for (const auto& p : detail::split(text, ',')) out.push_back(static_cast<Index>(detail::to_int(p)));
  }
  tbp::detail::require(!out.empty(), "empty grid");
  return out;
}

/// "lo:hi:points" with lo, hi as base-10 exponents: `points` values
/// log-spaced from 10^lo to 10^hi inclusive. A comma list gives explicit
/// values instead.
inline std::vector<double> parse_log_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    tbp::detail::require(parts.size() == 3, "log grid must be lo:hi:points");
    const double lo = detail::to_double(parts[0]), hi = detail::to_double(parts[1]);
    const long long points = detail::to_int(parts[2]);
    tbp::detail::require(points >= 1 && lo <= hi, "log grid needs points >= 1 and lo <= hi");
    for (long long i = 0; i < points; ++i) {
      const double e = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
      out.push_back(std::pow(10.0, e));
    }
  } else {
    for (const auto& p : detail::split(text, ',')) out.push_back(detail::to_double(p));
  }
  tbp::detail::require(!out.empty(), "empty grid");
  return out;
}

/// A plain number, or "<c>logn" meaning c * ln(n).
inline double parse_snr(const std::string& text, Index n) {
  const std::string suffix = "logn";
  if (text.size() > suffix.size() && text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0) {
    std::string coef = text.substr(0, text.size() - suffix.size());
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    return detail::to_double(coef) * std::log(static_cast<double>(n));
  }
  if (text == "inf") return std::numeric_limits<double>::infinity();
  return detail::to_double(text);
}

}  // namespace tbp::harness
