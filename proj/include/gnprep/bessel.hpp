// Copyright 2026 The gnprep Authors
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

#include <cmath>
#include <cstdlib>
#include <vector>

#include "gnprep/core.hpp"

namespace gnprep {

inline constexpr int kBesselOrderCap = 64;

namespace detail {

// Power series, accurate for small |x|.
inline double bessel_series(int n, double x) {
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= 0.5 * x / i;
  double sum = term;
  const double q = -0.25 * x * x;
  for (int k = 1; k < 100; ++k) {
    term *= q / (k * static_cast<double>(k + n));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// J_0(x) .. J_nmax(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum_k J_{2k} = 1. Small arguments use the power series.
inline std::vector<double> bessel_j_table(int nmax, double x) {
  if (nmax < 0) throw ConfigError("Bessel table order must be >= 0");
  if (nmax > kBesselOrderCap) throw ConfigError("Bessel order exceeds the cap of " + std::to_string(kBesselOrderCap));
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (ax < 0.5) {
    for (int n = 0; n <= nmax; ++n) out[static_cast<std::size_t>(n)] = detail::bessel_series(n, ax);
  } else {
    int start = std::max(nmax, static_cast<int>(ax)) + 20 + static_cast<int>(std::sqrt(40.0 * std::max<double>(nmax, ax)));
    start += start % 2;
    std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
    j[static_cast<std::size_t>(start)] = 1e-30;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
      j[static_cast<std::size_t>(k) - 1] = 2.0 * k / ax * j[static_cast<std::size_t>(k)] - j[static_cast<std::size_t>(k) + 1];
      if (std::abs(j[static_cast<std::size_t>(k) - 1]) > 1e250) {
        for (auto& v : j) v *= 1e-250;
        norm *= 1e-250;
      }
      if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j[static_cast<std::size_t>(k) - 1];
    }
    norm += j[0];
    for (int n = 0; n <= nmax; ++n) out[static_cast<std::size_t>(n)] = j[static_cast<std::size_t>(n)] / norm;
  }
  if (x < 0.0)
    for (int n = 1; n <= nmax; n += 2) out[static_cast<std::size_t>(n)] = -out[static_cast<std::size_t>(n)];
  return out;
}

/// Bessel function of the first kind J_n(x) for integer |n| <= 64.
inline double bessel_j(int n, double x) {
  const int an = std::abs(n);
  if (an > kBesselOrderCap) throw ConfigError("Bessel order exceeds the cap of " + std::to_string(kBesselOrderCap));
  const double v = bessel_j_table(an, x)[static_cast<std::size_t>(an)];
  return (n < 0 && an % 2) ? -v : v;
}

/// Largest order needed before |J_n(x)| drops below tol (capped).
inline int bessel_truncation_order(double x, double tol = 1e-14) {
  const auto t = bessel_j_table(kBesselOrderCap, x);
  for (int n = static_cast<int>(std::abs(x)); n <= kBesselOrderCap; ++n)
    if (std::abs(t[static_cast<std::size_t>(n)]) < tol && (n + 1 > kBesselOrderCap || std::abs(t[static_cast<std::size_t>(n) + 1]) < tol))
      return n;
  return kBesselOrderCap;
}

}  // namespace gnprep
