// Copyright 2026 The vocab-bridge Authors
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

// Brute-force reference computations for the tests. Everything here uses
// plain loops over std::vector so it shares no code path with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Rows r(n, std::vector<double>(d));
  for (auto& row : r)
    for (auto& v : row) v = g(rng);
  return r;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

/// Mean of the k largest values, by full sort.
inline double mean_top_k(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += v[i];
  return s / static_cast<double>(k);
}

/// Full CSLS table: entry [i][j] is CSLS(src_i, tgt_j) with neighborhoods
/// over the complete sets.
inline Rows csls_table(const Rows& src, const Rows& tgt, std::size_t k) {
  Rows cos(src.size(), std::vector<double>(tgt.size()));
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < tgt.size(); ++j) cos[i][j] = cosine(src[i], tgt[j]);
  std::vector<double> r_tgt(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) r_tgt[i] = mean_top_k(cos[i], k);
  std::vector<double> r_src(tgt.size());
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    std::vector<double> col(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) col[i] = cos[i][j];
    r_src[j] = mean_top_k(col, k);
  }
  Rows out = cos;
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < tgt.size(); ++j) out[i][j] = 2.0 * cos[i][j] - r_tgt[i] - r_src[j];
  return out;
}

/// Indices of the `top` best scores; ties by ascending index.
inline std::vector<std::size_t> top_indices(const std::vector<double>& scores, std::size_t top) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  idx.resize(top);
  return idx;
}

inline std::vector<double> softmax(const std::vector<double>& s) {
  std::vector<double> e(s.size());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) z += (e[i] = std::exp(s[i]));
  for (auto& v : e) v /= z;
  return e;
}

/// ‖XM - Y‖² for a 2x2 M given row-major.
inline double objective_2d(const Rows& x, const Rows& y, const double m[4]) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i][0] * m[0] + x[i][1] * m[2] - y[i][0];
    const double b = x[i][0] * m[1] + x[i][1] * m[3] - y[i][1];
    total += a * a + b * b;
  }
  return total;
}

/// Minimum objective over `points` rotation angles and as many reflections.
inline double grid_min_objective_2d(const Rows& x, const Rows& y, std::size_t points) {
  double best = INFINITY;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t s = 0; s < points; ++s) {
    const double t = two_pi * static_cast<double>(s) / static_cast<double>(points);
    const double c = std::cos(t);
    const double n = std::sin(t);
    const double rot[4] = {c, -n, n, c};
    const double ref[4] = {c, n, n, -c};
    best = std::min({best, objective_2d(x, y, rot), objective_2d(x, y, ref)});
  }
  return best;
}

}  // namespace oracle
