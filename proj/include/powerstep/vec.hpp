// Copyright 2026 The PowerStep Authors.
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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace powerstep {

/// Flat dense vector of parameters, gradients or buffers.
using Vec = std::vector<double>;

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline void require_finite(std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry at index " +
                                  std::to_string(i));
    }
  }
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

/// Pairwise (recursive halving) sum over f(x[i]). The reduction tree depends
/// only on the length, so the result is independent of any outer partitioning.
template <class F>
double pairwise_map_sum(const double* x, std::size_t n, F&& f) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(x[i]);
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_map_sum(x, half, f) + pairwise_map_sum(x + half, n - half, f);
}

inline double pairwise_sum(std::span<const double> x) {
  return pairwise_map_sum(x.data(), x.size(), [](double v) { return v; });
}

/// Euclidean norm with a fixed pairwise summation order.
inline double l2_norm(std::span<const double> x) {
  return std::sqrt(pairwise_map_sum(x.data(), x.size(), [](double v) { return v * v; }));
}

inline double l2_norm_sq(std::span<const double> x) {
  return pairwise_map_sum(x.data(), x.size(), [](double v) { return v * v; });
}

inline double absmax(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace powerstep
