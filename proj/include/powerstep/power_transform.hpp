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
#include <cstdint>
#include <stdexcept>
#include <string>

#include "powerstep/vec.hpp"

namespace powerstep {

/// Exponent of the signed power transform, restricted to [0, 1].
///
/// beta = 1 is the identity (plain momentum), beta = 0 is the sign map.
/// For beta > 0 the transform is steepest descent under the l_p norm with
/// p = 1 + 1/beta.
class PowerExponent {
 public:
  explicit PowerExponent(double beta) : beta_(beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("PowerExponent: beta must lie in [0, 1], got " +
                                  std::to_string(beta));
    }
  }

  double value() const { return beta_; }

  /// The l_p geometry this exponent corresponds to (beta > 0 only).
  double norm_order() const {
    if (beta_ == 0.0) {
      throw std::domain_error("PowerExponent: norm order is unbounded at beta = 0");
    }
    return 1.0 + 1.0 / beta_;
  }

 private:
  double beta_;
};

/// Scalar signed power: sign(x) * |x|^beta.
///
/// Zero maps to zero for every beta, including beta = 0 (sign(0) = 0), which
/// keeps the map odd. The general branch uses exp(beta * ln|x|) behind the
/// exact-zero guard so no pow(0, 0) is ever evaluated; beta = 0 and beta = 1
/// short-circuit to the sign map and the identity, which must hold exactly.
inline double signed_power(double x, PowerExponent beta) {
  if (x == 0.0) return 0.0;
  const double b = beta.value();
  if (b == 1.0) return x;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  if (b == 0.0) return sign;
  return sign * std::exp(b * std::log(std::abs(x)));
}

/// Elementwise signed power transform. Rejects non-finite input.
inline Vec signed_power(const Vec& x, PowerExponent beta) {
  require_finite(x, "signed_power");
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = signed_power(x[i], beta);
  return out;
}

/// Sum of |x_i|^p. Exposed separately from lp_norm because several bounds
/// are stated on the raised form directly.
inline double lp_norm_pow(const Vec& x, double p) {
  if (!(p > 0.0)) {
    throw std::invalid_argument("lp_norm_pow: p must be positive, got " + std::to_string(p));
  }
  require_finite(x, "lp_norm_pow");
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return s;
}

/// (sum |x_i|^p)^(1/p). p in (0, 1) is permitted; that range is only a
/// quasi-norm but the norm-relationship bound needs it for 2*beta < 1.
inline double lp_norm(const Vec& x, double p) {
  return std::pow(lp_norm_pow(x, p), 1.0 / p);
}

inline double inner(const Vec& x, const Vec& y) {
  require_same_dim(x.size(), y.size(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// Holder constant of the signed power transform in dimension d:
/// 2^(1-beta) * d^((1-beta)/(1+beta)). At most 2d; exactly 1 at beta = 1.
inline double holder_constant(PowerExponent beta, std::int64_t d) {
  if (d < 1) {
    throw std::invalid_argument("holder_constant: dimension must be >= 1");
  }
  const double b = beta.value();
  return std::pow(2.0, 1.0 - b) *
         std::pow(static_cast<double>(d), (1.0 - b) / (1.0 + b));
}

}  // namespace powerstep
