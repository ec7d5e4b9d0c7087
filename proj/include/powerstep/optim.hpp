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
#include <optional>
#include <stdexcept>
#include <string>

#include "powerstep/power_transform.hpp"
#include "powerstep/vec.hpp"

namespace powerstep {

/// Signed-power momentum descent. The update is
///   m <- gamma * m + g
///   theta <- theta - lr * (sign(m) .* |m|^beta + weight_decay * theta)
/// Heavy-ball accumulation (full-weight gradient, no 1-gamma factor), so
/// steady-state |m| is about |g| / (1 - gamma); the effective step therefore
/// scales as (1 - gamma)^(-beta) relative to raw-gradient methods. That
/// factor is deliberately not compensated for.
struct PowerStepConfig {
  double gamma = 0.9;
  PowerExponent beta{0.1};
  double weight_decay = 0.0;
  double clip_norm = 0.0;  // global-norm clip threshold; 0 disables

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
      throw std::invalid_argument("powerstep.gamma must lie in [0, 1), got " +
                                  std::to_string(gamma));
    }
    if (!(weight_decay >= 0.0)) {
      throw std::invalid_argument("powerstep.weight_decay must be >= 0");
    }
    if (!(clip_norm >= 0.0)) {
      throw std::invalid_argument("powerstep.clip_norm must be >= 0 (0 disables)");
    }
  }
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double clip_norm = 0.0;
  // Bias correction is on by default; disable for the plain EMA-quotient
  // update with no (1 - beta^t) factors.
  bool bias_correction = true;

  void validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
      throw std::invalid_argument("adamw.beta1 must lie in [0, 1)");
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
      throw std::invalid_argument("adamw.beta2 must lie in [0, 1)");
    }
    if (!(epsilon >= 0.0)) {
      throw std::invalid_argument("adamw.epsilon must be >= 0");
    }
    if (!(weight_decay >= 0.0)) {
      throw std::invalid_argument("adamw.weight_decay must be >= 0");
    }
    if (!(clip_norm >= 0.0)) {
      throw std::invalid_argument("adamw.clip_norm must be >= 0 (0 disables)");
    }
  }
};

/// Per-run mutable optimizer buffers. `m` starts at zero; `v` exists only
/// for AdamW. `step` counts completed updates and increments by exactly one
/// per update.
struct OptimizerState {
  Vec m;
  std::optional<Vec> v;
  std::int64_t step = 0;

  static OptimizerState zeros(std::size_t dim, bool with_second_moment = false) {
    OptimizerState st;
    st.m.assign(dim, 0.0);
    if (with_second_moment) st.v = Vec(dim, 0.0);
    return st;
  }
};

/// Scales g down to max_norm when its Euclidean norm exceeds it.
inline Vec clip_global_norm(Vec g, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw std::invalid_argument("clip_global_norm: max_norm must be > 0");
  }
  require_finite(g, "clip_global_norm");
  const double norm = l2_norm(g);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& v : g) v *= scale;
  }
  return g;
}

namespace detail {

// Shared precondition checks; returns the clip factor for the raw gradient.
// Clipping happens before momentum accumulation for every optimizer.
inline double update_preamble(const Vec& theta, const Vec& grad, const Vec& m, double lr,
                              double clip_norm, const char* what) {
  require_same_dim(theta.size(), grad.size(), what);
  require_same_dim(theta.size(), m.size(), what);
  require_finite(grad, what);
  if (!(lr >= 0.0)) throw std::invalid_argument(std::string(what) + ": lr must be >= 0");
  if (clip_norm > 0.0) {
    const double norm = l2_norm(grad);
    if (norm > clip_norm) return clip_norm / norm;
  }
  return 1.0;
}

}  // namespace detail

/// One signed-power momentum step. Weight decay is decoupled: it acts on the
/// pre-update parameters and never enters the momentum buffer.
inline void powerstep_update(Vec& theta, const Vec& grad, OptimizerState& state,
                             const PowerStepConfig& cfg, double lr) {
  cfg.validate();
  const double clip = detail::update_preamble(theta, grad, state.m, lr, cfg.clip_norm,
                                              "powerstep_update");
  Vec& m = state.m;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.gamma * m[i] + clip * grad[i];
    const double u = signed_power(m[i], cfg.beta);
    theta[i] -= lr * (u + cfg.weight_decay * theta[i]);
  }
  ++state.step;
}

/// Sign descent with momentum: PowerStep at beta = 0. Kept as an alias so
/// the equivalence is structural rather than a separate code path.
inline void signsgdm_update(Vec& theta, const Vec& grad, OptimizerState& state,
                            PowerStepConfig cfg, double lr) {
  cfg.beta = PowerExponent(0.0);
  powerstep_update(theta, grad, state, cfg, lr);
}

/// Transform-then-accumulate variant: the signed power is applied to the raw
/// (clipped) gradient before momentum, and the step is linear in m.
inline void pbsgdm_update(Vec& theta, const Vec& grad, OptimizerState& state,
                          const PowerStepConfig& cfg, double lr) {
  cfg.validate();
  const double clip = detail::update_preamble(theta, grad, state.m, lr, cfg.clip_norm,
                                              "pbsgdm_update");
  Vec& m = state.m;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.gamma * m[i] + signed_power(clip * grad[i], cfg.beta);
    theta[i] -= lr * (m[i] + cfg.weight_decay * theta[i]);
  }
  ++state.step;
}

/// Decoupled-weight-decay Adam over EMA moments m and v.
inline void adamw_update(Vec& theta, const Vec& grad, OptimizerState& state,
                         const AdamWConfig& cfg, double lr) {
  cfg.validate();
  if (!state.v.has_value()) {
    throw std::invalid_argument("adamw_update: state has no second-moment buffer");
  }
  const double clip = detail::update_preamble(theta, grad, state.m, lr, cfg.clip_norm,
                                              "adamw_update");
  require_same_dim(theta.size(), state.v->size(), "adamw_update");
  const std::int64_t t = state.step + 1;
  const double m_corr =
      cfg.bias_correction ? 1.0 - std::pow(cfg.beta1, static_cast<double>(t)) : 1.0;
  const double v_corr =
      cfg.bias_correction ? 1.0 - std::pow(cfg.beta2, static_cast<double>(t)) : 1.0;
  Vec& m = state.m;
  Vec& v = *state.v;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = clip * grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    theta[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) +
                      cfg.weight_decay * theta[i]);
  }
  ++state.step;
}

}  // namespace powerstep
