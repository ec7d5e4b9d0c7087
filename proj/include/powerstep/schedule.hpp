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

namespace powerstep {

/// Linear warmup from zero to eta_max, then cosine decay to eta_min.
struct Schedule {
  double eta_max = 1e-3;
  double eta_min = 1e-4;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;

  void validate() const {
    if (!(eta_max > 0.0)) throw std::invalid_argument("schedule.eta_max must be > 0");
    if (!(eta_min > 0.0)) throw std::invalid_argument("schedule.eta_min must be > 0");
    if (eta_min > eta_max) throw std::invalid_argument("schedule.eta_min must be <= eta_max");
    if (warmup_steps < 0) throw std::invalid_argument("schedule.warmup_steps must be >= 0");
    if (total_steps < 1) throw std::invalid_argument("schedule.total_steps must be >= 1");
    if (warmup_steps >= total_steps) {
      throw std::invalid_argument("schedule.warmup_steps must be < total_steps");
    }
  }
};

/// Learning rate at a zero-based step index. schedule_lr(0) is the first
/// update's rate: 0 when warming up from zero, eta_max when warmup is off.
inline double schedule_lr(const Schedule& s, std::int64_t step) {
  s.validate();
  if (step < 0) throw std::invalid_argument("schedule_lr: step must be >= 0");
  if (step < s.warmup_steps) {
    return s.eta_max * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  constexpr double kPi = 3.14159265358979323846;
  const double span = static_cast<double>(s.total_steps - s.warmup_steps);
  const double progress =
      std::min(1.0, static_cast<double>(step - s.warmup_steps) / span);
  return s.eta_min + 0.5 * (s.eta_max - s.eta_min) * (1.0 + std::cos(kPi * progress));
}

/// eta / sqrt(t) with t counted from 1; `step` is the zero-based index.
/// Used by the convergence-rate experiment instead of warmup + cosine.
inline double inv_sqrt_lr(double eta, std::int64_t step) {
  if (!(eta > 0.0)) throw std::invalid_argument("inv_sqrt_lr: eta must be > 0");
  if (step < 0) throw std::invalid_argument("inv_sqrt_lr: step must be >= 0");
  return eta / std::sqrt(static_cast<double>(step + 1));
}

}  // namespace powerstep
