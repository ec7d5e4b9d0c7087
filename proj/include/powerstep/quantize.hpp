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
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "powerstep/optim.hpp"
#include "powerstep/vec.hpp"

namespace powerstep {

/// Blockwise symmetric int8 representation of a dense buffer.
///
/// Each block of `block_size` consecutive coordinates is stored as signed
/// codes in [-127, 127] plus one real scale holding the block's maximum
/// absolute value. A coordinate decodes to (code / 127) * scale, so the
/// absmax coordinate round-trips exactly (code +-127 decodes to +-scale with
/// no rounding) and the per-coordinate error is at most half a quantization
/// step, scale / 127 / 2, up to double rounding. A block of zeros stores
/// scale 0. Linear absmax codes throughout; no stochastic rounding.
struct QuantizedBuffer {
  std::vector<std::int8_t> codes;
  std::vector<double> scales;  // per-block absmax
  std::int64_t block_size = 128;

  std::int64_t dim() const { return static_cast<std::int64_t>(codes.size()); }
  std::int64_t num_blocks() const { return static_cast<std::int64_t>(scales.size()); }
};

/// Worst-case absolute reconstruction error per block: scale / 127.
/// (Round-to-nearest actually achieves half of this; the looser figure is
/// the model used by the error analysis.)
struct QuantErrorModel {
  std::vector<double> max_abs_error_per_block;

  static QuantErrorModel of(const QuantizedBuffer& q) {
    QuantErrorModel m;
    m.max_abs_error_per_block.reserve(q.scales.size());
    for (double s : q.scales) m.max_abs_error_per_block.push_back(s / 127.0);
    return m;
  }
};

inline QuantizedBuffer quantize(const Vec& x, std::int64_t block_size = 128) {
  if (block_size < 1) throw std::invalid_argument("quantize: block_size must be >= 1");
  require_finite(x, "quantize");
  const std::int64_t d = static_cast<std::int64_t>(x.size());
  QuantizedBuffer q;
  q.block_size = block_size;
  q.codes.resize(x.size());
  q.scales.reserve(static_cast<std::size_t>((d + block_size - 1) / block_size));
  for (std::int64_t b = 0; b * block_size < d; ++b) {
    const std::int64_t lo = b * block_size;
    const std::int64_t hi = std::min(d, lo + block_size);
    double amax = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) amax = std::max(amax, std::abs(x[i]));
    q.scales.push_back(amax);
    if (amax == 0.0) {
      for (std::int64_t i = lo; i < hi; ++i) q.codes[i] = 0;
      continue;
    }
    for (std::int64_t i = lo; i < hi; ++i) {
      // round halfway cases away from zero; |x| <= amax keeps |c| <= 127
      double c = std::round(x[i] / amax * 127.0);
      c = std::min(127.0, std::max(-127.0, c));
      q.codes[i] = static_cast<std::int8_t>(c);
    }
  }
  return q;
}

inline Vec dequantize(const QuantizedBuffer& q) {
  Vec x(q.codes.size());
  for (std::int64_t i = 0; i < q.dim(); ++i) {
    const double scale = q.scales[static_cast<std::size_t>(i / q.block_size)];
    x[static_cast<std::size_t>(i)] =
        (static_cast<double>(q.codes[static_cast<std::size_t>(i)]) / 127.0) * scale;
  }
  return x;
}

/// Momentum state held in int8 between steps. Only codes and scales persist;
/// the full-precision accumulator is transient within one update.
struct QuantizedPowerStepState {
  QuantizedBuffer m;
  std::int64_t step = 0;

  static QuantizedPowerStepState zeros(std::size_t dim, std::int64_t block_size = 128) {
    QuantizedPowerStepState st;
    st.m = quantize(Vec(dim, 0.0), block_size);
    return st;
  }
};

/// Both Adam moments held in int8. This exists to demonstrate the failure
/// mode of quantizing the second moment; it is not a recommended optimizer.
struct QuantizedAdamWState {
  QuantizedBuffer m;
  QuantizedBuffer v;
  std::int64_t step = 0;

  static QuantizedAdamWState zeros(std::size_t dim, std::int64_t block_size = 128) {
    QuantizedAdamWState st;
    st.m = quantize(Vec(dim, 0.0), block_size);
    st.v = quantize(Vec(dim, 0.0), block_size);
    return st;
  }
};

/// Per-step reconstruction diagnostics.
struct QuantStepInfo {
  double max_abs_error = 0.0;  // worst |stored - accumulator| this step
  double buffer_absmax = 0.0;
};

/// Quantized signed-power momentum step:
///   acc  = g + gamma * dequantize(m_prev)   (full precision)
///   m    = quantize(acc)                    (int8 stored state)
///   theta -= lr * (sign(acc) .* |acc|^beta + weight_decay * theta)
/// The transform and the parameter update both read the full-precision
/// accumulator, never the re-quantized buffer.
inline QuantStepInfo powerstep_update_q8(Vec& theta, const Vec& grad,
                                         QuantizedPowerStepState& state,
                                         const PowerStepConfig& cfg, double lr) {
  cfg.validate();
  require_same_dim(theta.size(), grad.size(), "powerstep_update_q8");
  require_same_dim(theta.size(), static_cast<std::size_t>(state.m.dim()),
                   "powerstep_update_q8");
  require_finite(grad, "powerstep_update_q8");
  if (!(lr >= 0.0)) throw std::invalid_argument("powerstep_update_q8: lr must be >= 0");
  double clip = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double norm = l2_norm(grad);
    if (norm > cfg.clip_norm) clip = cfg.clip_norm / norm;
  }
  Vec acc = dequantize(state.m);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] = cfg.gamma * acc[i] + clip * grad[i];
  }
  state.m = quantize(acc, state.m.block_size);
  ++state.step;

  QuantStepInfo info;
  const Vec stored = dequantize(state.m);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    info.max_abs_error = std::max(info.max_abs_error, std::abs(stored[i] - acc[i]));
    info.buffer_absmax = std::max(info.buffer_absmax, std::abs(acc[i]));
    const double u = signed_power(acc[i], cfg.beta);
    theta[i] -= lr * (u + cfg.weight_decay * theta[i]);
  }
  return info;
}

/// Naive int8 AdamW: both moments are stored quantized and the parameter
/// update is computed from the re-quantized (stored) moments.
inline QuantStepInfo adamw_update_q8(Vec& theta, const Vec& grad, QuantizedAdamWState& state,
                                     const AdamWConfig& cfg, double lr) {
  cfg.validate();
  require_same_dim(theta.size(), grad.size(), "adamw_update_q8");
  require_same_dim(theta.size(), static_cast<std::size_t>(state.m.dim()), "adamw_update_q8");
  require_finite(grad, "adamw_update_q8");
  if (!(lr >= 0.0)) throw std::invalid_argument("adamw_update_q8: lr must be >= 0");
  double clip = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double norm = l2_norm(grad);
    if (norm > cfg.clip_norm) clip = cfg.clip_norm / norm;
  }
  const std::int64_t t = state.step + 1;
  const double m_corr =
      cfg.bias_correction ? 1.0 - std::pow(cfg.beta1, static_cast<double>(t)) : 1.0;
  const double v_corr =
      cfg.bias_correction ? 1.0 - std::pow(cfg.beta2, static_cast<double>(t)) : 1.0;

  Vec m = dequantize(state.m);
  Vec v = dequantize(state.v);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double g = clip * grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
  }
  state.m = quantize(m, state.m.block_size);
  state.v = quantize(v, state.v.block_size);
  ++state.step;

  QuantStepInfo info;
  const Vec m_stored = dequantize(state.m);
  const Vec v_stored = dequantize(state.v);
  for (std::size_t i = 0; i < m.size(); ++i) {
    info.max_abs_error = std::max({info.max_abs_error, std::abs(m_stored[i] - m[i]),
                                   std::abs(v_stored[i] - v[i])});
    info.buffer_absmax = std::max(info.buffer_absmax, std::abs(m[i]));
    const double m_hat = m_stored[i] / m_corr;
    const double v_hat = v_stored[i] / v_corr;
    theta[i] -= lr * (m_hat / (std::sqrt(std::max(0.0, v_hat)) + cfg.epsilon) +
                      cfg.weight_decay * theta[i]);
  }
  return info;
}

/// Outcome of the accumulation-stalling probe.
struct StallReport {
  bool ema_code_changed = false;
  std::int64_t ema_first_change_step = -1;
  bool heavy_ball_code_changed = false;
  std::int64_t heavy_ball_first_change_step = -1;
};

/// Simulates one coordinate of a quantized buffer whose quantization step is
/// pinned at `step_size` (as when a larger neighbor in the block fixes the
/// scale). A constant gradient of magnitude `increment` feeds (a) EMA
/// accumulation m <- c*m + (1-c)*g and (b) heavy-ball m <- c*m + g, with the
/// stored code re-quantized after every step. EMA scales the incoming
/// gradient by 1-c, so its per-step increment can sit below half a
/// quantization step and leave the code frozen while heavy-ball, feeding the
/// gradient at full weight, advances.
inline StallReport ema_stall_probe(double increment, double ema_coeff, std::int64_t steps,
                                   double step_size) {
  if (!(step_size > 0.0)) throw std::invalid_argument("ema_stall_probe: step_size must be > 0");
  if (!(ema_coeff >= 0.0 && ema_coeff < 1.0)) {
    throw std::invalid_argument("ema_stall_probe: ema_coeff must lie in [0, 1)");
  }
  if (steps < 1) throw std::invalid_argument("ema_stall_probe: steps must be >= 1");
  StallReport report;
  const auto requantize = [step_size](double value) {
    double c = std::round(value / step_size);
    return std::min(127.0, std::max(-127.0, c));
  };
  double ema_code = 0.0, hb_code = 0.0;
  for (std::int64_t t = 1; t <= steps; ++t) {
    const double ema_val = ema_coeff * (ema_code * step_size) + (1.0 - ema_coeff) * increment;
    const double new_ema = requantize(ema_val);
    if (new_ema != ema_code && !report.ema_code_changed) {
      report.ema_code_changed = true;
      report.ema_first_change_step = t;
    }
    ema_code = new_ema;

    const double hb_val = ema_coeff * (hb_code * step_size) + increment;
    const double new_hb = requantize(hb_val);
    if (new_hb != hb_code && !report.heavy_ball_code_changed) {
      report.heavy_ball_code_changed = true;
      report.heavy_ball_first_change_step = t;
    }
    hb_code = new_hb;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Binary dump format. Little-endian throughout so dumps are byte-comparable
// across implementations:
//   magic "PSQ8" | version u16 | block_size u32 | dim u64   (18-byte header)
//   codes: dim * int8
//   scales: num_blocks * binary64
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline std::uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline constexpr std::uint16_t kDumpFormatVersion = 1;

inline void dump_buffer(const QuantizedBuffer& q, std::ostream& os) {
  os.write("PSQ8", 4);
  detail::put_u16(os, kDumpFormatVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(q.block_size));
  detail::put_u64(os, static_cast<std::uint64_t>(q.dim()));
  if (q.dim() > 0) {
    os.write(reinterpret_cast<const char*>(q.codes.data()),
             static_cast<std::streamsize>(q.codes.size()));
  }
  for (double s : q.scales) {
    std::uint64_t bits;
    std::memcpy(&bits, &s, 8);
    detail::put_u64(os, bits);
  }
  if (!os) throw std::runtime_error("dump_buffer: write failed");
}

inline QuantizedBuffer load_buffer(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PSQ8", 4) != 0) {
    throw std::runtime_error("load_buffer: bad magic");
  }
  const std::uint16_t version = detail::get_u16(is);
  if (version != kDumpFormatVersion) {
    throw std::runtime_error("load_buffer: unsupported version " + std::to_string(version));
  }
  QuantizedBuffer q;
  q.block_size = detail::get_u32(is);
  if (q.block_size < 1) throw std::runtime_error("load_buffer: bad block size");
  const std::uint64_t dim = detail::get_u64(is);
  q.codes.resize(dim);
  if (dim > 0) {
    is.read(reinterpret_cast<char*>(q.codes.data()), static_cast<std::streamsize>(dim));
  }
  const std::uint64_t blocks =
      (dim + static_cast<std::uint64_t>(q.block_size) - 1) /
      static_cast<std::uint64_t>(q.block_size);
  q.scales.resize(blocks);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::uint64_t bits = detail::get_u64(is);
    std::memcpy(&q.scales[b], &bits, 8);
  }
  if (!is) throw std::runtime_error("load_buffer: truncated stream");
  return q;
}

// ---------------------------------------------------------------------------
// State-size accounting: arithmetic identities from the buffer layouts (fp32
// moments, int8 codes plus one binary64 scale per block), not measurements.
// ---------------------------------------------------------------------------

inline std::int64_t quantized_buffer_bytes(std::int64_t dim, std::int64_t block_size) {
  const std::int64_t blocks = (dim + block_size - 1) / block_size;
  return dim + 8 * blocks;
}

/// Optimizer-state bytes for a parameter count. `optimizer` is "powerstep"
/// (or its aliases) or "adamw"; `mode` is "fp" or "q8".
inline std::int64_t optimizer_state_bytes(const std::string& optimizer, const std::string& mode,
                                          std::int64_t dim, std::int64_t block_size = 128) {
  const bool quantized = mode == "q8";
  const std::int64_t buffers = optimizer == "adamw" ? 2 : 1;
  if (quantized) return buffers * quantized_buffer_bytes(dim, block_size);
  return buffers * 4 * dim;  // fp32 moments
}

}  // namespace powerstep
