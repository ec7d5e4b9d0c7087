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

namespace powerstep {

/// Counter-based splittable generator. Every stream is a pure function of
/// (key, counter), so runs are bit-reproducible regardless of how work is
/// scheduled across threads. Standard-library distributions are avoided on
/// purpose: their output is implementation-defined.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ kKeySalt)) {}

  std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform draw in (0, 1]; safe to pass through log().
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Integer in [0, n). n must be positive. Uses rejection to stay unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t u = next_u64();
    while (u >= limit) u = next_u64();
    return u % n;
  }

  /// Derives an independent child stream. Children with distinct ids never
  /// collide with each other or with the parent's own draw sequence.
  SplitRng split(std::uint64_t stream_id) const {
    SplitRng child(0);
    child.key_ = mix(mix(key_ ^ kSplitSalt) + kGolden * (stream_id + 1));
    child.counter_ = 0;
    child.has_spare_ = false;
    return child;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kKeySalt = 0x5bf0'3635'd1f4'9f33ull;
  static constexpr std::uint64_t kSplitSalt = 0xa02c'35c9'13b5'6d11ull;

  // Murmur3 64-bit finalizer; full avalanche on the counter word.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdull;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ull;
    z ^= z >> 33;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace powerstep
