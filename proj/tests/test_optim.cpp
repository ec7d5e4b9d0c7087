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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "powerstep/optim.hpp"
#include "powerstep/rng.hpp"
#include "powerstep/schedule.hpp"

using namespace powerstep;

namespace {

// 1.9^0.1 from a 60-digit reference evaluation.
constexpr double kPow19_01 = 1.0662900584785258;

PowerStepConfig powerstep_cfg(double gamma, double beta, double wd = 0.0, double clip = 0.0) {
  PowerStepConfig cfg;
  cfg.gamma = gamma;
  cfg.beta = PowerExponent(beta);
  cfg.weight_decay = wd;
  cfg.clip_norm = clip;
  return cfg;
}

}  // namespace

TEST_CASE("config invariants are enforced") {
  CHECK_THROWS_AS(powerstep_cfg(1.0, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(powerstep_cfg(-0.1, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(powerstep_cfg(0.9, 0.1, -1.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(powerstep_cfg(0.0, 0.0).validate());
  AdamWConfig bad;
  bad.beta2 = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("powerstep with gamma=0, beta=1 reduces to plain gradient descent") {
  Vec theta{1.0};
  OptimizerState st = OptimizerState::zeros(1);
  powerstep_update(theta, Vec{2.0}, st, powerstep_cfg(0.0, 1.0), 0.1);
  CHECK(theta[0] == Catch::Approx(0.8).epsilon(1e-15));
  CHECK(st.step == 1);
}

TEST_CASE("powerstep with beta=0 takes a sign step") {
  Vec theta{1.0};
  OptimizerState st = OptimizerState::zeros(1);
  powerstep_update(theta, Vec{-3.0}, st, powerstep_cfg(0.9, 0.0), 0.1);
  CHECK(st.m[0] == -3.0);
  CHECK(theta[0] == Catch::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("powerstep two-step hand unroll with constant gradient") {
  // gamma=0.9, beta=0.1, g=1 twice: m2 = 1.9, decrement at step 2 = lr*1.9^0.1
  const double lr = 0.05;
  Vec theta{0.0};
  OptimizerState st = OptimizerState::zeros(1);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 0.1);
  powerstep_update(theta, Vec{1.0}, st, cfg, lr);
  CHECK(st.m[0] == 1.0);
  const double after_one = theta[0];
  powerstep_update(theta, Vec{1.0}, st, cfg, lr);
  CHECK(st.m[0] == Catch::Approx(1.9).epsilon(1e-15));
  CHECK(after_one - theta[0] == Catch::Approx(lr * kPow19_01).epsilon(1e-14));
  CHECK(st.step == 2);
}

TEST_CASE("powerstep rejects bad inputs with diagnostics") {
  Vec theta{1.0, 2.0};
  OptimizerState st = OptimizerState::zeros(2);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 0.1);
  CHECK_THROWS_AS(powerstep_update(theta, Vec{1.0}, st, cfg, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(
      powerstep_update(theta, Vec{1.0, std::numeric_limits<double>::quiet_NaN()}, st, cfg, 0.1),
      std::invalid_argument);
  CHECK_THROWS_AS(powerstep_update(theta, Vec{1.0, 1.0}, st, cfg, -0.1), std::invalid_argument);
  CHECK(st.step == 0);  // failed updates must not advance the counter
}

TEST_CASE("adamw single step with beta1=beta2=0 normalizes the gradient") {
  Vec theta{1.0};
  OptimizerState st = OptimizerState::zeros(1, true);
  AdamWConfig cfg;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.epsilon = 0.0;
  const double lr = 0.25;
  adamw_update(theta, Vec{4.0}, st, cfg, lr);
  CHECK(theta[0] == Catch::Approx(1.0 - lr).epsilon(1e-15));
}

TEST_CASE("adamw stays put on zero gradients without decay") {
  Vec theta{1.0, -2.0};
  OptimizerState st = OptimizerState::zeros(2, true);
  AdamWConfig cfg;
  for (int t = 0; t < 5; ++t) adamw_update(theta, Vec{0.0, 0.0}, st, cfg, 0.1);
  CHECK(theta[0] == 1.0);
  CHECK(theta[1] == -2.0);
}

TEST_CASE("adamw three-step trajectory matches the scalar-loop oracle") {
  // f(theta) = theta^2 / 2, exact gradient theta, lr 0.1, defaults otherwise.
  // Frozen expectations from a 60-digit reference of the same recurrence.
  const double kBias[3] = {0.900000001, 0.8002805517177849, 0.7010893472659038};
  const double kNoBias[3] = {0.9552786424500042, 0.8944834399568372, 0.8229439520714972};

  for (bool bias : {true, false}) {
    AdamWConfig cfg;
    cfg.bias_correction = bias;
    Vec theta{1.0};
    OptimizerState st = OptimizerState::zeros(1, true);

    // independent scalar-loop oracle
    double th = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 3; ++t) {
      const double g = th;
      adamw_update(theta, Vec{theta[0]}, st, cfg, 0.1);
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double mc = bias ? 1.0 - std::pow(cfg.beta1, t) : 1.0;
      const double vc = bias ? 1.0 - std::pow(cfg.beta2, t) : 1.0;
      th -= 0.1 * (m / mc) / (std::sqrt(v / vc) + cfg.epsilon);
      CHECK(theta[0] == Catch::Approx(th).margin(1e-15));
      CHECK(theta[0] == Catch::Approx(bias ? kBias[t - 1] : kNoBias[t - 1]).epsilon(1e-12));
    }
  }
}

TEST_CASE("signsgdm is powerstep at beta zero") {
  SplitRng rng(41);
  Vec theta_a(16), theta_b(16);
  for (std::size_t i = 0; i < 16; ++i) theta_a[i] = theta_b[i] = rng.gaussian();
  OptimizerState st_a = OptimizerState::zeros(16);
  OptimizerState st_b = OptimizerState::zeros(16);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 0.0, 0.01, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vec g(16);
    for (double& v : g) v = rng.gaussian();
    powerstep_update(theta_a, g, st_a, cfg, 0.01);
    signsgdm_update(theta_b, g, st_b, powerstep_cfg(0.9, 0.7, 0.01, 1.0), 0.01);
    for (std::size_t i = 0; i < 16; ++i) CHECK(theta_a[i] == theta_b[i]);
  }
}

TEST_CASE("pbsgdm at beta=1 walks the heavy-ball trajectory") {
  SplitRng rng(42);
  Vec theta_a(8), theta_b(8);
  for (std::size_t i = 0; i < 8; ++i) theta_a[i] = theta_b[i] = rng.gaussian();
  OptimizerState st_a = OptimizerState::zeros(8);
  OptimizerState st_b = OptimizerState::zeros(8);
  for (int t = 0; t < 50; ++t) {
    Vec g(8);
    for (double& v : g) v = rng.gaussian();
    pbsgdm_update(theta_a, g, st_a, powerstep_cfg(0.9, 1.0), 0.01);
    powerstep_update(theta_b, g, st_b, powerstep_cfg(0.9, 1.0), 0.01);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(theta_a[i] == Catch::Approx(theta_b[i]).margin(1e-14));
    }
  }
}

TEST_CASE("pbsgdm at gamma=0 transforms the raw gradient") {
  Vec theta{0.0};
  OptimizerState st = OptimizerState::zeros(1);
  pbsgdm_update(theta, Vec{16.0}, st, powerstep_cfg(0.0, 0.5), 1.0);
  CHECK(theta[0] == Catch::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("pbsgdm two-step hand unroll") {
  // m2 = 0.9 * phi(1) + phi(1) = 1.9 because phi_beta(1) = 1
  Vec theta{0.0};
  OptimizerState st = OptimizerState::zeros(1);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 0.1);
  pbsgdm_update(theta, Vec{1.0}, st, cfg, 0.0);
  pbsgdm_update(theta, Vec{1.0}, st, cfg, 0.0);
  CHECK(st.m[0] == Catch::Approx(1.9).epsilon(1e-15));
}

TEST_CASE("clip_global_norm") {
  CHECK(clip_global_norm(Vec{0.3, 0.4}, 1.0) == Vec{0.3, 0.4});
  const Vec clipped = clip_global_norm(Vec{3.0, 4.0}, 1.0);
  CHECK(clipped[0] == Catch::Approx(0.6).margin(1e-15));
  CHECK(clipped[1] == Catch::Approx(0.8).margin(1e-15));
  SplitRng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    Vec g(1 + rng.below(256));
    for (double& v : g) v = 10.0 * rng.gaussian();
    const Vec c = clip_global_norm(g, 1.0);
    CHECK(l2_norm(c) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(clip_global_norm(Vec{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("powerstep at beta=1 matches the heavy-ball recurrence over 100 steps") {
  SplitRng rng(44);
  const std::size_t d = 32;
  Vec theta(d), hb_theta(d), hb_m(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) theta[i] = hb_theta[i] = rng.gaussian();
  OptimizerState st = OptimizerState::zeros(d);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vec g(d);
    for (double& v : g) v = rng.gaussian();
    const double lr = inv_sqrt_lr(0.1, t);
    powerstep_update(theta, g, st, cfg, lr);
    for (std::size_t i = 0; i < d; ++i) {
      hb_m[i] = 0.9 * hb_m[i] + g[i];
      hb_theta[i] -= lr * hb_m[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(std::abs(theta[i] - hb_theta[i]) <= 1e-12 * (1.0 + std::abs(hb_theta[i])));
    }
  }
}

TEST_CASE("powerstep at beta=0 moves every coordinate by exactly lr times the sign") {
  SplitRng rng(45);
  const std::size_t d = 16;
  Vec theta(d);
  for (double& v : theta) v = rng.gaussian();
  OptimizerState st = OptimizerState::zeros(d);
  const PowerStepConfig cfg = powerstep_cfg(0.9, 0.0);
  for (int t = 0; t < 30; ++t) {
    Vec g(d);
    for (double& v : g) v = rng.gaussian();
    const Vec before = theta;
    powerstep_update(theta, g, st, cfg, 0.01);
    for (std::size_t i = 0; i < d; ++i) {
      const double sign = st.m[i] > 0.0 ? 1.0 : (st.m[i] < 0.0 ? -1.0 : 0.0);
      CHECK(theta[i] == before[i] - 0.01 * sign);
    }
  }
}

TEST_CASE("transformed momentum equals the diagonal preconditioner form") {
  // phi_beta(m) = |m|^(beta-1) * m whenever m has no zero coordinate
  SplitRng rng(46);
  const PowerExponent beta(0.1);
  for (int trial = 0; trial < 300; ++trial) {
    double m = 0.0;
    while (m == 0.0) m = std::pow(10.0, rng.uniform(-8.0, 3.0)) * rng.gaussian();
    const double lhs = signed_power(m, beta);
    const double rhs = std::pow(std::abs(m), beta.value() - 1.0) * m;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
}

TEST_CASE("noiseless momentum norm stays under G / (1 - gamma)") {
  SplitRng rng(47);
  const std::size_t d = 24;
  const double gamma = 0.95;
  Vec theta(d, 0.5);
  OptimizerState st = OptimizerState::zeros(d);
  const PowerStepConfig cfg = powerstep_cfg(gamma, 0.1);
  double grad_norm_max = 0.0;
  for (int t = 0; t < 400; ++t) {
    Vec g(d);
    for (double& v : g) v = rng.gaussian();  // bounded realization, no noise model
    grad_norm_max = std::max(grad_norm_max, l2_norm(g));
    powerstep_update(theta, g, st, cfg, 1e-3);
    CHECK(l2_norm(st.m) <= grad_norm_max / (1.0 - gamma) + 1e-9);
  }
}

TEST_CASE("decoupled decay contracts parameters geometrically under zero gradients") {
  for (double beta : {0.0, 0.1, 1.0}) {
    for (double gamma : {0.0, 0.9}) {
      Vec theta{2.0, -3.0};
      OptimizerState st = OptimizerState::zeros(2);
      const double lr = 0.05, wd = 0.1;
      const PowerStepConfig cfg = powerstep_cfg(gamma, beta, wd);
      for (int t = 1; t <= 25; ++t) {
        powerstep_update(theta, Vec{0.0, 0.0}, st, cfg, lr);
        const double factor = std::pow(1.0 - lr * wd, t);
        CHECK(theta[0] == Catch::Approx(2.0 * factor).epsilon(1e-12));
        CHECK(theta[1] == Catch::Approx(-3.0 * factor).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("smaller momentum coordinates get relatively larger steps") {
  // with 0 < |m_i| < |m_j|, the step-to-momentum ratio is larger at i
  SplitRng rng(48);
  const PowerExponent beta(0.1);
  for (int trial = 0; trial < 200; ++trial) {
    const double mi = std::pow(10.0, rng.uniform(-6.0, 1.0));
    const double mj = mi * (1.0 + std::abs(rng.gaussian()) + 1e-6);
    const double ratio_i = std::abs(signed_power(mi, beta)) / mi;
    const double ratio_j = std::abs(signed_power(mj, beta)) / mj;
    CHECK(ratio_i > ratio_j);
  }
}

TEST_CASE("warmup-cosine schedule endpoints") {
  Schedule s{1e-3, 1e-4, 2000, 10000};
  CHECK(schedule_lr(s, 0) == 0.0);
  CHECK(schedule_lr(s, 1000) == Catch::Approx(5e-4).epsilon(1e-12));
  CHECK(schedule_lr(s, 2000) == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(schedule_lr(s, 10000) == Catch::Approx(1e-4).epsilon(1e-12));
  // midpoint of the cosine leg
  CHECK(schedule_lr(s, 6000) == Catch::Approx(0.5 * (1e-3 + 1e-4)).epsilon(1e-12));
  // monotone decay after warmup
  for (std::int64_t t = 2000; t < 10000; t += 500) {
    CHECK(schedule_lr(s, t) >= schedule_lr(s, t + 500));
  }
  Schedule bad = s;
  bad.warmup_steps = 10000;
  CHECK_THROWS_AS(schedule_lr(bad, 0), std::invalid_argument);
  Schedule no_warmup{1e-3, 1e-4, 0, 100};
  CHECK(schedule_lr(no_warmup, 0) == Catch::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("inverse-sqrt schedule") {
  CHECK(inv_sqrt_lr(0.5, 0) == 0.5);
  CHECK(inv_sqrt_lr(0.5, 3) == Catch::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(inv_sqrt_lr(0.0, 1), std::invalid_argument);
}
