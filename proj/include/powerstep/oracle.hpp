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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "powerstep/optim.hpp"
#include "powerstep/power_transform.hpp"
#include "powerstep/problems.hpp"
#include "powerstep/rng.hpp"
#include "powerstep/schedule.hpp"
#include "powerstep/vec.hpp"

namespace powerstep {

/// Result of one verification check. All violations are normalized
/// relative-plus-absolute: |lhs - rhs| / (1 + |rhs|), so a tolerance of
/// 1e-9 acts as both a relative and an absolute floor.
struct CheckReport {
  std::string id;
  std::int64_t samples = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

inline CheckReport make_report(std::string id, std::int64_t samples, double max_violation,
                               double tolerance, std::string detail = {}) {
  CheckReport r;
  r.id = std::move(id);
  r.samples = samples;
  r.max_violation = max_violation;
  r.tolerance = tolerance;
  r.pass = max_violation <= tolerance;
  r.detail = std::move(detail);
  return r;
}

// ---------------------------------------------------------------------------
// Independent recomputation path: compensated summation in extended
// precision, with powl instead of the library's exp/log route. The library
// itself may sum naively; the gap between the two routes is part of what
// these checks measure.
// ---------------------------------------------------------------------------

struct KahanAcc {
  long double sum = 0.0L;
  long double comp = 0.0L;

  void add(long double x) {
    const long double y = x - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  double value() const { return static_cast<double>(sum); }
};

namespace oracle_detail {

inline long double signed_power_ld(long double x, long double beta) {
  if (x == 0.0L) return 0.0L;
  if (beta == 0.0L) return x < 0.0L ? -1.0L : 1.0L;
  const long double mag = powl(fabsl(x), beta);
  return x < 0.0L ? -mag : mag;
}

inline double lp_norm_pow_ld(const Vec& x, long double p) {
  KahanAcc acc;
  for (double v : x) acc.add(powl(fabsl(static_cast<long double>(v)), p));
  return acc.value();
}

inline double rel_gap(double lhs, double rhs) {
  return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
}

// One-sided gap for inequalities lhs <= rhs.
inline double rel_excess(double lhs, double rhs) {
  return std::max(0.0, lhs - rhs) / (1.0 + std::abs(rhs));
}

// Random test vector with a wide magnitude spread and occasional exact zeros.
inline Vec random_instance(std::int64_t dim, SplitRng& rng) {
  const double log_scale = rng.uniform(-6.0, 6.0);
  const double scale = std::pow(10.0, log_scale);
  Vec x(static_cast<std::size_t>(dim));
  for (double& v : x) {
    v = rng.uniform() < 0.05 ? 0.0 : scale * rng.gaussian();
  }
  return x;
}

}  // namespace oracle_detail

/// <m, signed_power(m)> equals the (1+beta)-power norm of m. Both sides are
/// evaluated through the library and through the compensated extended-
/// precision route; the reported violation is the worst gap across the two
/// routes and between them.
inline CheckReport check_induced_norm_identity(const std::vector<std::int64_t>& dims,
                                               const std::vector<double>& betas,
                                               std::int64_t samples_per_cell, double tolerance,
                                               SplitRng rng, std::string id) {
  using namespace oracle_detail;
  double worst = 0.0;
  std::int64_t total = 0;
  for (std::int64_t d : dims) {
    for (double b : betas) {
      const PowerExponent beta(b);
      for (std::int64_t s = 0; s < samples_per_cell; ++s) {
        const Vec x = random_instance(d, rng);
        const double lib_lhs = inner(x, signed_power(x, beta));
        const double lib_rhs = lp_norm_pow(x, 1.0 + b);
        KahanAcc lhs_acc;
        for (double v : x) {
          lhs_acc.add(static_cast<long double>(v) *
                      signed_power_ld(static_cast<long double>(v), b));
        }
        const double orc_lhs = lhs_acc.value();
        const double orc_rhs = lp_norm_pow_ld(x, 1.0L + static_cast<long double>(b));
        const double v = std::max({rel_gap(lib_lhs, lib_rhs), rel_gap(orc_lhs, orc_rhs),
                                   rel_gap(lib_lhs, orc_lhs), rel_gap(lib_rhs, orc_rhs)});
        worst = std::max(worst, v);
        ++total;
      }
    }
  }
  return make_report(std::move(id), total, worst, tolerance);
}

/// ||signed_power(m)||_2^2 equals sum |m_i|^(2 beta) (checked structurally:
/// squaring erases the sign bit exactly) and is bounded by
/// d^(1-beta) ||m||_2^(2 beta).
inline CheckReport check_power_norm_relationship(const std::vector<std::int64_t>& dims,
                                                 const std::vector<double>& betas,
                                                 std::int64_t samples_per_cell,
                                                 double tolerance, SplitRng rng,
                                                 std::string id) {
  using namespace oracle_detail;
  double worst = 0.0;
  std::int64_t total = 0;
  for (std::int64_t d : dims) {
    for (double b : betas) {
      const PowerExponent beta(b);
      for (std::int64_t s = 0; s < samples_per_cell; ++s) {
        const Vec x = random_instance(d, rng);
        const Vec z = signed_power(x, beta);
        // equality part: sum z_i^2 == sum |z_i|^2 term by term, exactly
        double lhs = 0.0, rhs_same = 0.0;
        for (double zi : z) {
          lhs += zi * zi;
          rhs_same += std::abs(zi) * std::abs(zi);
        }
        double v = lhs == rhs_same ? 0.0 : rel_gap(lhs, rhs_same);
        // the two power routes (squared exp/log vs direct 2*beta) agree
        const double rhs_lib = lp_norm_pow(x, 2.0 * b);
        const double rhs_orc = lp_norm_pow_ld(x, 2.0L * static_cast<long double>(b));
        v = std::max({v, rel_gap(lhs, rhs_lib), rel_gap(rhs_lib, rhs_orc)});
        // inequality part against d^(1-beta) ||x||_2^(2 beta)
        const double bound = std::pow(static_cast<double>(d), 1.0 - b) *
                             std::pow(l2_norm(x), 2.0 * b);
        v = std::max(v, rel_excess(rhs_lib, bound));
        worst = std::max(worst, v);
        ++total;
      }
    }
  }
  return make_report(std::move(id), total, worst, tolerance);
}

/// ||signed_power(x) - signed_power(y)||_{1+beta} is Holder-continuous with
/// constant 2^(1-beta) d^((1-beta)/(1+beta)). Instances include independent
/// pairs, near-identical pairs, and sign-flipped pairs, the adversarial
/// case for the coordinatewise bound.
inline CheckReport check_holder_continuity(const std::vector<std::int64_t>& dims,
                                           const std::vector<double>& betas,
                                           std::int64_t samples_per_cell, double tolerance,
                                           SplitRng rng, std::string id) {
  using namespace oracle_detail;
  double worst = 0.0;
  std::int64_t total = 0;
  for (std::int64_t d : dims) {
    for (double b : betas) {
      const PowerExponent beta(b);
      const double c_beta = holder_constant(beta, d);
      for (std::int64_t s = 0; s < samples_per_cell; ++s) {
        const Vec x = random_instance(d, rng);
        Vec y;
        switch (s % 3) {
          case 0:
            y = random_instance(d, rng);
            break;
          case 1: {  // small perturbation
            y = x;
            for (double& v : y) v += 1e-3 * rng.gaussian();
            break;
          }
          default: {  // opposite-sign coordinates
            y = x;
            for (double& v : y) {
              if (rng.uniform() < 0.5) v = -v;
            }
            break;
          }
        }
        Vec diff_phi(x.size()), diff_xy(x.size());
        const Vec phix = signed_power(x, beta);
        const Vec phiy = signed_power(y, beta);
        for (std::size_t i = 0; i < x.size(); ++i) {
          diff_phi[i] = phix[i] - phiy[i];
          diff_xy[i] = x[i] - y[i];
        }
        const double lhs = lp_norm(diff_phi, 1.0 + b);
        const double rhs = c_beta * std::pow(lp_norm(diff_xy, 1.0 + b), b);
        double v = rel_excess(lhs, rhs);
        // oracle route
        const double lhs_o =
            std::pow(lp_norm_pow_ld(diff_phi, 1.0L + static_cast<long double>(b)),
                     1.0 / (1.0 + b));
        const double rhs_o =
            c_beta * std::pow(std::pow(lp_norm_pow_ld(diff_xy, 1.0L + static_cast<long double>(b)),
                                       1.0 / (1.0 + b)),
                              b);
        v = std::max({v, rel_excess(lhs_o, rhs_o), rel_gap(lhs, lhs_o)});
        worst = std::max(worst, v);
        ++total;
      }
    }
  }
  return make_report(std::move(id), total, worst, tolerance);
}

/// Coordinatewise bound behind the Holder result:
/// |signed_power(a) - signed_power(b)| <= 2^(1-beta) |a - b|^beta,
/// sampled over same-sign and opposite-sign scalar pairs.
inline CheckReport check_scalar_power_bound(const std::vector<double>& betas,
                                            std::int64_t samples, double tolerance,
                                            SplitRng rng, std::string id = "scalar-power-bound") {
  using namespace oracle_detail;
  double worst = 0.0;
  std::int64_t total = 0;
  for (double b : betas) {
    const PowerExponent beta(b);
    const double c = std::pow(2.0, 1.0 - b);
    for (std::int64_t s = 0; s < samples; ++s) {
      const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
      double a1 = scale * rng.gaussian();
      double a2 = (s % 2 == 0) ? scale * rng.gaussian() : -std::abs(scale * rng.gaussian());
      if (s % 2 == 1) a1 = std::abs(a1);  // force an opposite-sign pair
      const double lhs = std::abs(signed_power(a1, beta) - signed_power(a2, beta));
      const double rhs = c * std::pow(std::abs(a1 - a2), b);
      worst = std::max(worst, rel_excess(lhs, rhs));
      ++total;
    }
  }
  return make_report(std::move(id), total, worst, tolerance);
}

/// Monte-Carlo check that E||m_t||^2 stays under 2 (G^2 + sigma^2) / (1-gamma)^2
/// along signed-power momentum runs, with G the largest gradient norm seen
/// across all sampled trajectories. The estimate passes when
/// mean + 3 stderr <= bound at every probed step.
inline CheckReport check_momentum_bound(const Problem& problem, double gamma,
                                        std::int64_t steps, std::int64_t n_seeds,
                                        std::uint64_t seed, std::int64_t probe_every = 10) {
  if (!problem.noise_sigma.has_value()) {
    throw std::invalid_argument("check_momentum_bound: problem has no configured noise bound");
  }
  PowerStepConfig cfg;
  cfg.gamma = gamma;
  cfg.beta = PowerExponent(0.1);
  cfg.weight_decay = 0.0;
  cfg.clip_norm = 0.0;

  const std::int64_t n_probes = steps / probe_every;
  std::vector<double> sum(static_cast<std::size_t>(n_probes), 0.0);
  std::vector<double> sum_sq(static_cast<std::size_t>(n_probes), 0.0);
  double grad_norm_max = 0.0;

  SplitRng root(seed);
  for (std::int64_t s = 0; s < n_seeds; ++s) {
    SplitRng rng = root.split(static_cast<std::uint64_t>(s));
    Vec theta = problem.theta0;
    OptimizerState state = OptimizerState::zeros(theta.size());
    for (std::int64_t t = 0; t < steps; ++t) {
      grad_norm_max = std::max(grad_norm_max, l2_norm(problem.eval_grad(theta)));
      const Vec g = problem.sample_grad(theta, rng);
      powerstep_update(theta, g, state, cfg, inv_sqrt_lr(0.1, t));
      if ((t + 1) % probe_every == 0) {
        const std::size_t k = static_cast<std::size_t>((t + 1) / probe_every - 1);
        const double msq = l2_norm_sq(state.m);
        sum[k] += msq;
        sum_sq[k] += msq * msq;
      }
    }
  }

  const double sigma = *problem.noise_sigma;
  const double bound = 2.0 * (grad_norm_max * grad_norm_max + sigma * sigma) /
                       ((1.0 - gamma) * (1.0 - gamma));
  double worst = -1.0;  // max over probes of (mean + 3 stderr) / bound - 1
  const double n = static_cast<double>(n_seeds);
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(0.0, sum_sq[k] / n - mean * mean) * n / (n - 1.0);
    const double stderr3 = 3.0 * std::sqrt(var / n);
    worst = std::max(worst, (mean + stderr3) / bound - 1.0);
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "gamma=%g G=%.6g sigma=%g bound=%.6g", gamma,
                grad_norm_max, sigma, bound);
  char id[64];
  std::snprintf(id, sizeof(id), "momentum-second-moment-bound[gamma=%g]", gamma);
  return make_report(id, n_seeds * n_probes, worst, 0.0, detail);
}

/// Pathwise descent inequality on a noiseless problem with exact smoothness
/// constant: at every step,
///   f(theta_t) <= f(theta_{t-1}) - lr <grad, u> + (L lr^2 / 2) ||u||^2
/// where u is the transformed momentum actually applied.
inline CheckReport check_descent_inequality(const Problem& problem, double gamma, double beta,
                                            double eta, std::int64_t steps) {
  if (!problem.smoothness.has_value()) {
    throw std::invalid_argument("check_descent_inequality: problem has no smoothness constant");
  }
  const double L = *problem.smoothness;
  PowerStepConfig cfg;
  cfg.gamma = gamma;
  cfg.beta = PowerExponent(beta);
  cfg.weight_decay = 0.0;
  cfg.clip_norm = 0.0;

  Vec theta = problem.theta0;
  OptimizerState state = OptimizerState::zeros(theta.size());
  double worst = 0.0;
  for (std::int64_t t = 0; t < steps; ++t) {
    const double f_prev = problem.eval_loss(theta);
    const Vec grad = problem.eval_grad(theta);
    const double lr = inv_sqrt_lr(eta, t);
    powerstep_update(theta, grad, state, cfg, lr);
    const Vec u = signed_power(state.m, cfg.beta);
    const double f_new = problem.eval_loss(theta);
    const double slack =
        f_prev - lr * inner(grad, u) + 0.5 * L * lr * lr * l2_norm_sq(u) - f_new;
    worst = std::max(worst, -slack / (1.0 + std::abs(f_prev)));
  }
  return make_report("descent-inequality", steps, worst, 1e-9);
}

/// Central finite differences with a per-coordinate step proportional to the
/// coordinate's magnitude.
inline Vec finite_diff_grad(const Problem& problem, const Vec& theta,
                            double step_scale = 6.0e-6) {
  Vec g(theta.size());
  Vec probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = step_scale * std::max(1.0, std::abs(theta[i]));
    probe[i] = theta[i] + h;
    const double fp = problem.eval_loss(probe);
    probe[i] = theta[i] - h;
    const double fm = problem.eval_loss(probe);
    probe[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Norm-relative agreement between analytic and finite-difference gradients
/// at random points.
inline CheckReport check_gradient_audit(const Problem& problem, std::int64_t points,
                                        std::uint64_t seed, double tolerance = 1e-5,
                                        double point_scale = 1.0) {
  SplitRng rng(seed);
  double worst = 0.0;
  for (std::int64_t k = 0; k < points; ++k) {
    Vec theta(problem.theta0.size());
    for (double& v : theta) v = point_scale * rng.gaussian();
    const Vec analytic = problem.eval_grad(theta);
    const Vec fd = finite_diff_grad(problem, theta);
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double d = analytic[i] - fd[i];
      diff_sq += d * d;
    }
    const double rel = std::sqrt(diff_sq) / std::max(1e-12, l2_norm(analytic));
    worst = std::max(worst, rel);
  }
  return make_report("grad-audit-" + problem.name, points, worst, tolerance);
}

/// Local smoothness probe: ||grad f(x) - grad f(y)|| <= L ||x - y|| on
/// sampled pairs, with L taken from the construction.
inline CheckReport check_smoothness_probe(const Problem& problem, std::int64_t pairs,
                                          std::uint64_t seed) {
  if (!problem.smoothness.has_value()) {
    throw std::invalid_argument("check_smoothness_probe: problem has no smoothness constant");
  }
  const double L = *problem.smoothness;
  SplitRng rng(seed);
  double worst = 0.0;
  for (std::int64_t k = 0; k < pairs; ++k) {
    Vec x(problem.theta0.size()), y(problem.theta0.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.gaussian();
      y[i] = x[i] + rng.gaussian();
    }
    const Vec gx = problem.eval_grad(x);
    const Vec gy = problem.eval_grad(y);
    Vec dg(x.size()), dxy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      dg[i] = gx[i] - gy[i];
      dxy[i] = x[i] - y[i];
    }
    worst = std::max(worst, oracle_detail::rel_excess(l2_norm(dg), L * l2_norm(dxy)));
  }
  return make_report("smoothness-probe-" + problem.name, pairs, worst, 1e-9);
}

/// The full verification suite consumed by the CLI. `quick` trims sample
/// counts for use inside unit tests.
inline std::vector<CheckReport> verify_suite(std::uint64_t seed, bool quick = false) {
  const std::vector<std::int64_t> dims = quick ? std::vector<std::int64_t>{1, 2, 8, 128}
                                               : std::vector<std::int64_t>{1, 2, 8, 128, 1024};
  const std::vector<double> betas{0.05, 0.1, 0.5};
  const std::vector<double> beta_one{1.0};
  const std::int64_t per_cell = quick ? 100 : 1000;

  SplitRng root(seed);
  std::vector<CheckReport> reports;
  reports.push_back(check_induced_norm_identity(dims, betas, per_cell, 1e-9, root.split(1),
                                                "induced-norm-identity"));
  reports.push_back(check_induced_norm_identity(dims, beta_one, per_cell, 1e-12, root.split(2),
                                                "induced-norm-identity[beta=1]"));
  reports.push_back(check_power_norm_relationship(dims, betas, per_cell, 1e-9, root.split(3),
                                                  "power-norm-relationship"));
  reports.push_back(check_power_norm_relationship(dims, beta_one, per_cell, 1e-12,
                                                  root.split(4),
                                                  "power-norm-relationship[beta=1]"));
  reports.push_back(check_holder_continuity(dims, betas, per_cell, 1e-9, root.split(5),
                                            "holder-continuity"));
  reports.push_back(check_holder_continuity(dims, beta_one, per_cell, 1e-12, root.split(6),
                                            "holder-continuity[beta=1]"));
  reports.push_back(check_scalar_power_bound({0.05, 0.1, 0.5, 1.0}, quick ? 2000 : 20000,
                                             1e-9, root.split(7)));

  {
    NoiseModel noise;
    noise.sigma = 1.0;
    const Problem prob = quadratic(16, 10.0, noise);
    const std::int64_t seeds = quick ? 100 : 400;
    for (double gamma : {0.85, 0.9, 0.95}) {
      reports.push_back(check_momentum_bound(prob, gamma, 300, seeds, seed + 11));
    }
  }
  reports.push_back(check_descent_inequality(quadratic(32, 50.0), 0.9, 0.1, 0.05, 500));

  reports.push_back(check_gradient_audit(quadratic(64, 100.0), 10, seed + 21));
  reports.push_back(check_gradient_audit(rosenbrock(8), 10, seed + 22));
  reports.push_back(check_gradient_audit(logistic_synthetic(32, 256, seed + 1), 10, seed + 23));
  reports.push_back(check_gradient_audit(tiny_mlp(6, 8, 2, 64, seed + 2), 10, seed + 24));

  reports.push_back(check_smoothness_probe(quadratic(64, 100.0), 200, seed + 31));
  reports.push_back(check_smoothness_probe(logistic_synthetic(32, 256, seed + 1), 200, seed + 32));
  return reports;
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.pass; });
}

}  // namespace powerstep
