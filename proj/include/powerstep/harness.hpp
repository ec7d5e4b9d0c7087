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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "powerstep/config.hpp"
#include "powerstep/oracle.hpp"
#include "powerstep/optim.hpp"
#include "powerstep/problems.hpp"
#include "powerstep/quantize.hpp"
#include "powerstep/schedule.hpp"

namespace powerstep {

inline constexpr const char* kCodeVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TrajectoryPoint {
  std::int64_t step = 0;
  double loss = 0.0;
  double grad_norm_2 = 0.0;  // Euclidean norm of the exact gradient at theta_{t-1}
  double lr = 0.0;
  double update_norm = 0.0;  // ||theta_t - theta_{t-1}||_2
  double m_absmax = 0.0;
  double quant_max_abs_err = 0.0;  // 0 for full-precision runs
  std::string event;               // "" or "diverged"
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  bool diverged = false;
  std::int64_t diverged_step = -1;
  std::int64_t steps_completed = 0;
  double initial_loss = std::numeric_limits<double>::quiet_NaN();
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double min_grad_norm_sq = std::numeric_limits<double>::infinity();
};

namespace harness_detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One optimizer instance bound to a run, hiding the fp/q8 distinction.
class OptimizerEngine {
 public:
  OptimizerEngine(const OptimizerSpec& spec, const std::string& mode, std::size_t dim,
                  std::int64_t block_size)
      : name_(spec.name), quantized_(mode == "q8") {
    if (name_ == "adamw") {
      adamw_ = to_adamw_config(spec);
    } else {
      power_ = to_powerstep_config(spec);
    }
    if (quantized_) {
      if (name_ == "adamw") {
        q_adamw_ = QuantizedAdamWState::zeros(dim, block_size);
      } else if (name_ == "powerstep" || name_ == "signsgdm") {
        q_power_ = QuantizedPowerStepState::zeros(dim, block_size);
      } else {
        throw ConfigError("run.mode: q8 is not supported for optimizer '" + name_ + "'");
      }
    } else {
      state_ = OptimizerState::zeros(dim, name_ == "adamw");
    }
  }

  struct StepDiag {
    double m_absmax = 0.0;
    double quant_max_abs_err = 0.0;
  };

  StepDiag step(Vec& theta, const Vec& grad, double lr) {
    StepDiag diag;
    if (quantized_) {
      QuantStepInfo info;
      if (name_ == "adamw") {
        info = adamw_update_q8(theta, grad, q_adamw_, adamw_, lr);
      } else {
        info = powerstep_update_q8(theta, grad, q_power_, power_, lr);
      }
      diag.m_absmax = info.buffer_absmax;
      diag.quant_max_abs_err = info.max_abs_error;
      return diag;
    }
    if (name_ == "adamw") {
      adamw_update(theta, grad, state_, adamw_, lr);
    } else if (name_ == "pbsgdm") {
      pbsgdm_update(theta, grad, state_, power_, lr);
    } else {
      powerstep_update(theta, grad, state_, power_, lr);
    }
    diag.m_absmax = absmax(state_.m);
    return diag;
  }

 private:
  std::string name_;
  bool quantized_;
  PowerStepConfig power_;
  AdamWConfig adamw_;
  OptimizerState state_;
  QuantizedPowerStepState q_power_;
  QuantizedAdamWState q_adamw_;
};

inline double lr_at(const RunConfig& cfg, std::int64_t step) {
  if (cfg.schedule.kind == "inv_sqrt") return inv_sqrt_lr(cfg.schedule.eta, step);
  Schedule s{cfg.schedule.eta_max, cfg.schedule.eta_min, cfg.schedule.warmup_steps,
             cfg.total_steps};
  return schedule_lr(s, step);
}

// Fixed-size pool over [0, n); results must be written by index.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::int64_t workers = std::min<std::int64_t>(n, static_cast<std::int64_t>(hw));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace harness_detail

// ---------------------------------------------------------------------------
// Single run
// ---------------------------------------------------------------------------

/// Executes one configured run. Deterministic given (config, seed). A
/// divergence (non-finite loss, loss above 1e6 x initial, or a rejected
/// update) is recorded as a flagged final row, not thrown.
inline Trajectory run(const RunConfig& cfg) {
  cfg.validate();
  const Problem problem = build_problem(cfg.problem);
  SplitRng rng(cfg.seed);
  SplitRng grad_rng = rng.split(1);

  Vec theta = problem.theta0;
  harness_detail::OptimizerEngine engine(cfg.optimizer, cfg.mode, theta.size(), cfg.block_size);

  Trajectory traj;
  traj.initial_loss = problem.eval_loss(theta);
  const double blowup_threshold =
      traj.initial_loss > 0.0 ? 1e6 * traj.initial_loss : 1e6;

  double loss = traj.initial_loss;
  Vec theta_prev;
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    const Vec true_grad = problem.eval_grad(theta);
    const double grad_sq = l2_norm_sq(true_grad);
    if (std::isfinite(grad_sq)) {
      traj.min_grad_norm_sq = std::min(traj.min_grad_norm_sq, grad_sq);
    }
    const double lr = harness_detail::lr_at(cfg, t);
    theta_prev = theta;

    harness_detail::OptimizerEngine::StepDiag diag;
    std::string event;
    bool update_ok = true;
    try {
      const Vec g = problem.sample_grad(theta, grad_rng);
      diag = engine.step(theta, g, lr);
    } catch (const std::invalid_argument&) {
      // non-finite gradient or state; record the step index and stop
      update_ok = false;
    }

    loss = problem.eval_loss(theta);
    double update_norm = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double d = theta[i] - theta_prev[i];
      update_norm += d * d;
    }
    update_norm = std::sqrt(update_norm);

    const bool diverged = !update_ok || !std::isfinite(loss) || loss > blowup_threshold ||
                          !all_finite(theta);
    const bool log_step = (t % cfg.log_every == 0) || t == cfg.total_steps - 1 || diverged;
    if (log_step) {
      TrajectoryPoint p;
      p.step = t;
      p.loss = loss;
      p.grad_norm_2 = std::sqrt(grad_sq);
      p.lr = lr;
      p.update_norm = update_norm;
      p.m_absmax = diag.m_absmax;
      p.quant_max_abs_err = diag.quant_max_abs_err;
      if (diverged) p.event = "diverged";
      traj.points.push_back(std::move(p));
    }
    traj.steps_completed = t + 1;
    if (diverged) {
      traj.diverged = true;
      traj.diverged_step = t;
      break;
    }
  }
  traj.final_loss = loss;
  return traj;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  using harness_detail::fmt;
  std::string out = "step,loss,grad_norm_2,lr,update_norm,m_absmax,quant_max_abs_err,event\n";
  for (const TrajectoryPoint& p : traj.points) {
    out += std::to_string(p.step);
    out += ',';
    out += fmt(p.loss);
    out += ',';
    out += fmt(p.grad_norm_2);
    out += ',';
    out += fmt(p.lr);
    out += ',';
    out += fmt(p.update_norm);
    out += ',';
    out += fmt(p.m_absmax);
    out += ',';
    out += fmt(p.quant_max_abs_err);
    out += ',';
    out += p.event;
    out += '\n';
  }
  return out;
}

inline std::string config_hash_hex(const RunConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

/// Writes the CSV and a manifest (config hash, seed, code version) next to it.
inline void write_run_outputs(const RunConfig& cfg, const Trajectory& traj,
                              const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) {
    std::filesystem::create_directories(csv_path.parent_path());
  }
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + csv_path.string() + "' for writing");
    out << trajectory_csv(traj);
  }
  nlohmann::json manifest{
      {"code_version", kCodeVersion},
      {"config_hash", config_hash_hex(cfg)},
      {"seed", cfg.seed},
      {"csv", csv_path.filename().string()},
      {"rows", traj.points.size()},
      {"steps_completed", traj.steps_completed},
      {"diverged", traj.diverged},
      {"final_loss", traj.final_loss},
      {"min_grad_norm_sq", traj.min_grad_norm_sq},
  };
  std::filesystem::path manifest_path = csv_path;
  manifest_path.replace_extension(".manifest.json");
  std::ofstream mout(manifest_path, std::ios::binary);
  mout << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepArm {
  std::string value;
  RunConfig config;
  Trajectory trajectory;
  std::string error;  // non-empty if the arm failed outright (not divergence)
};

struct SweepResult {
  std::string axis;
  std::vector<SweepArm> arms;
};

/// One run per axis value, all sharing the base seed. Arms execute on a
/// work queue; a divergence or failure in one arm never aborts siblings.
inline SweepResult sweep(const RunConfig& base, const std::string& axis,
                         const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep: the value list must not be empty");
  SweepResult result;
  result.axis = axis;
  result.arms.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    result.arms[i].value = values[i];
    result.arms[i].config = base;
    set_config_field(result.arms[i].config, axis, values[i]);  // validates; throws early
  }
  harness_detail::parallel_for(static_cast<std::int64_t>(values.size()), [&](std::int64_t i) {
    SweepArm& arm = result.arms[static_cast<std::size_t>(i)];
    try {
      arm.trajectory = run(arm.config);
    } catch (const std::exception& e) {
      arm.error = e.what();
    }
  });
  return result;
}

inline std::string sweep_summary(const SweepResult& result) {
  std::ostringstream os;
  os << "axis: " << result.axis << "\n";
  os << "value,final_loss,min_grad_norm_sq,diverged\n";
  for (const SweepArm& arm : result.arms) {
    if (!arm.error.empty()) {
      os << arm.value << ",error,error," << arm.error << "\n";
      continue;
    }
    os << arm.value << "," << harness_detail::fmt(arm.trajectory.final_loss) << ","
       << harness_detail::fmt(arm.trajectory.min_grad_norm_sq) << ","
       << (arm.trajectory.diverged ? "true" : "false") << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Convergence-rate fit
// ---------------------------------------------------------------------------

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two matching points");
  }
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("loglog_slope: points must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

struct RateFitResult {
  std::vector<std::int64_t> horizons;
  std::vector<double> avg_min_grad_sq;  // averaged over seeds, per horizon
  double slope = 0.0;
  std::int64_t seeds = 0;
  double max_grad_norm = 0.0;  // largest ||grad f|| seen across all trajectories
};

/// Runs signed-power momentum with the lr/sqrt(t) schedule to the largest
/// horizon, tracking the running minimum of the exact squared gradient norm
/// online, and fits the decay exponent of the seed-averaged minimum against
/// the horizon. Horizons share trajectories: the schedule does not depend on
/// the horizon, so prefixes coincide.
inline RateFitResult fit_rate(const ProblemSpec& problem_spec, const OptimizerSpec& optimizer_spec,
                              double eta, std::vector<std::int64_t> horizons,
                              std::int64_t n_seeds, std::uint64_t seed0) {
  if (horizons.empty()) throw std::invalid_argument("fit_rate: need at least one horizon");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1 || (i > 0 && horizons[i] <= horizons[i - 1])) {
      throw std::invalid_argument("fit_rate: horizons must be positive and strictly increasing");
    }
  }
  if (n_seeds < 1) throw std::invalid_argument("fit_rate: need at least one seed");
  if (optimizer_spec.name == "adamw") {
    throw std::invalid_argument("fit_rate: rate experiment is defined for momentum optimizers");
  }

  const std::int64_t t_max = horizons.back();
  std::vector<std::vector<double>> per_seed(static_cast<std::size_t>(n_seeds));
  std::vector<double> per_seed_grad_max(static_cast<std::size_t>(n_seeds), 0.0);
  harness_detail::parallel_for(n_seeds, [&](std::int64_t s) {
    const Problem problem = build_problem(problem_spec);
    SplitRng rng = SplitRng(seed0).split(static_cast<std::uint64_t>(s));
    Vec theta = problem.theta0;
    OptimizerState state = OptimizerState::zeros(theta.size());
    const PowerStepConfig cfg = to_powerstep_config(optimizer_spec);
    double running_min = std::numeric_limits<double>::infinity();
    double grad_max = 0.0;
    std::vector<double> at_horizon;
    std::size_t next_h = 0;
    for (std::int64_t t = 0; t < t_max; ++t) {
      const double grad_sq = l2_norm_sq(problem.eval_grad(theta));
      running_min = std::min(running_min, grad_sq);
      grad_max = std::max(grad_max, grad_sq);
      const Vec g = problem.sample_grad(theta, rng);
      if (optimizer_spec.name == "pbsgdm") {
        pbsgdm_update(theta, g, state, cfg, inv_sqrt_lr(eta, t));
      } else {
        powerstep_update(theta, g, state, cfg, inv_sqrt_lr(eta, t));
      }
      if (next_h < horizons.size() && t + 1 == horizons[next_h]) {
        at_horizon.push_back(running_min);
        ++next_h;
      }
    }
    per_seed[static_cast<std::size_t>(s)] = std::move(at_horizon);
    per_seed_grad_max[static_cast<std::size_t>(s)] = std::sqrt(grad_max);
  });

  RateFitResult result;
  result.horizons = horizons;
  result.seeds = n_seeds;
  result.avg_min_grad_sq.assign(horizons.size(), 0.0);
  for (const auto& row : per_seed) {
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      result.avg_min_grad_sq[k] += row[k] / static_cast<double>(n_seeds);
    }
  }
  for (double g : per_seed_grad_max) result.max_grad_norm = std::max(result.max_grad_norm, g);
  std::vector<double> xs(horizons.begin(), horizons.end());
  result.slope = loglog_slope(xs, result.avg_min_grad_sq);
  return result;
}

// ---------------------------------------------------------------------------
// Quantization robustness demonstration
// ---------------------------------------------------------------------------

/// Side-by-side fp32 vs int8 AdamW on a scripted gradient stream built so
/// one quantization block carries both an O(1) and an O(1e-4) second-moment
/// coordinate: the small v quantizes to zero while its m survives, and the
/// q8 update explodes relative to the fp32 one.
struct ExplosionProbeResult {
  double max_update_ratio = 0.0;
  std::int64_t first_exceed_step = -1;  // first step with ratio > 1e3
  bool exceeded = false;
};

inline ExplosionProbeResult adamw_q8_explosion_probe(std::int64_t steps = 50,
                                                     std::int64_t block_size = 128) {
  AdamWConfig cfg;  // defaults: beta1 0.9, beta2 0.95, eps 1e-8, bias correction on
  const double lr = 1e-3;
  const std::size_t dim = 2;

  Vec theta_fp(dim, 0.0), theta_q8(dim, 0.0);
  OptimizerState fp = OptimizerState::zeros(dim, true);
  QuantizedAdamWState q8 = QuantizedAdamWState::zeros(dim, block_size);

  ExplosionProbeResult result;
  for (std::int64_t t = 0; t < steps; ++t) {
    Vec g(dim);
    g[0] = (t % 2 == 0) ? 1.0 : -1.0;  // large alternating: big v, small m
    g[1] = 1e-2;                       // small steady: tiny v, representable m
    const Vec fp_prev = theta_fp;
    const Vec q8_prev = theta_q8;
    adamw_update(theta_fp, g, fp, cfg, lr);
    adamw_update_q8(theta_q8, g, q8, cfg, lr);
    for (std::size_t i = 0; i < dim; ++i) {
      const double du_fp = std::abs(theta_fp[i] - fp_prev[i]);
      const double du_q8 = std::abs(theta_q8[i] - q8_prev[i]);
      if (du_fp > 0.0) {
        const double ratio = du_q8 / du_fp;
        result.max_update_ratio = std::max(result.max_update_ratio, ratio);
        if (ratio > 1e3 && !result.exceeded) {
          result.exceeded = true;
          result.first_exceed_step = t;
        }
      }
    }
  }
  return result;
}

struct QuantDemoArm {
  std::string name;
  RunConfig config;
  Trajectory trajectory;
};

struct QuantDemoReport {
  std::vector<QuantDemoArm> arms;  // adamw-fp, adamw-q8, powerstep-fp, powerstep-q8
  double powerstep_loss_ratio = 0.0;  // q8 final loss / fp final loss
  bool powerstep_parity = false;      // ratio within [0.9, 1.1]
  bool adamw_fp_flagged = false;
  bool adamw_q8_flagged = false;  // diverged or >10x the fp arm's final loss
  ExplosionProbeResult probe;
  std::int64_t state_bytes_powerstep_q8 = 0;
  std::int64_t state_bytes_adamw_fp32 = 0;
  double memory_ratio = 0.0;
};

/// Paired runs of AdamW and signed-power momentum, full precision and int8,
/// on the same stochastic logistic problem and seed, plus the constructed
/// mixed-magnitude probe and the state-size arithmetic.
inline QuantDemoReport quantdemo(std::uint64_t seed, double eta_max = 0.5) {
  RunConfig base;
  base.problem.name = "logistic";
  base.problem.dim = 512;
  base.problem.n_samples = 2048;
  base.problem.batch = 32;
  base.problem.data_seed = 7;
  base.schedule.kind = "warmup_cosine";
  base.schedule.eta_max = eta_max;
  base.schedule.eta_min = 0.1 * eta_max;
  base.schedule.warmup_steps = 200;
  base.total_steps = 2000;
  base.seed = seed;
  base.log_every = 20;
  base.block_size = 128;
  base.optimizer.weight_decay = 0.1;
  base.optimizer.clip_norm = 1.0;

  QuantDemoReport report;
  const std::vector<std::pair<std::string, std::string>> arm_specs{
      {"adamw", "fp"}, {"adamw", "q8"}, {"powerstep", "fp"}, {"powerstep", "q8"}};
  report.arms.resize(arm_specs.size());
  for (std::size_t i = 0; i < arm_specs.size(); ++i) {
    RunConfig cfg = base;
    cfg.optimizer.name = arm_specs[i].first;
    cfg.mode = arm_specs[i].second;
    report.arms[i].name = arm_specs[i].first + "-" + arm_specs[i].second;
    report.arms[i].config = cfg;
  }
  harness_detail::parallel_for(static_cast<std::int64_t>(report.arms.size()),
                               [&](std::int64_t i) {
                                 auto& arm = report.arms[static_cast<std::size_t>(i)];
                                 arm.trajectory = run(arm.config);
                               });

  const Trajectory& adamw_fp = report.arms[0].trajectory;
  const Trajectory& adamw_q8 = report.arms[1].trajectory;
  const Trajectory& power_fp = report.arms[2].trajectory;
  const Trajectory& power_q8 = report.arms[3].trajectory;

  report.powerstep_loss_ratio = power_q8.final_loss / power_fp.final_loss;
  report.powerstep_parity =
      std::isfinite(report.powerstep_loss_ratio) && report.powerstep_loss_ratio >= 0.9 &&
      report.powerstep_loss_ratio <= 1.1 && !power_q8.diverged && !power_fp.diverged;
  report.adamw_fp_flagged = adamw_fp.diverged;
  report.adamw_q8_flagged = adamw_q8.diverged || !(adamw_q8.final_loss <= 10.0 * adamw_fp.final_loss);
  report.probe = adamw_q8_explosion_probe();
  report.state_bytes_powerstep_q8 =
      optimizer_state_bytes("powerstep", "q8", base.problem.dim, base.block_size);
  report.state_bytes_adamw_fp32 = optimizer_state_bytes("adamw", "fp", base.problem.dim);
  report.memory_ratio = static_cast<double>(report.state_bytes_adamw_fp32) /
                        static_cast<double>(report.state_bytes_powerstep_q8);
  return report;
}

inline nlohmann::json quantdemo_to_json(const QuantDemoReport& report) {
  nlohmann::json arms = nlohmann::json::array();
  for (const QuantDemoArm& arm : report.arms) {
    arms.push_back({{"name", arm.name},
                    {"final_loss", arm.trajectory.final_loss},
                    {"diverged", arm.trajectory.diverged},
                    {"steps_completed", arm.trajectory.steps_completed},
                    {"config_hash", config_hash_hex(arm.config)}});
  }
  return nlohmann::json{
      {"arms", arms},
      {"powerstep_loss_ratio", report.powerstep_loss_ratio},
      {"powerstep_parity", report.powerstep_parity},
      {"adamw_fp_flagged", report.adamw_fp_flagged},
      {"adamw_q8_flagged", report.adamw_q8_flagged},
      {"probe",
       {{"max_update_ratio", report.probe.max_update_ratio},
        {"first_exceed_step", report.probe.first_exceed_step},
        {"exceeded", report.probe.exceeded}}},
      {"memory",
       {{"powerstep_q8_bytes", report.state_bytes_powerstep_q8},
        {"adamw_fp32_bytes", report.state_bytes_adamw_fp32},
        {"ratio", report.memory_ratio}}},
  };
}

inline void write_quantdemo_outputs(const QuantDemoReport& report,
                                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const QuantDemoArm& arm : report.arms) {
    write_run_outputs(arm.config, arm.trajectory, out_dir / (arm.name + ".csv"));
  }
  std::ofstream out(out_dir / "report.json", std::ios::binary);
  out << quantdemo_to_json(report).dump(2) << "\n";
}

inline nlohmann::json reports_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckReport& r : reports) {
    arr.push_back({{"id", r.id},
                   {"samples", r.samples},
                   {"max_violation", r.max_violation},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass},
                   {"detail", r.detail}});
  }
  return arr;
}

}  // namespace powerstep
