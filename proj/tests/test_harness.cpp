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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "powerstep/harness.hpp"

using namespace powerstep;

namespace {

const char* kBaseConfig = R"(
# quadratic benchmark run
[problem]
name = quadratic
dim = 16
condition = 100
noise = gaussian
sigma = 0.5

[optimizer]
name = powerstep
gamma = 0.9
beta = 0.1
weight_decay = 0.0
clip_norm = 1.0

[schedule]
kind = warmup_cosine
eta_max = 0.05
eta_min = 0.005
warmup_steps = 20

[run]
steps = 200
seed = 42
mode = fp
log_every = 10
)";

}  // namespace

TEST_CASE("config parses with comments and defaults") {
  const RunConfig cfg = parse_config_text(kBaseConfig);
  CHECK(cfg.problem.name == "quadratic");
  CHECK(cfg.problem.dim == 16);
  CHECK(cfg.problem.sigma == 0.5);
  CHECK(cfg.optimizer.gamma == 0.9);
  CHECK(cfg.schedule.warmup_steps == 20);
  CHECK(cfg.total_steps == 200);
  CHECK(cfg.seed == 42);
  CHECK(cfg.block_size == 128);  // default
}

TEST_CASE("config rejections name the offending field") {
  const auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config_text(text);
      FAIL("expected a config error for: " << needle);
    } catch (const ConfigError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  std::string base(kBaseConfig);
  expect_error(base + "\n[problem]\nname = quadratic\n", "duplicate");
  expect_error(base + "\nbogus_key = 1\n", "bogus_key");
  expect_error(base + "\n[made_up]\nx = 1\n", "made_up");
  expect_error("[problem]\nname = quadratic\n", "missing required section");

  std::string zero_steps(kBaseConfig);
  zero_steps.replace(zero_steps.find("steps = 200"), 11, "steps = 0  ");
  expect_error(zero_steps, "run.steps");

  std::string bad_opt(kBaseConfig);
  bad_opt.replace(bad_opt.find("name = powerstep"), 16, "name = sgdmagic!");
  expect_error(bad_opt, "optimizer.name");

  std::string bad_real(kBaseConfig);
  bad_real.replace(bad_real.find("gamma = 0.9"), 11, "gamma = oui");
  expect_error(bad_real, "optimizer.gamma");

  std::string q8_pbsgdm(kBaseConfig);
  q8_pbsgdm.replace(q8_pbsgdm.find("name = powerstep"), 16, "name = pbsgdm   ");
  q8_pbsgdm.replace(q8_pbsgdm.find("mode = fp"), 9, "mode = q8");
  expect_error(q8_pbsgdm, "pbsgdm");

  // adamw section must not accept momentum-family keys
  std::string adamw_gamma(kBaseConfig);
  adamw_gamma.replace(adamw_gamma.find("name = powerstep"), 16, "name = adamw    ");
  expect_error(adamw_gamma, "beta");
}

TEST_CASE("canonical text round-trips through the parser") {
  const RunConfig cfg = parse_config_text(kBaseConfig);
  const std::string canon = canonical_config_text(cfg);
  const RunConfig reparsed = parse_config_text(canon);
  CHECK(canonical_config_text(reparsed) == canon);
  CHECK(config_hash(reparsed) == config_hash(cfg));
}

TEST_CASE("identical config and seed give byte-identical CSV output") {
  const RunConfig cfg = parse_config_text(kBaseConfig);
  const Trajectory a = run(cfg);
  const Trajectory b = run(cfg);
  CHECK(trajectory_csv(a) == trajectory_csv(b));
  CHECK_FALSE(a.diverged);

  RunConfig q8 = cfg;
  q8.mode = "q8";
  CHECK(trajectory_csv(run(q8)) == trajectory_csv(run(q8)));
}

TEST_CASE("different seeds change the trajectory") {
  RunConfig cfg = parse_config_text(kBaseConfig);
  const Trajectory a = run(cfg);
  cfg.seed = 43;
  const Trajectory b = run(cfg);
  CHECK(trajectory_csv(a) != trajectory_csv(b));
}

TEST_CASE("trajectory rows are well-formed") {
  RunConfig cfg = parse_config_text(kBaseConfig);
  const Trajectory traj = run(cfg);
  REQUIRE(!traj.points.empty());
  CHECK(traj.points.front().lr == 0.0);  // first update uses the step-0 rate (warmup from zero)
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    CHECK(traj.points[i].step < traj.points[i + 1].step);
  }
  for (const TrajectoryPoint& p : traj.points) {
    CHECK(std::isfinite(p.loss));
    CHECK(p.event.empty());
    CHECK(traj.min_grad_norm_sq <= p.grad_norm_2 * p.grad_norm_2 + 1e-12);
  }
  CHECK(traj.points.back().step == cfg.total_steps - 1);
  CHECK(traj.steps_completed == cfg.total_steps);
}

TEST_CASE("powerstep drives the quadratic gradient down by two orders of magnitude") {
  RunConfig cfg;
  cfg.problem.name = "quadratic";
  cfg.problem.dim = 64;
  cfg.problem.condition = 1000.0;
  cfg.problem.noise = "none";
  cfg.optimizer.name = "powerstep";
  cfg.optimizer.clip_norm = 0.0;
  cfg.schedule.kind = "warmup_cosine";
  cfg.schedule.eta_max = 0.05;
  cfg.schedule.eta_min = 0.005;
  cfg.schedule.warmup_steps = 100;
  cfg.total_steps = 2000;
  cfg.seed = 7;
  const Trajectory traj = run(cfg);
  REQUIRE_FALSE(traj.diverged);
  const double initial = traj.points.front().grad_norm_2;
  CHECK(std::sqrt(traj.min_grad_norm_sq) * 100.0 <= initial);
}

TEST_CASE("divergence is recorded as a flagged final row, not thrown") {
  RunConfig cfg;
  cfg.problem.name = "rosenbrock";
  cfg.problem.dim = 8;
  cfg.optimizer.name = "powerstep";
  cfg.optimizer.beta = 1.0;  // heavy ball with a huge rate blows up
  cfg.optimizer.clip_norm = 0.0;
  cfg.schedule.kind = "inv_sqrt";
  cfg.schedule.eta = 10.0;
  cfg.total_steps = 200;
  cfg.seed = 5;
  const Trajectory traj = run(cfg);
  CHECK(traj.diverged);
  CHECK(traj.diverged_step >= 0);
  REQUIRE(!traj.points.empty());
  CHECK(traj.points.back().event == "diverged");
  CHECK(traj.steps_completed < cfg.total_steps);
}

TEST_CASE("run outputs include a manifest with the config hash") {
  const RunConfig cfg = parse_config_text(kBaseConfig);
  const Trajectory traj = run(cfg);
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "powerstep_test_out";
  std::filesystem::remove_all(dir);
  write_run_outputs(cfg, traj, dir / "run.csv");
  REQUIRE(std::filesystem::exists(dir / "run.csv"));
  REQUIRE(std::filesystem::exists(dir / "run.manifest.json"));
  std::ifstream in(dir / "run.manifest.json");
  nlohmann::json manifest;
  in >> manifest;
  CHECK(manifest["config_hash"] == config_hash_hex(cfg));
  CHECK(manifest["seed"] == cfg.seed);
  CHECK(manifest["code_version"] == kCodeVersion);
  CHECK_FALSE(manifest["diverged"].get<bool>());
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep runs one arm per value and isolates failures") {
  const RunConfig base = parse_config_text(kBaseConfig);
  const SweepResult result = sweep(base, "optimizer.beta", {"0", "0.1", "0.2"});
  REQUIRE(result.arms.size() == 3);
  for (const SweepArm& arm : result.arms) {
    CHECK(arm.error.empty());
    CHECK_FALSE(arm.trajectory.points.empty());
  }
  CHECK(result.arms[0].config.optimizer.beta == 0.0);
  CHECK(result.arms[2].config.optimizer.beta == 0.2);
  CHECK_THROWS_AS(sweep(base, "optimizer.beta", {}), ConfigError);
  CHECK_THROWS_AS(sweep(base, "optimizer.nonsense", {"1"}), ConfigError);
}

TEST_CASE("sweep arms differ only in the swept key") {
  const RunConfig base = parse_config_text(kBaseConfig);
  const SweepResult result = sweep(base, "gamma", {"0.85", "0.95"});
  std::string a = canonical_config_text(result.arms[0].config);
  std::string b = canonical_config_text(result.arms[1].config);
  // normalize the one swept line away; everything else must match
  const auto drop_gamma = [](std::string s) {
    const auto pos = s.find("gamma = ");
    const auto end = s.find('\n', pos);
    return s.erase(pos, end - pos);
  };
  CHECK(a != b);
  CHECK(drop_gamma(a) == drop_gamma(b));
}

TEST_CASE("a diverging arm does not abort its siblings") {
  RunConfig base = parse_config_text(kBaseConfig);
  base.problem.noise = "none";
  base.problem.sigma = 0.0;
  base.optimizer.beta = 1.0;  // heavy ball; eta * lambda_max >> 2 must blow up
  base.optimizer.clip_norm = 0.0;
  base.schedule.kind = "inv_sqrt";
  const SweepResult result = sweep(base, "schedule.eta", {"0.0001", "50"});
  REQUIRE(result.arms.size() == 2);
  CHECK_FALSE(result.arms[0].trajectory.diverged);
  CHECK(result.arms[1].trajectory.diverged);
  CHECK(result.arms[0].trajectory.steps_completed == base.total_steps);
}

TEST_CASE("log-log slope recovers exact power laws") {
  std::vector<double> xs{100, 1000, 10000, 100000};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.7 / std::sqrt(x));
  CHECK(loglog_slope(xs, ys) == Catch::Approx(-0.5).margin(1e-12));
  std::vector<double> flat(xs.size(), 2.5);
  CHECK(loglog_slope(xs, flat) == Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("rate fit on a small grid lands near the expected decay") {
  ProblemSpec problem;
  problem.name = "quadratic";
  problem.dim = 16;
  problem.condition = 10.0;
  problem.noise = "gaussian";
  problem.sigma = 1.0;
  OptimizerSpec optimizer;
  optimizer.weight_decay = 0.0;
  optimizer.clip_norm = 0.0;
  const RateFitResult r = fit_rate(problem, optimizer, 0.15, {100, 1000, 10000}, 4, 99);
  CHECK(r.horizons.size() == 3);
  CHECK(r.avg_min_grad_sq[0] > r.avg_min_grad_sq[2]);
  CHECK(r.slope < -0.1);
  CHECK(r.slope > -1.2);
  CHECK_THROWS_AS(fit_rate(problem, optimizer, 0.1, {}, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(problem, optimizer, 0.1, {100, 100}, 2, 1), std::invalid_argument);
}

TEST_CASE("the mixed-magnitude probe makes naive int8 adamw explode") {
  const ExplosionProbeResult probe = adamw_q8_explosion_probe();
  INFO(probe.max_update_ratio);
  CHECK(probe.exceeded);
  CHECK(probe.first_exceed_step >= 0);
  CHECK(probe.first_exceed_step < 50);
  CHECK(probe.max_update_ratio > 1e3);
}
