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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "powerstep/harness.hpp"
#include "powerstep/oracle.hpp"

namespace {

using namespace powerstep;

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    const std::string trimmed = config_detail::trim(item);
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_path, bool quiet) {
  const RunConfig cfg = parse_config_file(config_path);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = run(cfg);
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::filesystem::path csv =
      out_path.empty() ? std::filesystem::path("runs") / (config_hash_hex(cfg) + ".csv")
                       : std::filesystem::path(out_path);
  write_run_outputs(cfg, traj, csv);
  if (!quiet) {
    std::printf("run: %s seed=%llu steps=%lld -> %s\n", cfg.optimizer.name.c_str(),
                static_cast<unsigned long long>(cfg.seed),
                static_cast<long long>(traj.steps_completed), csv.string().c_str());
    std::printf("final_loss=%.17g min_grad_norm_sq=%.17g diverged=%s wall=%.2fs\n",
                traj.final_loss, traj.min_grad_norm_sq, traj.diverged ? "true" : "false",
                elapsed);
  }
  return traj.diverged ? 3 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_csv, const std::string& out_dir) {
  const RunConfig base = parse_config_file(config_path);
  const std::vector<std::string> values = split_csv(values_csv);
  const SweepResult result = sweep(base, axis, values);
  std::cout << sweep_summary(result);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json index = nlohmann::json::array();
    for (const SweepArm& arm : result.arms) {
      const std::string stem = axis + "_" + arm.value;
      if (arm.error.empty()) {
        write_run_outputs(arm.config, arm.trajectory, std::filesystem::path(out_dir) / (stem + ".csv"));
      }
      index.push_back({{"value", arm.value},
                       {"csv", stem + ".csv"},
                       {"error", arm.error},
                       {"config_hash", config_hash_hex(arm.config)}});
    }
    std::ofstream out(std::filesystem::path(out_dir) / "sweep_index.json", std::ios::binary);
    out << index.dump(2) << "\n";
  }
  for (const SweepArm& arm : result.arms) {
    if (!arm.error.empty()) return 2;
  }
  return 0;
}

int cmd_verify(const std::string& report_path, std::uint64_t seed, bool quick) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CheckReport> reports = verify_suite(seed, quick);
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const CheckReport& r : reports) {
    std::printf("[%s] %-40s samples=%-8lld max_violation=%-12.3e tolerance=%.1e%s%s\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), static_cast<long long>(r.samples),
                r.max_violation, r.tolerance, r.detail.empty() ? "" : "  ",
                r.detail.c_str());
  }
  std::printf("verify: %zu checks in %.2fs\n", reports.size(), elapsed);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    out << reports_to_json(reports).dump(2) << "\n";
  }
  return all_pass(reports) ? 0 : 1;
}

int cmd_quantdemo(const std::string& out_dir, std::uint64_t seed) {
  const QuantDemoReport report = quantdemo(seed);
  write_quantdemo_outputs(report, out_dir);
  std::cout << quantdemo_to_json(report).dump(2) << "\n";
  std::printf("quantdemo: wrote %s\n", out_dir.c_str());
  const bool ok = report.powerstep_parity && report.adamw_q8_flagged && !report.adamw_fp_flagged;
  return ok ? 0 : 1;
}

int cmd_rate(const std::string& problem_name, std::int64_t dim, double condition, double sigma,
             const std::string& horizons_csv, std::int64_t seeds, double eta,
             const std::string& out_path) {
  ProblemSpec problem;
  problem.name = problem_name;
  problem.dim = dim;
  problem.condition = condition;
  problem.noise = sigma > 0.0 ? "gaussian" : "none";
  problem.sigma = sigma;

  std::vector<std::int64_t> horizons;
  for (const std::string& h : split_csv(horizons_csv)) {
    horizons.push_back(config_detail::to_i64(h, "horizons"));
  }
  OptimizerSpec optimizer;  // powerstep defaults: gamma 0.9, beta 0.1
  optimizer.weight_decay = 0.0;
  optimizer.clip_norm = 0.0;

  const RateFitResult result = fit_rate(problem, optimizer, eta, horizons, seeds, 1234);
  std::printf("horizon,avg_min_grad_norm_sq\n");
  for (std::size_t k = 0; k < result.horizons.size(); ++k) {
    std::printf("%lld,%.17g\n", static_cast<long long>(result.horizons[k]),
                result.avg_min_grad_sq[k]);
  }
  std::printf("slope=%.6f seeds=%lld eta=%g max_grad_norm=%.6g\n", result.slope,
              static_cast<long long>(result.seeds), eta, result.max_grad_norm);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << "horizon,avg_min_grad_norm_sq\n";
    for (std::size_t k = 0; k < result.horizons.size(); ++k) {
      out << result.horizons[k] << "," << harness_detail::fmt(result.avg_min_grad_sq[k]) << "\n";
    }
    out << "# slope = " << result.slope << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signed-power momentum optimizer benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, out_dir, axis, values_csv, report_path;
  std::string problem_name = "quadratic", horizons_csv = "100,1000,10000,100000";
  std::uint64_t seed = 2024;
  std::int64_t dim = 64, rate_seeds = 10;
  double condition = 10.0, sigma = 1.0, eta = 0.15;
  bool quiet = false, quick = false;

  CLI::App* run_cmd = app.add_subcommand("run", "execute one configured run");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--out", out_path, "output CSV path");
  run_cmd->add_flag("--quiet", quiet, "suppress status lines");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one config across axis values");
  sweep_cmd->add_option("--config", config_path, "config file")->required();
  sweep_cmd->add_option("--axis", axis, "field to vary, e.g. optimizer.beta")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "directory for per-run CSVs");

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  verify_cmd->add_option("--report", report_path, "write the machine-readable report here");
  verify_cmd->add_option("--seed", seed, "base seed");
  verify_cmd->add_flag("--quick", quick, "reduced sample counts");

  CLI::App* quant_cmd = app.add_subcommand("quantdemo", "quantization robustness demonstration");
  quant_cmd->add_option("--out", out_dir, "output directory")->required();
  quant_cmd->add_option("--seed", seed, "run seed");

  CLI::App* rate_cmd = app.add_subcommand("rate", "convergence-rate fit");
  rate_cmd->add_option("--problem", problem_name, "problem name (default quadratic)");
  rate_cmd->add_option("--dim", dim, "problem dimension");
  rate_cmd->add_option("--condition", condition, "quadratic condition number");
  rate_cmd->add_option("--sigma", sigma, "gradient noise level");
  rate_cmd->add_option("--horizons", horizons_csv, "comma-separated horizons");
  rate_cmd->add_option("--seeds", rate_seeds, "number of seeds");
  rate_cmd->add_option("--eta", eta, "base learning rate for eta/sqrt(t)");
  rate_cmd->add_option("--out", out_path, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_path, quiet);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, axis, values_csv, out_dir);
    if (verify_cmd->parsed()) return cmd_verify(report_path, seed, quick);
    if (quant_cmd->parsed()) return cmd_quantdemo(out_dir, seed);
    if (rate_cmd->parsed()) {
      return cmd_rate(problem_name, dim, condition, sigma, horizons_csv, rate_seeds, eta,
                      out_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
