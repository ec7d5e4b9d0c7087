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

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "powerstep/optim.hpp"
#include "powerstep/problems.hpp"
#include "powerstep/schedule.hpp"

namespace powerstep {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string name = "quadratic";  // quadratic | rosenbrock | logistic | mlp
  std::int64_t dim = 64;
  double condition = 10.0;             // quadratic
  std::string noise = "none";          // none | gaussian | per_coordinate
  double sigma = 0.0;
  std::int64_t n_samples = 512;        // logistic, mlp
  std::int64_t batch = 32;             // logistic, mlp
  std::int64_t inputs = 6, hidden = 8, outputs = 2;  // mlp
  std::uint64_t data_seed = 1;         // logistic, mlp
};

struct OptimizerSpec {
  std::string name = "powerstep";  // powerstep | adamw | signsgdm | pbsgdm
  double gamma = 0.9;
  double beta = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double epsilon = 1e-8;
  bool bias_correction = true;
  double weight_decay = 0.1;
  double clip_norm = 1.0;
};

struct ScheduleSpec {
  std::string kind = "warmup_cosine";  // warmup_cosine | inv_sqrt
  double eta_max = 1e-2;
  double eta_min = 1e-3;
  std::int64_t warmup_steps = 0;
  double eta = 0.1;  // inv_sqrt base rate
};

struct RunConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  ScheduleSpec schedule;
  std::int64_t total_steps = 1000;
  std::uint64_t seed = 0;
  std::string mode = "fp";  // fp | q8
  std::int64_t log_every = 10;
  std::int64_t block_size = 128;

  void validate() const;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& v, const std::string& field) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': expected a real number, got '" + v + "'");
  }
}

inline std::int64_t to_i64(const std::string& v, const std::string& field) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& v, const std::string& field) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': expected an unsigned integer, got '" + v +
                      "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& field) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config field '" + field + "': expected a boolean, got '" + v + "'");
}

using Section = std::map<std::string, std::string>;
using SectionMap = std::map<std::string, Section>;

// Consumes known keys from a section; anything left afterwards is an error.
class KeyReader {
 public:
  KeyReader(Section section, std::string section_name)
      : section_(std::move(section)), name_(std::move(section_name)) {}

  bool has(const std::string& key) const { return section_.count(key) > 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    const auto it = section_.find(key);
    if (it == section_.end()) return fallback;
    std::string v = it->second;
    section_.erase(it);
    return v;
  }

  std::string take_required(const std::string& key) {
    const auto it = section_.find(key);
    if (it == section_.end()) {
      throw ConfigError("config section [" + name_ + "] is missing required key '" + key + "'");
    }
    std::string v = it->second;
    section_.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    return has(key) ? to_double(take(key, ""), name_ + "." + key) : fallback;
  }
  std::int64_t take_i64(const std::string& key, std::int64_t fallback) {
    return has(key) ? to_i64(take(key, ""), name_ + "." + key) : fallback;
  }
  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    return has(key) ? to_u64(take(key, ""), name_ + "." + key) : fallback;
  }
  bool take_bool(const std::string& key, bool fallback) {
    return has(key) ? to_bool(take(key, ""), name_ + "." + key) : fallback;
  }

  void finish() const {
    if (!section_.empty()) {
      throw ConfigError("unknown key '" + section_.begin()->first + "' in config section [" +
                        name_ + "]");
    }
  }

 private:
  Section section_;
  std::string name_;
};

inline SectionMap parse_sections(const std::string& text) {
  SectionMap out;
  std::istringstream in(text);
  std::string line, section;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      }
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!out[section].emplace(key, value).second) {
      throw ConfigError("duplicate key '" + key + "' in config section [" + section + "]");
    }
  }
  return out;
}

}  // namespace config_detail

inline void RunConfig::validate() const {
  const std::set<std::string> problems{"quadratic", "rosenbrock", "logistic", "mlp"};
  const std::set<std::string> optimizers{"powerstep", "adamw", "signsgdm", "pbsgdm"};
  if (problems.count(problem.name) == 0) {
    throw ConfigError("problem.name: unknown problem '" + problem.name + "'");
  }
  if (optimizers.count(optimizer.name) == 0) {
    throw ConfigError("optimizer.name: unknown optimizer '" + optimizer.name + "'");
  }
  if (problem.noise != "none" && problem.noise != "gaussian" &&
      problem.noise != "per_coordinate") {
    throw ConfigError("problem.noise: expected none|gaussian|per_coordinate, got '" +
                      problem.noise + "'");
  }
  if (problem.dim < 1) throw ConfigError("problem.dim must be >= 1");
  if (problem.sigma < 0.0) throw ConfigError("problem.sigma must be >= 0");
  if (schedule.kind != "warmup_cosine" && schedule.kind != "inv_sqrt") {
    throw ConfigError("schedule.kind: expected warmup_cosine|inv_sqrt, got '" + schedule.kind +
                      "'");
  }
  if (total_steps < 1) throw ConfigError("run.steps must be >= 1");
  if (log_every < 1) throw ConfigError("run.log_every must be >= 1");
  if (block_size < 1) throw ConfigError("run.block_size must be >= 1");
  if (mode != "fp" && mode != "q8") {
    throw ConfigError("run.mode: expected fp|q8, got '" + mode + "'");
  }
  if (mode == "q8" && optimizer.name == "pbsgdm") {
    throw ConfigError("run.mode: q8 is not supported for optimizer 'pbsgdm'");
  }
  if (schedule.kind == "warmup_cosine") {
    Schedule s{schedule.eta_max, schedule.eta_min, schedule.warmup_steps, total_steps};
    s.validate();
  } else if (!(schedule.eta > 0.0)) {
    throw ConfigError("schedule.eta must be > 0");
  }
  // constructing the optimizer configs runs their own range checks
  if (optimizer.name == "adamw") {
    AdamWConfig c{optimizer.beta1, optimizer.beta2,       optimizer.epsilon,
                  optimizer.weight_decay, optimizer.clip_norm, optimizer.bias_correction};
    c.validate();
  } else {
    PowerStepConfig c{optimizer.gamma, PowerExponent(optimizer.beta), optimizer.weight_decay,
                      optimizer.clip_norm};
    c.validate();
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  using namespace config_detail;
  SectionMap sections = parse_sections(text);
  const std::set<std::string> known{"problem", "optimizer", "schedule", "run"};
  for (const auto& [name, _] : sections) {
    if (known.count(name) == 0) {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  for (const char* required : {"problem", "optimizer", "schedule", "run"}) {
    if (sections.count(required) == 0) {
      throw ConfigError(std::string("config is missing required section [") + required + "]");
    }
  }

  RunConfig cfg;
  {
    KeyReader r(sections["problem"], "problem");
    cfg.problem.name = r.take_required("name");
    if (cfg.problem.name == "quadratic" || cfg.problem.name == "rosenbrock") {
      cfg.problem.dim = r.take_i64("dim", cfg.problem.dim);
      if (cfg.problem.name == "quadratic") {
        cfg.problem.condition = r.take_double("condition", cfg.problem.condition);
      }
      cfg.problem.noise = r.take("noise", cfg.problem.noise);
      cfg.problem.sigma = r.take_double("sigma", cfg.problem.sigma);
    } else if (cfg.problem.name == "logistic") {
      cfg.problem.dim = r.take_i64("dim", cfg.problem.dim);
      cfg.problem.n_samples = r.take_i64("n_samples", cfg.problem.n_samples);
      cfg.problem.batch = r.take_i64("batch", cfg.problem.batch);
      cfg.problem.data_seed = r.take_u64("data_seed", cfg.problem.data_seed);
    } else if (cfg.problem.name == "mlp") {
      cfg.problem.inputs = r.take_i64("inputs", cfg.problem.inputs);
      cfg.problem.hidden = r.take_i64("hidden", cfg.problem.hidden);
      cfg.problem.outputs = r.take_i64("outputs", cfg.problem.outputs);
      cfg.problem.n_samples = r.take_i64("n_samples", cfg.problem.n_samples);
      cfg.problem.batch = r.take_i64("batch", cfg.problem.batch);
      cfg.problem.data_seed = r.take_u64("data_seed", cfg.problem.data_seed);
    }
    r.finish();
  }
  {
    KeyReader r(sections["optimizer"], "optimizer");
    cfg.optimizer.name = r.take_required("name");
    if (cfg.optimizer.name == "adamw") {
      cfg.optimizer.beta1 = r.take_double("beta1", cfg.optimizer.beta1);
      cfg.optimizer.beta2 = r.take_double("beta2", cfg.optimizer.beta2);
      cfg.optimizer.epsilon = r.take_double("epsilon", cfg.optimizer.epsilon);
      cfg.optimizer.bias_correction = r.take_bool("bias_correction", cfg.optimizer.bias_correction);
    } else {
      cfg.optimizer.gamma = r.take_double("gamma", cfg.optimizer.gamma);
      if (cfg.optimizer.name != "signsgdm") {
        cfg.optimizer.beta = r.take_double("beta", cfg.optimizer.beta);
      } else {
        cfg.optimizer.beta = 0.0;
      }
    }
    cfg.optimizer.weight_decay = r.take_double("weight_decay", cfg.optimizer.weight_decay);
    cfg.optimizer.clip_norm = r.take_double("clip_norm", cfg.optimizer.clip_norm);
    r.finish();
  }
  {
    KeyReader r(sections["schedule"], "schedule");
    cfg.schedule.kind = r.take_required("kind");
    if (cfg.schedule.kind == "warmup_cosine") {
      cfg.schedule.eta_max = r.take_double("eta_max", cfg.schedule.eta_max);
      cfg.schedule.eta_min = r.take_double("eta_min", cfg.schedule.eta_min);
      cfg.schedule.warmup_steps = r.take_i64("warmup_steps", cfg.schedule.warmup_steps);
    } else if (cfg.schedule.kind == "inv_sqrt") {
      cfg.schedule.eta = r.take_double("eta", cfg.schedule.eta);
    }
    r.finish();
  }
  {
    KeyReader r(sections["run"], "run");
    cfg.total_steps = to_i64(r.take_required("steps"), "run.steps");
    cfg.seed = to_u64(r.take_required("seed"), "run.seed");
    cfg.mode = r.take("mode", cfg.mode);
    cfg.log_every = r.take_i64("log_every", cfg.log_every);
    cfg.block_size = r.take_i64("block_size", cfg.block_size);
    r.finish();
  }
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace config_detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace config_detail

/// Canonical serialization: fixed section and key order, only the keys that
/// apply to the configured kinds, reals at 17 significant digits. Two
/// configs are equivalent iff their canonical texts match.
inline std::string canonical_config_text(const RunConfig& cfg) {
  using config_detail::fmt_real;
  std::ostringstream os;
  os << "[problem]\n";
  os << "name = " << cfg.problem.name << "\n";
  if (cfg.problem.name == "quadratic" || cfg.problem.name == "rosenbrock") {
    os << "dim = " << cfg.problem.dim << "\n";
    if (cfg.problem.name == "quadratic") {
      os << "condition = " << fmt_real(cfg.problem.condition) << "\n";
    }
    os << "noise = " << cfg.problem.noise << "\n";
    os << "sigma = " << fmt_real(cfg.problem.sigma) << "\n";
  } else if (cfg.problem.name == "logistic") {
    os << "dim = " << cfg.problem.dim << "\n";
    os << "n_samples = " << cfg.problem.n_samples << "\n";
    os << "batch = " << cfg.problem.batch << "\n";
    os << "data_seed = " << cfg.problem.data_seed << "\n";
  } else if (cfg.problem.name == "mlp") {
    os << "inputs = " << cfg.problem.inputs << "\n";
    os << "hidden = " << cfg.problem.hidden << "\n";
    os << "outputs = " << cfg.problem.outputs << "\n";
    os << "n_samples = " << cfg.problem.n_samples << "\n";
    os << "batch = " << cfg.problem.batch << "\n";
    os << "data_seed = " << cfg.problem.data_seed << "\n";
  }
  os << "[optimizer]\n";
  os << "name = " << cfg.optimizer.name << "\n";
  if (cfg.optimizer.name == "adamw") {
    os << "beta1 = " << fmt_real(cfg.optimizer.beta1) << "\n";
    os << "beta2 = " << fmt_real(cfg.optimizer.beta2) << "\n";
    os << "epsilon = " << fmt_real(cfg.optimizer.epsilon) << "\n";
    os << "bias_correction = " << (cfg.optimizer.bias_correction ? "true" : "false") << "\n";
  } else {
    os << "gamma = " << fmt_real(cfg.optimizer.gamma) << "\n";
    if (cfg.optimizer.name != "signsgdm") {
      os << "beta = " << fmt_real(cfg.optimizer.beta) << "\n";
    }
  }
  os << "weight_decay = " << fmt_real(cfg.optimizer.weight_decay) << "\n";
  os << "clip_norm = " << fmt_real(cfg.optimizer.clip_norm) << "\n";
  os << "[schedule]\n";
  os << "kind = " << cfg.schedule.kind << "\n";
  if (cfg.schedule.kind == "warmup_cosine") {
    os << "eta_max = " << fmt_real(cfg.schedule.eta_max) << "\n";
    os << "eta_min = " << fmt_real(cfg.schedule.eta_min) << "\n";
    os << "warmup_steps = " << cfg.schedule.warmup_steps << "\n";
  } else {
    os << "eta = " << fmt_real(cfg.schedule.eta) << "\n";
  }
  os << "[run]\n";
  os << "steps = " << cfg.total_steps << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "mode = " << cfg.mode << "\n";
  os << "log_every = " << cfg.log_every << "\n";
  os << "block_size = " << cfg.block_size << "\n";
  return os.str();
}

/// FNV-1a over the canonical text.
inline std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = canonical_config_text(cfg);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Sets one field by dotted or bare name ("optimizer.gamma", "gamma",
/// "schedule.eta_max", ...). Used by parameter sweeps; the result is
/// re-validated.
inline void set_config_field(RunConfig& cfg, const std::string& axis, const std::string& value) {
  using namespace config_detail;
  std::string section, key = axis;
  const auto dot = axis.find('.');
  if (dot != std::string::npos) {
    section = axis.substr(0, dot);
    key = axis.substr(dot + 1);
  }
  const auto in = [&](const char* s) { return section.empty() || section == s; };

  if (in("optimizer") && key == "gamma") {
    cfg.optimizer.gamma = to_double(value, axis);
  } else if (in("optimizer") && key == "beta") {
    cfg.optimizer.beta = to_double(value, axis);
  } else if (in("optimizer") && key == "beta1") {
    cfg.optimizer.beta1 = to_double(value, axis);
  } else if (in("optimizer") && key == "beta2") {
    cfg.optimizer.beta2 = to_double(value, axis);
  } else if (in("optimizer") && key == "epsilon") {
    cfg.optimizer.epsilon = to_double(value, axis);
  } else if (in("optimizer") && key == "weight_decay") {
    cfg.optimizer.weight_decay = to_double(value, axis);
  } else if (in("optimizer") && key == "clip_norm") {
    cfg.optimizer.clip_norm = to_double(value, axis);
  } else if (in("schedule") && key == "eta_max") {
    cfg.schedule.eta_max = to_double(value, axis);
  } else if (in("schedule") && key == "eta_min") {
    cfg.schedule.eta_min = to_double(value, axis);
  } else if (in("schedule") && key == "warmup_steps") {
    cfg.schedule.warmup_steps = to_i64(value, axis);
  } else if (in("schedule") && key == "eta") {
    cfg.schedule.eta = to_double(value, axis);
  } else if (in("problem") && key == "sigma") {
    cfg.problem.sigma = to_double(value, axis);
  } else if (in("problem") && key == "dim") {
    cfg.problem.dim = to_i64(value, axis);
  } else if (in("problem") && key == "condition") {
    cfg.problem.condition = to_double(value, axis);
  } else if (in("run") && key == "seed") {
    cfg.seed = to_u64(value, axis);
  } else if (in("run") && key == "steps") {
    cfg.total_steps = to_i64(value, axis);
  } else {
    throw ConfigError("sweep axis '" + axis + "' does not name a sweepable config field");
  }
  cfg.validate();
}

/// Materializes the configured objective.
inline Problem build_problem(const ProblemSpec& spec) {
  NoiseModel noise;
  noise.sigma = spec.sigma;
  if (spec.noise == "none") {
    noise.kind = NoiseKind::none;
  } else if (spec.noise == "gaussian") {
    noise.kind = NoiseKind::gaussian_isotropic;
  } else if (spec.noise == "per_coordinate") {
    noise.kind = NoiseKind::per_coordinate_scaled;
  } else {
    throw ConfigError("problem.noise: expected none|gaussian|per_coordinate, got '" + spec.noise +
                      "'");
  }
  if (spec.name == "quadratic") return quadratic(spec.dim, spec.condition, noise);
  if (spec.name == "rosenbrock") return rosenbrock(spec.dim, noise);
  if (spec.name == "logistic") {
    return logistic_synthetic(spec.dim, spec.n_samples, spec.data_seed, spec.batch);
  }
  if (spec.name == "mlp") {
    return tiny_mlp(spec.inputs, spec.hidden, spec.outputs, spec.n_samples, spec.data_seed,
                    spec.batch);
  }
  throw ConfigError("problem.name: unknown problem '" + spec.name + "'");
}

inline PowerStepConfig to_powerstep_config(const OptimizerSpec& spec) {
  PowerStepConfig c;
  c.gamma = spec.gamma;
  c.beta = PowerExponent(spec.name == "signsgdm" ? 0.0 : spec.beta);
  c.weight_decay = spec.weight_decay;
  c.clip_norm = spec.clip_norm;
  return c;
}

inline AdamWConfig to_adamw_config(const OptimizerSpec& spec) {
  AdamWConfig c;
  c.beta1 = spec.beta1;
  c.beta2 = spec.beta2;
  c.epsilon = spec.epsilon;
  c.weight_decay = spec.weight_decay;
  c.clip_norm = spec.clip_norm;
  c.bias_correction = spec.bias_correction;
  return c;
}

}  // namespace powerstep
