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
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "powerstep/rng.hpp"
#include "powerstep/vec.hpp"

namespace powerstep {

enum class NoiseKind { none, gaussian_isotropic, per_coordinate_scaled };

/// Additive gradient noise with a total variance budget:
/// E||g - grad f||^2 = sigma^2 regardless of dimension or kind.
struct NoiseModel {
  double sigma = 0.0;
  NoiseKind kind = NoiseKind::gaussian_isotropic;

  void validate() const {
    if (!std::isfinite(sigma) || sigma < 0.0) {
      throw std::invalid_argument("noise.sigma must be finite and >= 0");
    }
  }
};

/// A differentiable objective with an exact gradient oracle and a stochastic
/// gradient sampler. Problems are immutable after construction; sampling
/// draws from a caller-provided generator so parallel runs can use
/// independent streams.
struct Problem {
  std::string name;
  std::int64_t dim = 0;
  std::function<double(const Vec&)> eval_loss;
  std::function<Vec(const Vec&)> eval_grad;
  std::function<Vec(const Vec&, SplitRng&)> sample_grad;
  Vec theta0;
  std::optional<Vec> optimum;
  std::optional<double> optimum_value;
  std::optional<double> smoothness;    // Lipschitz constant of the gradient, when known
  std::optional<double> noise_sigma;   // variance bound: E||g - grad f||^2 <= sigma^2
};

namespace detail {

inline std::function<Vec(const Vec&, SplitRng&)> make_noisy_sampler(
    std::function<Vec(const Vec&)> grad, std::int64_t dim, NoiseModel noise) {
  noise.validate();
  if (noise.sigma == 0.0 || noise.kind == NoiseKind::none) {
    return [grad = std::move(grad)](const Vec& theta, SplitRng&) { return grad(theta); };
  }
  if (noise.kind == NoiseKind::gaussian_isotropic) {
    const double per_coord = noise.sigma / std::sqrt(static_cast<double>(dim));
    return [grad = std::move(grad), per_coord](const Vec& theta, SplitRng& rng) {
      Vec g = grad(theta);
      for (double& v : g) v += per_coord * rng.gaussian();
      return g;
    };
  }
  // per-coordinate profile with l2-normalized weights ~ sqrt(i + 1)
  Vec profile(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  for (std::int64_t i = 0; i < dim; ++i) {
    profile[static_cast<std::size_t>(i)] = std::sqrt(static_cast<double>(i + 1));
    norm_sq += static_cast<double>(i + 1);
  }
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  for (double& p : profile) p *= noise.sigma * inv_norm;
  return [grad = std::move(grad), profile = std::move(profile)](const Vec& theta,
                                                                SplitRng& rng) {
    Vec g = grad(theta);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += profile[i] * rng.gaussian();
    return g;
  };
}

}  // namespace detail

/// f(theta) = 1/2 theta' A theta with diagonal A, eigenvalues log-spaced in
/// [1, condition_number]. Smoothness constant equals condition_number; the
/// optimum is the origin with value 0.
inline Problem quadratic(std::int64_t dim, double condition_number, NoiseModel noise = {}) {
  if (dim < 1) throw std::invalid_argument("quadratic: dim must be >= 1");
  if (!(condition_number >= 1.0)) {
    throw std::invalid_argument("quadratic: condition_number must be >= 1");
  }
  auto eigs = std::make_shared<Vec>(static_cast<std::size_t>(dim));
  for (std::int64_t i = 0; i < dim; ++i) {
    (*eigs)[static_cast<std::size_t>(i)] =
        dim == 1 ? condition_number
                 : std::pow(condition_number,
                            static_cast<double>(i) / static_cast<double>(dim - 1));
  }
  Problem p;
  p.name = "quadratic";
  p.dim = dim;
  p.eval_loss = [eigs](const Vec& theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += (*eigs)[i] * theta[i] * theta[i];
    return 0.5 * s;
  };
  p.eval_grad = [eigs](const Vec& theta) {
    Vec g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) g[i] = (*eigs)[i] * theta[i];
    return g;
  };
  p.sample_grad = detail::make_noisy_sampler(p.eval_grad, dim, noise);
  p.theta0 = Vec(static_cast<std::size_t>(dim), 1.0);
  p.optimum = Vec(static_cast<std::size_t>(dim), 0.0);
  p.optimum_value = 0.0;
  p.smoothness = condition_number;
  if (noise.sigma > 0.0 && noise.kind != NoiseKind::none) p.noise_sigma = noise.sigma;
  return p;
}

/// Chained Rosenbrock; optimum at all-ones with value 0.
inline Problem rosenbrock(std::int64_t dim, NoiseModel noise = {}) {
  if (dim < 2) throw std::invalid_argument("rosenbrock: dim must be >= 2");
  Problem p;
  p.name = "rosenbrock";
  p.dim = dim;
  p.eval_loss = [](const Vec& theta) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) {
      const double a = theta[i + 1] - theta[i] * theta[i];
      const double b = 1.0 - theta[i];
      s += 100.0 * a * a + b * b;
    }
    return s;
  };
  p.eval_grad = [](const Vec& theta) {
    Vec g(theta.size(), 0.0);
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) {
      const double a = theta[i + 1] - theta[i] * theta[i];
      g[i] += -400.0 * theta[i] * a - 2.0 * (1.0 - theta[i]);
      g[i + 1] += 200.0 * a;
    }
    return g;
  };
  p.sample_grad = detail::make_noisy_sampler(p.eval_grad, dim, noise);
  p.theta0.resize(static_cast<std::size_t>(dim));
  for (std::int64_t i = 0; i < dim; ++i) {
    p.theta0[static_cast<std::size_t>(i)] = (i % 2 == 0) ? -1.2 : 1.0;
  }
  p.optimum = Vec(static_cast<std::size_t>(dim), 1.0);
  p.optimum_value = 0.0;
  if (noise.sigma > 0.0 && noise.kind != NoiseKind::none) p.noise_sigma = noise.sigma;
  return p;
}

/// Binary logistic regression on a fixed seeded synthetic dataset. Labels
/// are sampled from a logistic teacher, so the data is not separable and the
/// loss floors near the Bayes risk. sample_grad averages per-sample
/// gradients over a minibatch drawn uniformly with replacement.
inline Problem logistic_synthetic(std::int64_t dim, std::int64_t n_samples, std::uint64_t seed,
                                  std::int64_t batch = 32) {
  if (dim < 1) throw std::invalid_argument("logistic_synthetic: dim must be >= 1");
  if (n_samples < 1) throw std::invalid_argument("logistic_synthetic: n_samples must be >= 1");
  if (batch < 1) throw std::invalid_argument("logistic_synthetic: batch must be >= 1");

  struct Data {
    std::vector<Vec> x;
    std::vector<double> y;  // +-1
    std::int64_t n = 0;
  };
  auto data = std::make_shared<Data>();
  data->n = n_samples;
  data->x.resize(static_cast<std::size_t>(n_samples));
  data->y.resize(static_cast<std::size_t>(n_samples));
  SplitRng rng(seed);
  SplitRng feature_rng = rng.split(1);
  SplitRng label_rng = rng.split(2);
  SplitRng teacher_rng = rng.split(3);
  const double feature_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Vec teacher(static_cast<std::size_t>(dim));
  for (double& w : teacher) w = 2.0 * teacher_rng.gaussian();
  for (std::int64_t j = 0; j < n_samples; ++j) {
    Vec& xj = data->x[static_cast<std::size_t>(j)];
    xj.resize(static_cast<std::size_t>(dim));
    double margin = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) {
      xj[static_cast<std::size_t>(i)] = feature_scale * feature_rng.gaussian();
      margin += xj[static_cast<std::size_t>(i)] * teacher[static_cast<std::size_t>(i)];
    }
    const double prob = 1.0 / (1.0 + std::exp(-margin));
    data->y[static_cast<std::size_t>(j)] = label_rng.uniform() < prob ? 1.0 : -1.0;
  }

  // log(1 + exp(-z)) without overflow for large |z|
  const auto softplus_neg = [](double z) {
    return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  };

  const auto sample_loss_grad_into = [data](const Vec& theta, std::int64_t j, Vec& g,
                                            double weight) {
    const Vec& xj = data->x[static_cast<std::size_t>(j)];
    const double yj = data->y[static_cast<std::size_t>(j)];
    double z = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) z += xj[i] * theta[i];
    const double s = 1.0 / (1.0 + std::exp(yj * z));  // sigma(-y z)
    const double c = -yj * s * weight;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * xj[i];
  };

  Problem p;
  p.name = "logistic";
  p.dim = dim;
  p.eval_loss = [data, softplus_neg](const Vec& theta) {
    double s = 0.0;
    for (std::int64_t j = 0; j < data->n; ++j) {
      const Vec& xj = data->x[static_cast<std::size_t>(j)];
      double z = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) z += xj[i] * theta[i];
      s += softplus_neg(data->y[static_cast<std::size_t>(j)] * z);
    }
    return s / static_cast<double>(data->n);
  };
  p.eval_grad = [data, sample_loss_grad_into](const Vec& theta) {
    Vec g(theta.size(), 0.0);
    const double w = 1.0 / static_cast<double>(data->n);
    for (std::int64_t j = 0; j < data->n; ++j) sample_loss_grad_into(theta, j, g, w);
    return g;
  };
  p.sample_grad = [data, sample_loss_grad_into, batch](const Vec& theta, SplitRng& rng_in) {
    Vec g(theta.size(), 0.0);
    const double w = 1.0 / static_cast<double>(batch);
    for (std::int64_t k = 0; k < batch; ++k) {
      const std::int64_t j =
          static_cast<std::int64_t>(rng_in.below(static_cast<std::uint64_t>(data->n)));
      sample_loss_grad_into(theta, j, g, w);
    }
    return g;
  };
  p.theta0 = Vec(static_cast<std::size_t>(dim), 0.0);

  // gradient-Lipschitz bound from the construction: Hessian <= 1/(4n) sum x x'
  double trace_bound = 0.0;
  double max_norm_sq = 0.0;
  for (const Vec& xj : data->x) {
    const double n2 = l2_norm_sq(xj);
    trace_bound += n2;
    max_norm_sq = std::max(max_norm_sq, n2);
  }
  p.smoothness = trace_bound / (4.0 * static_cast<double>(n_samples));
  // per-sample gradients are bounded by ||x_j||, so the minibatch estimator
  // has E||g - grad f||^2 <= 4 max ||x_j||^2 / batch
  p.noise_sigma = 2.0 * std::sqrt(max_norm_sq / static_cast<double>(batch));
  return p;
}

/// Two-layer tanh network with squared loss and manual backprop. Parameters
/// are packed as [W1 (h x in), b1, W2 (out x h), b2]. Targets come from a
/// seeded teacher network plus noise.
inline Problem tiny_mlp(std::int64_t n_in, std::int64_t n_hidden, std::int64_t n_out,
                        std::int64_t n_samples, std::uint64_t seed, std::int64_t batch = 16) {
  if (n_in < 1 || n_hidden < 1 || n_out < 1) {
    throw std::invalid_argument("tiny_mlp: widths must be >= 1");
  }
  if (n_samples < 1) throw std::invalid_argument("tiny_mlp: n_samples must be >= 1");
  if (batch < 1) throw std::invalid_argument("tiny_mlp: batch must be >= 1");

  struct Data {
    std::vector<Vec> x, y;
    std::int64_t n = 0, in = 0, hidden = 0, out = 0;
    std::int64_t w1_off = 0, b1_off = 0, w2_off = 0, b2_off = 0, dim = 0;
  };
  auto d = std::make_shared<Data>();
  d->n = n_samples;
  d->in = n_in;
  d->hidden = n_hidden;
  d->out = n_out;
  d->w1_off = 0;
  d->b1_off = n_hidden * n_in;
  d->w2_off = d->b1_off + n_hidden;
  d->b2_off = d->w2_off + n_out * n_hidden;
  d->dim = d->b2_off + n_out;

  SplitRng rng(seed);
  SplitRng data_rng = rng.split(1);
  SplitRng teacher_rng = rng.split(2);
  SplitRng init_rng = rng.split(3);

  Vec teacher(static_cast<std::size_t>(d->dim));
  for (double& w : teacher) w = teacher_rng.gaussian();

  const auto forward = [d](const Vec& theta, const Vec& x, Vec& hidden, Vec& out) {
    hidden.assign(static_cast<std::size_t>(d->hidden), 0.0);
    for (std::int64_t h = 0; h < d->hidden; ++h) {
      double z = theta[static_cast<std::size_t>(d->b1_off + h)];
      for (std::int64_t i = 0; i < d->in; ++i) {
        z += theta[static_cast<std::size_t>(d->w1_off + h * d->in + i)] *
             x[static_cast<std::size_t>(i)];
      }
      hidden[static_cast<std::size_t>(h)] = std::tanh(z);
    }
    out.assign(static_cast<std::size_t>(d->out), 0.0);
    for (std::int64_t o = 0; o < d->out; ++o) {
      double z = theta[static_cast<std::size_t>(d->b2_off + o)];
      for (std::int64_t h = 0; h < d->hidden; ++h) {
        z += theta[static_cast<std::size_t>(d->w2_off + o * d->hidden + h)] *
             hidden[static_cast<std::size_t>(h)];
      }
      out[static_cast<std::size_t>(o)] = z;
    }
  };

  d->x.resize(static_cast<std::size_t>(n_samples));
  d->y.resize(static_cast<std::size_t>(n_samples));
  for (std::int64_t j = 0; j < n_samples; ++j) {
    Vec& xj = d->x[static_cast<std::size_t>(j)];
    xj.resize(static_cast<std::size_t>(n_in));
    for (double& v : xj) v = data_rng.gaussian();
    Vec hidden, out;
    forward(teacher, xj, hidden, out);
    Vec& yj = d->y[static_cast<std::size_t>(j)];
    yj.resize(static_cast<std::size_t>(n_out));
    for (std::int64_t o = 0; o < n_out; ++o) {
      yj[static_cast<std::size_t>(o)] =
          out[static_cast<std::size_t>(o)] + 0.1 * data_rng.gaussian();
    }
  }

  // accumulates the gradient of 1/2 ||f(x_j) - y_j||^2 scaled by weight
  const auto backprop_into = [d, forward](const Vec& theta, std::int64_t j, Vec& g,
                                          double weight, double* loss_out) {
    const Vec& xj = d->x[static_cast<std::size_t>(j)];
    const Vec& yj = d->y[static_cast<std::size_t>(j)];
    Vec hidden, out;
    forward(theta, xj, hidden, out);
    Vec delta_out(static_cast<std::size_t>(d->out));
    double loss = 0.0;
    for (std::int64_t o = 0; o < d->out; ++o) {
      const double r = out[static_cast<std::size_t>(o)] - yj[static_cast<std::size_t>(o)];
      delta_out[static_cast<std::size_t>(o)] = r;
      loss += 0.5 * r * r;
    }
    if (loss_out != nullptr) *loss_out += weight * loss;
    if (g.empty()) return;
    for (std::int64_t o = 0; o < d->out; ++o) {
      const double dl = weight * delta_out[static_cast<std::size_t>(o)];
      g[static_cast<std::size_t>(d->b2_off + o)] += dl;
      for (std::int64_t h = 0; h < d->hidden; ++h) {
        g[static_cast<std::size_t>(d->w2_off + o * d->hidden + h)] +=
            dl * hidden[static_cast<std::size_t>(h)];
      }
    }
    for (std::int64_t h = 0; h < d->hidden; ++h) {
      double dh = 0.0;
      for (std::int64_t o = 0; o < d->out; ++o) {
        dh += delta_out[static_cast<std::size_t>(o)] *
              theta[static_cast<std::size_t>(d->w2_off + o * d->hidden + h)];
      }
      const double th = hidden[static_cast<std::size_t>(h)];
      const double dz = weight * dh * (1.0 - th * th);
      g[static_cast<std::size_t>(d->b1_off + h)] += dz;
      for (std::int64_t i = 0; i < d->in; ++i) {
        g[static_cast<std::size_t>(d->w1_off + h * d->in + i)] +=
            dz * xj[static_cast<std::size_t>(i)];
      }
    }
  };

  Problem p;
  p.name = "mlp";
  p.dim = d->dim;
  p.eval_loss = [d, backprop_into](const Vec& theta) {
    double loss = 0.0;
    Vec no_grad;
    const double w = 1.0 / static_cast<double>(d->n);
    for (std::int64_t j = 0; j < d->n; ++j) backprop_into(theta, j, no_grad, w, &loss);
    return loss;
  };
  p.eval_grad = [d, backprop_into](const Vec& theta) {
    Vec g(theta.size(), 0.0);
    const double w = 1.0 / static_cast<double>(d->n);
    for (std::int64_t j = 0; j < d->n; ++j) backprop_into(theta, j, g, w, nullptr);
    return g;
  };
  p.sample_grad = [d, backprop_into, batch](const Vec& theta, SplitRng& rng_in) {
    Vec g(theta.size(), 0.0);
    const double w = 1.0 / static_cast<double>(batch);
    for (std::int64_t k = 0; k < batch; ++k) {
      const std::int64_t j =
          static_cast<std::int64_t>(rng_in.below(static_cast<std::uint64_t>(d->n)));
      backprop_into(theta, j, g, w, nullptr);
    }
    return g;
  };
  p.theta0.resize(static_cast<std::size_t>(d->dim));
  const double init_scale = 0.5 / std::sqrt(static_cast<double>(n_in));
  for (double& v : p.theta0) v = init_scale * init_rng.gaussian();
  return p;
}

}  // namespace powerstep
