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

#include "powerstep/oracle.hpp"

using namespace powerstep;

TEST_CASE("kahan accumulator compensates ill-ordered sums") {
  KahanAcc acc;
  acc.add(1.0L);
  for (int i = 0; i < 1000000; ++i) acc.add(1e-18L);
  CHECK(acc.value() == Catch::Approx(1.0 + 1e-12).epsilon(1e-15));
}

TEST_CASE("transform identity checks pass on the reduced grid") {
  const std::vector<std::int64_t> dims{1, 2, 8, 128};
  const std::vector<double> betas{0.05, 0.1, 0.5};
  SplitRng rng(1);
  const CheckReport r =
      check_induced_norm_identity(dims, betas, 200, 1e-9, rng, "induced-norm-identity");
  INFO(r.max_violation);
  CHECK(r.pass);
  CHECK(r.samples == 4 * 3 * 200);
}

TEST_CASE("beta = 1 cells hold to 1e-12") {
  const std::vector<std::int64_t> dims{1, 8, 128, 1024};
  SplitRng rng(2);
  CHECK(check_induced_norm_identity(dims, {1.0}, 200, 1e-12, rng, "id").pass);
  CHECK(check_power_norm_relationship(dims, {1.0}, 200, 1e-12, rng.split(9), "nr").pass);
  CHECK(check_holder_continuity(dims, {1.0}, 200, 1e-12, rng.split(10), "hc").pass);
}

TEST_CASE("norm relationship and holder checks pass on the reduced grid") {
  const std::vector<std::int64_t> dims{1, 2, 8, 128};
  const std::vector<double> betas{0.05, 0.1, 0.5};
  SplitRng rng(3);
  CHECK(check_power_norm_relationship(dims, betas, 200, 1e-9, rng, "nr").pass);
  CHECK(check_holder_continuity(dims, betas, 200, 1e-9, rng.split(4), "hc").pass);
  CHECK(check_scalar_power_bound({0.05, 0.1, 0.5, 1.0}, 5000, 1e-9, rng.split(5)).pass);
}

TEST_CASE("reports are internally consistent") {
  SplitRng rng(4);
  const CheckReport r = check_induced_norm_identity({8}, {0.1}, 50, 1e-9, rng, "x");
  CHECK(r.pass == (r.max_violation <= r.tolerance));
  CHECK(r.samples == 50);
}

TEST_CASE("momentum bound holds across momentum coefficients") {
  NoiseModel noise;
  noise.sigma = 1.0;
  const Problem p = quadratic(16, 10.0, noise);
  for (double gamma : {0.85, 0.9, 0.95}) {
    const CheckReport r = check_momentum_bound(p, gamma, 200, 120, 6061);
    INFO(r.detail);
    INFO(r.max_violation);
    CHECK(r.pass);
  }
  CHECK_THROWS_AS(check_momentum_bound(quadratic(4, 2.0), 0.9, 10, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("descent inequality holds pathwise on noiseless quadratics") {
  const CheckReport r = check_descent_inequality(quadratic(32, 50.0), 0.9, 0.1, 0.05, 500);
  INFO(r.max_violation);
  CHECK(r.pass);
  CHECK_THROWS_AS(check_descent_inequality(rosenbrock(4), 0.9, 0.1, 0.01, 10),
                  std::invalid_argument);
}

TEST_CASE("finite differences agree with a known analytic gradient") {
  const Problem p = quadratic(8, 100.0);
  SplitRng rng(7);
  Vec theta(8);
  for (double& v : theta) v = rng.gaussian();
  const Vec fd = finite_diff_grad(p, theta);
  const Vec an = p.eval_grad(theta);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(fd[i] == Catch::Approx(an[i]).margin(1e-6).epsilon(1e-8));
  }
}

TEST_CASE("gradient audit detects a corrupted gradient") {
  Problem p = quadratic(16, 10.0);
  const auto good = p.eval_grad;
  p.eval_grad = [good](const Vec& theta) {
    Vec g = good(theta);
    for (double& v : g) v *= 1.01;  // 1% systematic error
    return g;
  };
  const CheckReport r = check_gradient_audit(p, 5, 301);
  CHECK_FALSE(r.pass);
  CHECK(r.max_violation > 1e-3);
}

TEST_CASE("quick verification suite is all green") {
  const std::vector<CheckReport> reports = verify_suite(2024, /*quick=*/true);
  for (const CheckReport& r : reports) {
    INFO(r.id << " violation=" << r.max_violation << " tol=" << r.tolerance << " " << r.detail);
    CHECK(r.pass);
  }
  CHECK(all_pass(reports));
}
