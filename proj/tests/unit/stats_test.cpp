// Copyright 2026 The heavytail-pinning Authors
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


#include <cmath>

#include "doctest.h"
#include "pinning/errors.hpp"
#include "pinning/estimators.hpp"
#include "pinning/rng.hpp"
#include "pinning/stats.hpp"

using namespace pinning;

TEST_CASE("summaries and plain-mean intervals") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(xs);
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.stderr_mean == doctest::Approx(std::sqrt(5.0 / 12.0)));
  const auto e = estimate_mean(xs);
  CHECK(e.ci_low == doctest::Approx(2.5 - 1.959963984540054 * s.stderr_mean));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(estimate_mean(std::vector<double>{}), PreconditionError);
}

TEST_CASE("median of means") {
  CHECK(mom_blocks(0.05) == 6);  // ceil(2 log 20)
  CHECK(mom_blocks(0.01) == 10);
  std::vector<double> xs(60);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i / 10);
  const auto m = estimate_median_of_means(xs, 6);
  CHECK(m.point_estimate == 2.5);
  CHECK(m.ci_low == 0.0);
  CHECK(m.ci_high == 5.0);
  CHECK(m.method == MomentMethod::median_of_means);
  CHECK_THROWS_AS(estimate_median_of_means(std::vector<double>(3, 1.0), 6), PreconditionError);
}

TEST_CASE("median of means covers a heavy-tailed mean") {
  // Pareto(1.8) with mean 1.8/0.8: 500 experiments, 6 blocks, nominal miss
  // rate <= 2 * 2^-6 for symmetric block laws. The skew pushes it higher,
  // so only a gross failure is flagged.
  const double g = 1.8, mean = g / (g - 1.0);
  int misses = 0;
  for (int e = 0; e < 500; ++e) {
    CounterRng rng(derive_seed(4, e), 0);
    std::vector<double> xs(1200);
    for (double& x : xs) x = std::pow(rng.uniform(), -1.0 / g);
    const auto m = estimate_median_of_means(xs, 6);
    misses += !(m.ci_low <= mean && mean <= m.ci_high);
  }
  CHECK(misses < 60);
}

TEST_CASE("least squares") {
  const std::vector<double> xs{0, 1, 2, 3, 4};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.0 * x - 1.0);
  const auto f = least_squares(xs, ys);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(-1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> sig{1, 1, 1, 1, 100};
  std::vector<double> yb = ys;
  yb[4] += 50;  // down-weighted outlier
  const auto w = weighted_least_squares(xs, yb, sig);
  CHECK(w.slope == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(least_squares(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), PreconditionError);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
}

TEST_CASE("exponent fits recover the slope under 5% multiplicative noise") {
  // 1000 synthetic data sets, 100 points each. With 98 degrees of freedom
  // P(|t| <= 2) = 0.952; the 95% target is met up to 3 binomial sd.
  const int runs = 1000;
  int covered = 0;
  for (int r = 0; r < runs; ++r) {
    CounterRng rng(derive_seed(31, r), 0);
    std::vector<double> xs, ys;
    for (int i = 0; i < 100; ++i) {
      const double x = -7.0 + 5.0 * i / 99.0;
      // Box-Muller normal with sd 0.05 on the log scale.
      const double z = std::sqrt(-2.0 * std::log(rng.uniform())) * std::cos(2.0 * M_PI * rng.uniform());
      xs.push_back(x);
      ys.push_back(1.5 * x + 0.3 + std::log1p(0.05 * z));
    }
    const auto f = fit_exponent(xs, ys);
    covered += std::abs(f.slope - 1.5) <= 2.0 * f.stderr_slope;
  }
  CHECK(static_cast<double>(covered) / runs >= 0.95 - 3.0 * std::sqrt(0.95 * 0.05 / runs));
}
