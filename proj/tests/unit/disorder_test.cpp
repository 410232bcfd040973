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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/rng.hpp"

using namespace pinning;

TEST_CASE("shifted Pareto law: support, centring, tail constant") {
  for (double g : {1.3, 1.5, 1.8}) {
    const auto spec = make_spec(g);
    CHECK(spec.from_tail(1.0) == doctest::Approx(-1.0));
    CHECK(spec.survival(-1.0) == 1.0);
    for (double t : {0.9, 0.1, 1e-6}) CHECK(spec.survival(spec.from_tail(t)) == doctest::Approx(t).epsilon(1e-12));
    CHECK(std::abs(expect(spec, [](double w) { return w; })) < 1e-9);
    CHECK(expect(spec, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    const double x = 1e9;
    CHECK(std::pow(x, g) * spec.survival(x) == doctest::Approx(spec.c_p()).epsilon(1e-6));
  }
  CHECK_THROWS_AS(make_spec(2.0), PreconditionError);
  CHECK_THROWS_AS(make_spec(1.0), PreconditionError);
}

TEST_CASE("partial means and capped moments against quadrature") {
  const auto spec = make_spec(1.6);
  for (double x : {-0.5, 0.0, 3.0, 100.0}) {
    CHECK(spec.partial_mean_above(x) ==
          doctest::Approx(expect_above(spec, x, [](double w) { return w; })).epsilon(1e-9));
  }
  for (double t : {0.5, 4.0, 250.0}) {
    // Split at the cap so the quadrature integrand is smooth on each side.
    const double above = spec.survival(t);
    // E[min(w,t)] = E[w 1{w <= t}] + t P[w > t] and E[w] = 0.
    const double m = -spec.partial_mean_above(t) + t * above;
    CHECK(capped_mean(spec, t) == doctest::Approx(m).epsilon(1e-10));
    // Second moment below the cap in the Pareto coordinate y, with w = (g-1)y - g.
    const double g = spec.gamma;
    const double s_cap = spec.pareto_coord(t);
    auto f = [g](double y) { const double w = (g - 1) * y - g; return w * w * g * std::pow(y, -g - 1); };
    const double second_below =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1.0, s_cap, 15, 1e-13);
    CHECK(capped_second_moment(spec, t) ==
          doctest::Approx(second_below + t * t * above).epsilon(1e-9));
  }
}

TEST_CASE("environment sampling is deterministic and has the right tail") {
  const auto spec = make_spec(1.5);
  const auto a = sample_env(spec, 1000, 99);
  const auto b = sample_env(spec, 1000, 99);
  CHECK(a.values == b.values);
  CHECK(a.size() == 1000);
  // prefix property: a shorter environment is a prefix of a longer one
  const auto c = sample_env(spec, 10, 99);
  for (std::size_t i = 0; i <= 10; ++i) CHECK(c[i] == a[i]);
  const auto big = sample_env(spec, 400000, 3);
  for (double x : {-0.5, 1.0, 10.0}) {
    double hits = 0;
    for (std::size_t i = 1; i <= big.size(); ++i) hits += big[i] > x;
    const double p = spec.survival(x);
    CHECK(std::abs(hits / big.size() - p) <= 4.0 * std::sqrt(p * (1 - p) / big.size()));
  }
}

TEST_CASE("tilted sampler draws from (1 + beta w) dP") {
  const auto spec = make_spec(1.7);
  const double beta = 0.4;
  const TiltedSampler draw(spec, beta);
  CHECK(draw.acceptance_rate() == doctest::Approx(0.6 + 0.4 / 1.7));
  CounterRng rng(11, make_stream(Stream::tilt, 0));
  const int n = 400000;
  std::vector<double> xs(n);
  for (double& x : xs) x = draw(rng);
  for (double x : {-0.5, 0.5, 5.0}) {
    const double p = spec.survival(x) + beta * spec.partial_mean_above(x);
    double hits = 0;
    for (double v : xs) hits += v > x;
    CHECK(std::abs(hits / n - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
  }
  // E_tilt[log(1+w+eps)] against quadrature of (1 + beta w) log(...)
  auto f = [](double w) { return std::log(2.0 + w); };
  double mc = 0.0, sq = 0.0;
  for (double v : xs) { mc += f(v); sq += f(v) * f(v); }
  mc /= n;
  const double sd = std::sqrt((sq / n - mc * mc) / n);
  const double exact = expect(spec, [&](double w) { return (1.0 + beta * w) * f(w); });
  CHECK(std::abs(mc - exact) <= 4.0 * sd);
  const auto env = tilt_sample(spec, beta, 50, 4);
  CHECK(env.values == tilt_sample(spec, beta, 50, 4).values);
}

TEST_CASE("reference size branches and truncation context") {
  const double g = 1.5;
  CHECK(reference_size(g, 0.9, 0.1, 2.0, 0.0) ==
        doctest::Approx(2.0 * std::pow(0.1, -g / (1.0 - g * 0.1))));
  CHECK(reference_size(g, 0.5, 0.1, 1.0, 0.0) ==
        doctest::Approx(std::pow(0.01 * std::abs(std::log(0.1)), -g / (2.0 - g))));
  CHECK(reference_size(g, 0.4, 0.1, 1.0, 0.2) ==
        doctest::Approx(std::pow(0.1, -g * 0.8 / (1.0 - g * 0.6))));
  const auto spec = make_spec(g);
  const auto ctx = truncation_context(spec, 0.8, 0.05, 0.5, 0.0);
  CHECK(ctx.n_beta == static_cast<std::size_t>(std::floor(reference_size(g, 0.8, 0.05, 0.5, 0.0))));
  CHECK(ctx.cutoff == doctest::Approx(std::pow(double(ctx.n_beta), 1.0 / g)));
  CHECK(ctx.mean_capped < 0.0);
  CHECK(ctx.h_beta == doctest::Approx(-std::log(1.0 + 0.05 * ctx.mean_capped)));
  CHECK(ctx.h_beta > 0.0);
  CHECK(ctx.chi == doctest::Approx(std::log(1.0 + 0.0025 * ctx.second_capped)));
  CHECK(ctx.chi_exact == doctest::Approx(std::log1p(
      0.0025 * (ctx.second_capped - ctx.mean_capped * ctx.mean_capped) /
      std::pow(1.0 + 0.05 * ctx.mean_capped, 2))));
  CHECK_THROWS_AS(truncation_context(spec, 0.2, 0.05, 0.5, 0.0), PreconditionError);
  CHECK_THROWS_AS(truncation_context(spec, 0.8, 0.0, 0.5, 0.0), PreconditionError);
  const auto env = sample_env(spec, 1000, 1);
  const auto capped = cap_environment(env, ctx.cutoff);
  for (std::size_t i = 0; i <= 1000; ++i) CHECK(capped[i] == std::min(env[i], ctx.cutoff));
}

TEST_CASE("moments of 1 + beta omega") {
  const auto spec = make_spec(1.5);
  CHECK(moment_power(spec, 0.3, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::isinf(moment_power(spec, 0.3, 1.5)));
  CHECK(moment_power(spec, 0.3, 0.5) < 1.0);  // Jensen
  CHECK(moment_power(spec, 0.3, 1.2) > 1.0);
  CHECK_THROWS_AS(moment_1plusq(spec, 0.3, 0.6), PreconditionError);
  const double b = beta_for_moment(spec, 0.3, 0.01);
  CHECK(moment_1plusq(spec, b, 0.3) == doctest::Approx(1.01).epsilon(1e-8));
  CHECK(mean_log_weight(spec, 0.0) == 0.0);
  CHECK(mean_log_weight(spec, 0.4) < 0.0);
}

TEST_CASE("penalty functionals against Monte Carlo") {
  const auto spec = make_spec(1.5);
  const double beta = 0.3, h = 0.01;
  const std::size_t k = 200;
  const auto pf = penalty_functionals(spec, beta, h, k);
  CHECK(pf.theta == doctest::Approx(1.0 - 1.0 / std::log(200.0)));
  CHECK(pf.cost <= pf.cost_bound);
  CHECK(pf.eta1 > 0.0);
  const double a = std::exp(-1.0 / std::log(200.0));
  const int n = 1000000;
  CounterRng rng(8, make_stream(Stream::generic, 1));
  double g_mean = 0.0, gw_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = spec.from_tail(rng.uniform());
    const double gv = w >= pf.threshold ? a : 1.0;
    g_mean += gv;
    gw_mean += gv * (1.0 + beta * w);
  }
  g_mean /= n;
  gw_mean /= n;
  const double g_sd = (1 - a) * std::sqrt(pf.tail_prob / n);
  CHECK(std::abs(g_mean - std::exp(-pf.eta1)) <= 4.0 * g_sd);
  // E[g (1 + beta w)] = e^{-eta2 - h}; the second moment is infinite, so
  // compare on the log scale with a loose, heavy-tail-aware tolerance.
  CHECK(std::abs(std::log(gw_mean) - (-pf.eta2 - h)) < 0.02);
}
