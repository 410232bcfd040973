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
#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/estimators.hpp"
#include "pinning/partition.hpp"

using namespace pinning;

namespace {

oracle::Kernel K(const RenewalKernel& k) {
  return [&k](std::size_t n) { return static_cast<long double>(k(n)); };
}
oracle::Survival S(const RenewalKernel& k) {
  return [&k](std::size_t d) { return static_cast<long double>(k.survival(d)); };
}

}  // namespace

TEST_CASE("quenched estimate of the pure model") {
  const auto k = make_kernel_infinite(0.6, 1u << 13);
  const auto spec = make_spec(1.5);
  const std::size_t n = 4096;
  for (double h : {0.02, 0.2}) {
    const auto e = quenched_free_energy(k, spec, 0.0, h, n, 30, 1);
    CHECK(e.stderr_value <= 1e-15);
    CHECK(e.constrained_value <= e.annealed_value + 1e-12);  // superadditivity
    CHECK(e.value <= e.annealed_value);
    CHECK(std::abs(e.raw_mean - e.annealed_value) <= e.log_correction * std::log(double(n)) / n);
    CHECK(e.log_correction == doctest::Approx(2.6));
  }
}

TEST_CASE("quenched sandwich at finite N") {
  const auto k = make_kernel(0.5, 1u << 12);
  const auto spec = make_spec(1.6);
  const std::size_t n = 1024;
  for (double beta : {0.2, 0.6}) {
    for (double h : {-0.05, 0.05, 0.3}) {
      const auto e = quenched_free_energy(k, spec, beta, h, n, 200, 3);
      CHECK(e.value <= e.annealed_value + 3.0 * e.stderr_value);
      // Jensen on the pure Gibbs measure at h + E log(1 + beta w) is exact at every N.
      const double hp = h + mean_log_weight(spec, beta);
      const auto env = sample_env(spec, n, 0);
      const double pure = partition({0.0, hp, n}, env, k, {false}).log_z_free / n;
      CHECK(e.raw_mean >= pure - 3.0 * e.stderr_value);
      CHECK(e.hc_upper == doctest::Approx(-mean_log_weight(spec, beta)));
      CHECK(e.hc_upper > 0.0);
      CHECK(e.reported() >= 0.0);
    }
  }
  CHECK_THROWS_AS(quenched_free_energy(k, spec, 0.1, 0.0, n, 10, 1), PreconditionError);
}

TEST_CASE("fractional moments refuse infinite orders") {
  const auto k = make_kernel(0.4, 256);
  const auto spec = make_spec(1.5);
  CHECK_THROWS_AS(fractional_moment(k, spec, 1.6, 0.1, 0.0, 64, 60, 1), PreconditionError);
  const auto forced = fractional_moment(k, spec, 1.6, 0.1, 0.0, 64, 60, 1, true);
  CHECK(std::isfinite(forced.point_estimate));
  const auto m = fractional_moment(k, spec, 1.2, 0.0, 0.0, 64, 60, 1);
  CHECK(m.point_estimate == doctest::Approx(1.0).epsilon(1e-12));  // Z^f = 1 at beta = h = 0
  CHECK(m.method == MomentMethod::median_of_means);
}

TEST_CASE("exact second moment equals the two-path enumeration") {
  const auto spec = make_spec(1.5);
  for (double alpha : {0.6, 0.9}) {
    const auto k = make_kernel(alpha, 64);
    const auto ctx = truncation_context(spec, alpha, 0.3, 0.5, 0.0);
    const std::size_t n = 8;
    const auto inter = intersection_kernel(mass_table(k, n), n);
    const auto r = exact_second_moment_truncated(ctx, inter, n);
    const auto ref = oracle::path_pair(K(k), S(k), ctx.chi_exact, n);
    CHECK(r.value == doctest::Approx(static_cast<double>(ref)).epsilon(1e-10));
    const auto ref_chi = oracle::path_pair(K(k), S(k), ctx.chi, n);
    CHECK(r.value_with_chi == doctest::Approx(static_cast<double>(ref_chi)).epsilon(1e-10));
  }
}

TEST_CASE("exact second moment against Monte Carlo") {
  const double alpha = 0.7;
  const auto spec = make_spec(1.5);
  const auto k = make_kernel(alpha, 1u << 12);
  const auto ctx = truncation_context(spec, alpha, 0.1, 0.05, 0.0);
  const std::size_t n = std::min<std::size_t>(ctx.n_beta, 512);
  const auto inter = intersection_kernel(mass_table(k, n), n);
  const auto exact = exact_second_moment_truncated(ctx, inter, n);
  const auto xs = truncated_square_samples(k, spec, ctx, n, 20000, 9);
  const auto mc = estimate_mean(xs);
  CHECK(exact.value >= mc.ci_low);
  CHECK(exact.value <= mc.ci_high);
  const auto cop = copachi_check(ctx, intersection_kernel(mass_table(k, ctx.n_beta), ctx.n_beta));
  CHECK(cop.rhs == doctest::Approx(-2.0 * ctx.chi));
}

TEST_CASE("spine sample tilts the environment on the path only") {
  const auto k = make_kernel(0.5, 128);
  const auto spec = make_spec(1.5);
  const double beta = 0.5, x = 2.0;
  double on = 0, on_hits = 0, off = 0, off_hits = 0;
  for (std::uint64_t s = 0; s < 3000; ++s) {
    const auto sp = spine_sample(k, spec, beta, 200, s);
    REQUIRE(sp.points.front() == 0);
    REQUIRE(sp.points.back() <= 200);
    std::vector<bool> mark(201, false);
    for (std::size_t p : sp.points) mark[p] = true;
    for (std::size_t i = 1; i <= 200; ++i) {
      (mark[i] ? on : off) += 1;
      (mark[i] ? on_hits : off_hits) += sp.env[i] > x;
    }
  }
  const double p_tilt = spec.survival(x) + beta * spec.partial_mean_above(x);
  const double p_base = spec.survival(x);
  CHECK(std::abs(on_hits / on - p_tilt) <= 4.0 * std::sqrt(p_tilt * (1 - p_tilt) / on));
  CHECK(std::abs(off_hits / off - p_base) <= 4.0 * std::sqrt(p_base * (1 - p_base) / off));
}

TEST_CASE("irrelevance certificate: preconditions and term1") {
  const auto spec = make_spec(1.8);
  const auto k = make_kernel_infinite(0.3, 1u << 14);
  const auto mass = mass_table(k, 1u << 12);
  const auto inter = intersection_kernel(mass, 64);
  CHECK_THROWS_AS(irrelevance_certificate(mass, inter, spec, 0.05, 0.3, 64, 128, 64, 1), PreconditionError);
  CHECK_THROWS_AS(irrelevance_certificate(mass, inter, spec, 0.05, 0.85, 64, 128, 64, 1), PreconditionError);
  const auto k_rel = make_kernel_infinite(0.6, 1u << 12);
  const auto mass_rel = mass_table(k_rel, 512);
  CHECK_THROWS_AS(irrelevance_certificate(mass_rel, intersection_kernel(mass_rel, 64), spec, 0.05, 0.5,
                                          64, 128, 64, 1),
                  PreconditionError);
  const auto c = irrelevance_certificate(mass, inter, spec, 0.05, 0.5, 64, 128, 64, 1);
  long double direct = 0.0L;
  for (std::size_t m = 64; m <= mass.length(); ++m) direct += std::pow(static_cast<long double>(mass.u[m]), 1.5L);
  CHECK(c.term1 - c.term1_tail == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
  CHECK(c.term1_tail > 0.0);
  // n = 0 contributes u(0)^{1-q} E[(e^h (1 + beta w~_0))^q] to term2.
  CHECK(c.product >= c.term1 * c.moment_upper[0] * (1 - 1e-12));
  CHECK(c.certified == (c.product < 1.0));
}

TEST_CASE("term1 decays like L^{1 - (1-alpha)(q+1)}") {
  const double alpha = 0.2, q = 0.6;
  const auto spec = make_spec(1.8);
  const auto k = make_kernel_infinite(alpha, 1u << 16);
  const auto mass = mass_table(k, 1u << 15);
  std::vector<double> xs, ys;
  for (std::size_t L = 64; L <= 2048; L *= 2) {
    const auto inter = intersection_kernel(mass, L);
    const auto c = irrelevance_certificate(mass, inter, spec, 0.05, q, L, 8, 8, 1);
    xs.push_back(std::log(double(L)));
    ys.push_back(std::log(c.term1));
  }
  CHECK(fit_exponent(xs, ys).slope == doctest::Approx(1.0 - (1.0 - alpha) * (q + 1.0)).epsilon(0.1));
}

TEST_CASE("kernel power suffix") {
  const auto k = make_kernel(0.7, 50);
  const auto t = kernel_power_suffix(k, 1.0);
  for (std::size_t d = 1; d <= 50; ++d) CHECK(t[d] == doctest::Approx(k.survival(d - 1)).epsilon(1e-12));
  const auto ki = make_kernel_infinite(0.7, 50);
  const auto ti = kernel_power_suffix(ki, 0.9);
  const double s = 1.7 * 0.9;
  CHECK(ti[51] == doctest::Approx(std::pow(ki.normalizer(), -0.9) * zeta_tail(s, 51)).epsilon(1e-12));
  CHECK(std::isinf(kernel_power_suffix(make_kernel_infinite(0.1, 50), 0.5)[51]));
}

TEST_CASE("rho certificate") {
  const auto k = make_kernel(0.9, 1u << 12);
  const auto spec = make_spec(1.5);
  // Deep in the delocalized phase every A_j is tiny.
  CHECK(rho_certificate(k, spec, 0.1, -2.0, 64, 64, 1).certified);
  // rho grows with h when the replicas are shared.
  double prev_point = 0.0, prev_upper = 0.0;
  for (double h : {-0.2, -0.05, 0.0, 0.05, 0.2}) {
    const auto r = rho_certificate(k, spec, 0.5, h, 128, 64, 7);
    CHECK(r.rho_point >= prev_point);
    CHECK(r.rho_upper >= prev_upper);
    CHECK(r.rho_upper >= r.rho_point);
    CHECK(r.disorder_factor == doctest::Approx(std::exp(r.theta * h) * moment_power(spec, 0.5, r.theta)));
    prev_point = r.rho_point;
    prev_upper = r.rho_upper;
  }
  CHECK_THROWS_AS(rho_certificate(k, spec, 0.5, 0.0, 2, 64, 1), PreconditionError);
}

TEST_CASE("h2_beta and k(h)") {
  const double a = 0.9, g = 1.5, b = 0.5, c2 = 0.05;
  const double lg = std::abs(std::log(b)) + 1.0;
  CHECK(h2_beta(a, g, b, c2) == doctest::Approx(c2 * std::pow(b / lg, a * g / (1 - g * (1 - a)))));
  CHECK(h2_beta(1.0, g, b, c2) == doctest::Approx(c2 * std::pow(b, g) / std::pow(lg, 3 * g - 2)));
  CHECK(h2_beta(1.3, g, b, c2) == doctest::Approx(c2 * std::pow(b / lg, g)));
  CHECK(k_for_h(0.5, 0.01) == 10000);
  CHECK(k_for_h(2.0, 0.01) == 100);
  CHECK(k_for_h(1.0, 0.01) == static_cast<std::size_t>(std::ceil(1.0 / (0.01 * std::pow(std::log(0.01), 2)))));
  CHECK(k_for_h(0.5, 0.9) == 3);
}

TEST_CASE("fractional moment profile: the Hoelder bound dominates Monte Carlo") {
  const auto k = make_kernel(0.9, 1u << 12);
  const auto spec = make_spec(1.5);
  const auto p0 = fracmoment_profile(k, spec, 0.0, -0.5, 64, 0.5, 64, 1);
  CHECK(p0.holder_consistent);
  const double h = h2_beta(0.9, 1.5, 0.5, 0.05);
  const auto p = fracmoment_profile(k, spec, 0.5, h, k_for_h(0.9, h), 0.5, 256, 2);
  CHECK(p.holder_consistent);
  for (std::size_t j = 1; j < p.holder_bound.size(); ++j) CHECK(p.mc_low[j] <= p.mc_high[j]);
}

TEST_CASE("critical point of the pure model") {
  const auto k = make_kernel(0.9, 256);
  const auto c = critical_point(0.0, k, make_spec(1.5), 256, 32, 0.01, 1);
  CHECK(c.h_c_low == 0.0);
  CHECK(c.h_c_high == 0.0);
  CHECK(c.converged);
  CHECK_THROWS_AS(critical_point(0.1, k, make_spec(1.5), 256, 32, 0.0, 1), PreconditionError);
}

TEST_CASE("critical point bracket at moderate disorder") {
  const auto k = make_kernel(0.9, 1024);
  CriticalPointOptions opt;
  opt.rho_replicas = 32;
  opt.rho_k_max = 512;
  const auto c = critical_point(0.6, k, make_spec(1.5), 1024, 32, 0.05, 3, opt);
  CHECK(c.h_c_low >= 0.0);
  CHECK(c.h_c_low <= c.h_c_high);
  if (c.converged) CHECK(c.h_c_high - c.h_c_low <= 0.05);
}

TEST_CASE("exponent fit") {
  const std::vector<double> xs{0, 1, 2, 3, 4};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.0 * x);
  const auto f = fit_exponent(xs, ys);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.stderr_slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_exponent(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), PreconditionError);
}

TEST_CASE("Paley-Zygmund") {
  CHECK(paley_zygmund_check(std::vector<double>(10, 3.0), 1.5, 0.5).holds);
  // Exponential(1): P[X >= 1/2] = e^{-1/2}; E[X^{3/2}] = Gamma(5/2).
  CounterRng rng(3, 0);
  std::vector<double> xs(200000);
  for (double& x : xs) x = -std::log(rng.uniform());
  const auto pz = paley_zygmund_check(xs, 1.5, 0.5);
  CHECK(pz.holds);
  CHECK(pz.lhs_ci_low <= std::exp(-0.5));
  CHECK(pz.lhs_ci_high >= std::exp(-0.5));
  CHECK(pz.rhs == doctest::Approx(0.125 / std::pow(std::tgamma(2.5), 2.0)).epsilon(0.02));
  CHECK_THROWS_AS(paley_zygmund_check(std::vector<double>{1.0, -1.0}, 1.5, 0.5), PreconditionError);
}

TEST_CASE("replica maps do not depend on the team size") {
  const auto k = make_kernel(0.6, 512);
  const auto spec = make_spec(1.4);
  const auto a = replica_partitions(k, spec, {0.4, 0.02, 300}, 40, 5, ParallelPolicy{1});
  const auto b = replica_partitions(k, spec, {0.4, 0.02, 300}, 40, 5, ParallelPolicy{4});
  for (std::size_t r = 0; r < 40; ++r) {
    CHECK(a[r].log_z_free == b[r].log_z_free);
    CHECK(a[r].log_z_constrained == b[r].log_z_constrained);
  }
  const auto serial = map_replicas_serial<double>(100, [](std::size_t i) { return std::sqrt(double(i)); });
  const auto par = map_replicas<double>(100, [](std::size_t i) { return std::sqrt(double(i)); }, ParallelPolicy{3});
  CHECK(serial == par);
}
