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


#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/partition.hpp"
#include "pinning/renewal.hpp"
#include "pinning/rng.hpp"

using namespace pinning;

namespace {

struct Instance {
  RenewalKernel kernel;
  DisorderSpec spec;
  PolymerParams params;
  EnvironmentSample env;
};

Instance random_instance(std::uint64_t seed, std::size_t max_n) {
  CounterRng rng(seed, make_stream(Stream::generic, 2));
  const double alphas[] = {0.4, 0.8, 1.2};
  const double gammas[] = {1.3, 1.7};
  const double alpha = alphas[rng.next_u64() % 3];
  const auto spec = make_spec(gammas[rng.next_u64() % 2]);
  PolymerParams p;
  p.beta = 0.9 * rng.uniform();
  p.h = 2.0 * rng.uniform() - 1.0;
  p.n = 1 + rng.next_u64() % max_n;
  // Short horizons exercise the "jump beyond the horizon" branch too.
  const std::size_t horizon = 2 + rng.next_u64() % 30;
  auto kernel = rng.uniform() < 0.5 ? make_kernel(alpha, horizon) : make_kernel_infinite(alpha, horizon);
  auto env = sample_env(spec, p.n, rng.next_u64());
  return {kernel, spec, p, env};
}

std::vector<long double> weights(const PolymerParams& p, const EnvironmentSample& env) {
  std::vector<long double> w(env.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(static_cast<long double>(p.h)) * (1.0L + p.beta * static_cast<long double>(env[i]));
  }
  return w;
}

oracle::Kernel K(const RenewalKernel& k) {
  return [&k](std::size_t n) { return static_cast<long double>(k(n)); };
}
oracle::Survival S(const RenewalKernel& k) {
  return [&k](std::size_t d) { return static_cast<long double>(k.survival(d)); };
}

double log_ld(long double x) { return static_cast<double>(std::log(x)); }

}  // namespace

TEST_CASE("constrained and free partition functions match enumeration") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto in = random_instance(derive_seed(1, s), 12);
    const auto w = weights(in.params, in.env);
    const auto z = oracle::partition(K(in.kernel), S(in.kernel), w, in.params.n);
    const auto dp = partition(in.params, in.env, in.kernel);
    if (z.constrained > 0) CHECK(std::abs(dp.log_z_constrained - log_ld(z.constrained)) <= 1e-9);
    else CHECK(std::isinf(dp.log_z_constrained));
    CHECK(std::abs(dp.log_z_free - log_ld(z.free)) <= 1e-9);
    const auto en = enumerate_partition(in.params, in.env, in.kernel);
    CHECK(std::abs(en.log_z_free - log_ld(z.free)) <= 1e-9);
  }
}

TEST_CASE("set-restricted partition function: both routes match enumeration") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto in = random_instance(derive_seed(2, s), 12);
    CounterRng rng(s, make_stream(Stream::generic, 3));
    const auto tilted = tilt_sample(in.spec, in.params.beta, in.params.n, rng.next_u64());
    std::vector<std::size_t> pts{0};
    std::vector<bool> in_set(in.params.n + 1, false);
    for (std::size_t i = 1; i <= in.params.n; ++i) {
      if (rng.uniform() < 0.5) { pts.push_back(i); in_set[i] = true; }
    }
    const auto w = weights(in.params, tilted);
    const long double ref = oracle::set_restricted(K(in.kernel), S(in.kernel), w, in_set, in.params.n);
    const double lattice = log_set_restricted_partition(in.params, tilted, pts, in.kernel);
    CHECK(std::abs(lattice - log_ld(ref)) <= 1e-9);
    const auto mass = mass_table(in.kernel, in.params.n);
    const double avoid = set_restricted_partition_avoidance(in.params, tilted, pts, mass);
    CHECK(std::abs(std::log(avoid) - log_ld(ref)) <= 1e-9);
  }
}

TEST_CASE("gap-truncated intersection partition function matches enumeration") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto in = random_instance(derive_seed(3, s), 12);
    const std::size_t L = 1 + s % 6;
    const std::size_t len = std::max(in.params.n, L);
    const auto inter = intersection_kernel(mass_table(in.kernel, len), len);
    const auto tilted = tilt_sample(in.spec, in.params.beta, in.params.n, s);
    const auto w = weights(in.params, tilted);
    oracle::Kernel kt = [&inter](std::size_t n) { return static_cast<long double>(inter.ktilde[n]); };
    const auto prof = log_truncated_gap_profile(inter, L, in.params.n, tilted, in.params.beta, in.params.h);
    for (std::size_t n = 0; n <= in.params.n; ++n) {
      const long double ref = oracle::truncated_gap(kt, L, w, n);
      if (ref > 0) CHECK(std::abs(prof[n] - log_ld(ref)) <= 1e-9);
      else CHECK(std::isinf(prof[n]));
    }
    CHECK(log_truncated_gap_partition(inter, L, in.params.n, tilted, in.params.beta, in.params.h) ==
          prof[in.params.n]);
  }
}

TEST_CASE("penalized annealed partition function matches enumeration") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto in = random_instance(derive_seed(4, s), 12);
    const double eta1 = 0.3 * (s % 5), eta2 = 0.2 * (s % 7) - 0.4;
    const auto prof = log_penalized_annealed_profile(eta1, eta2, in.params.n, in.kernel);
    for (std::size_t j = 0; j <= in.params.n; ++j) {
      const long double ref = oracle::penalized(K(in.kernel), eta1, eta2, j);
      if (ref > 0) CHECK(std::abs(prof[j] - log_ld(ref)) <= 1e-9);
    }
  }
}

TEST_CASE("intersection pinning equals the two-path enumeration") {
  for (double alpha : {0.3, 0.7, 1.1}) {
    const auto k = make_kernel(alpha, 20);
    const std::size_t n = 8;
    const auto inter = intersection_kernel(mass_table(k, n), n);
    for (double chi : {-0.5, 0.0, 0.2, 1.0}) {
      const long double ref = oracle::path_pair(K(k), S(k), chi, n);
      CHECK(std::abs(log_intersection_pinning(inter, chi, n) - log_ld(ref)) <= 1e-9);
    }
  }
}

TEST_CASE("beta = 0, h = 0: Z^f = 1 and Z_c = u(N)") {
  const auto k = make_kernel(0.6, 1u << 12);
  const auto spec = make_spec(1.5);
  const auto env = sample_env(spec, 3000, 1);
  const auto mass = mass_table(k, 3000);
  const auto r = partition({0.0, 0.0, 3000}, env, k);
  CHECK(std::abs(r.log_z_free) <= 1e-12);
  CHECK(r.log_z_constrained == doctest::Approx(std::log(mass.u[3000])).epsilon(1e-12));
}

TEST_CASE("long chains stay finite and converge to the homogeneous free energy") {
  const auto k = make_kernel_infinite(0.5, 1u << 14);
  const auto spec = make_spec(1.5);
  const std::size_t n = 1u << 14;
  const auto env = sample_env(spec, n, 2);
  for (double h : {-5.0, 0.1, 1.0, 20.0}) {
    const auto r = partition({0.0, h, n}, env, k);
    REQUIRE(std::isfinite(r.log_z_free));
    REQUIRE(std::isfinite(r.log_z_constrained));
    const double f = homogeneous_free_energy(k, h);
    if (h > 0) {
      // (1/N) log Z_c <= F, within O(log N / N)
      CHECK(r.log_z_constrained / n <= f + 1e-12);
      CHECK(r.log_z_constrained / n >= f - 3.0 * std::log(double(n)) / n);
    }
  }
  // heavy disorder with large N still finite
  const auto r = partition({0.95, 0.5, n}, env, k);
  CHECK(std::isfinite(r.log_z_free));
}

TEST_CASE("expected contacts is the h-derivative of log Z_c") {
  const auto k = make_kernel(0.7, 512);
  const auto spec = make_spec(1.4);
  const auto env = sample_env(spec, 400, 5);
  const double h = 0.05, beta = 0.5, eps = 1e-5;
  const auto r = partition({beta, h, 400}, env, k);
  const double up = partition({beta, h + eps, 400}, env, k, {false}).log_z_constrained;
  const double dn = partition({beta, h - eps, 400}, env, k, {false}).log_z_constrained;
  CHECK(r.expected_contacts == doctest::Approx((up - dn) / (2 * eps)).epsilon(1e-5));
}

TEST_CASE("product form and exponential form agree") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(derive_seed(6, s), 200);
    CHECK(exp_form_equivalence(in.params, in.env, in.kernel).holds);
  }
}

TEST_CASE("partition preconditions") {
  const auto k = make_kernel(0.5, 16);
  const auto env = sample_env(make_spec(1.5), 4, 1);
  CHECK_THROWS_AS(partition({1.0, 0.0, 4}, env, k), PreconditionError);
  CHECK_THROWS_AS(partition({0.1, 0.0, 5}, env, k), PreconditionError);
  const std::vector<std::size_t> bad{1, 2};
  CHECK_THROWS_AS(log_set_restricted_partition({0.1, 0.0, 4}, env, bad, k), PreconditionError);
}
