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

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "pinning/campaign.hpp"
#include "pinning/disorder.hpp"
#include "pinning/errors.hpp"
#include "pinning/estimators.hpp"
#include "pinning/partition.hpp"
#include "pinning/renewal.hpp"
#include "pinning/rng.hpp"

namespace pinning {

namespace {

// A suite appends failure lines to `report` and returns true on success.
using Suite = std::function<bool(std::ostream& report)>;

bool renewal_suite(const VerifyOptions& opt, std::ostream& report) {
  const double alpha = 0.5;
  const std::size_t n = 1u << 14;
  const auto clean = make_kernel(alpha, n);
  std::vector<double> probs(clean.probs().begin(), clean.probs().end());
  if (opt.inject == "corrupt-kernel") probs[1] *= 1.001;
  double total = 0.0;
  for (double k : probs) total += k;
  total += clean.tail_mass();
  RenewalMassTable table{alpha, renewal_mass(probs, n), clean};
  const double residual = renewal_residual(table);
  bool ok = true;
  if (std::abs(total - 1.0) > 1e-12) {
    report << "  renewal: kernel normalisation sum K = " << total << " != 1 (alpha=" << alpha
           << ", horizon=" << n << ")\n";
    ok = false;
  }
  if (!(residual <= 1e-12)) {
    report << "  renewal: residual max|u(n) - sum K(k)u(n-k)| = " << residual
           << " > 1e-12 (alpha=" << alpha << ", N=" << n << ")\n";
    ok = false;
  }
  // K~ round trip: rebuild u^2 from K~.
  const auto mass = mass_table(clean, 1024);
  const auto inter = intersection_kernel(mass, 1024);
  double worst = 0.0;
  std::vector<double> v(1025, 0.0);
  v[0] = 1.0;
  for (std::size_t m = 1; m <= 1024; ++m) {
    long double acc = 0;
    for (std::size_t k = 1; k <= m; ++k) acc += static_cast<long double>(inter.ktilde[k]) * v[m - k];
    v[m] = static_cast<double>(acc);
    worst = std::max(worst, std::abs(v[m] - mass.u[m] * mass.u[m]));
  }
  if (!(worst <= 1e-9)) {
    report << "  renewal: intersection round trip error " << worst << " > 1e-9\n";
    ok = false;
  }
  return ok;
}

bool oracle_suite(const VerifyOptions& opt, std::ostream& report) {
  bool ok = true;
  const double alphas[] = {0.4, 0.8, 1.2};
  const double gammas[] = {1.3, 1.7};
  for (std::size_t i = 0; i < 60; ++i) {
    CounterRng rng(derive_seed(opt.seed, 1000 + i), make_stream(Stream::generic, 0));
    const double alpha = alphas[i % 3];
    const auto spec = make_spec(gammas[(i / 3) % 2]);
    PolymerParams p;
    p.beta = 0.9 * rng.uniform();
    p.h = 2.0 * rng.uniform() - 1.0;
    p.n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
    const auto kernel = make_kernel(alpha, 64);
    const auto env = sample_env(spec, p.n, rng.next_u64());
    const auto dp = partition(p, env, kernel);
    const auto en = enumerate_partition(p, env, kernel);
    const double dc = std::abs(dp.log_z_constrained - en.log_z_constrained);
    const double df = std::abs(dp.log_z_free - en.log_z_free);
    if (!(dc <= 1e-9 && df <= 1e-9)) {
      report << "  partition: DP vs enumeration mismatch (alpha=" << alpha << ", gamma=" << spec.gamma
             << ", beta=" << p.beta << ", h=" << p.h << ", N=" << p.n << "): constrained "
             << dp.log_z_constrained << " vs " << en.log_z_constrained << ", free " << dp.log_z_free
             << " vs " << en.log_z_free << "\n";
      ok = false;
    }
    // Two routes to the set-restricted partition function.
    const auto tilted = tilt_sample(spec, p.beta, p.n, rng.next_u64());
    std::vector<std::size_t> pts{0};
    for (std::size_t s = 1; s <= p.n; ++s) {
      if (rng.uniform() < 0.5) pts.push_back(s);
    }
    const auto mass = mass_table(kernel, p.n);
    const double a = log_set_restricted_partition(p, tilted, pts, kernel);
    const double b = std::log(set_restricted_partition_avoidance(p, tilted, pts, mass));
    if (!(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)))) {
      report << "  partition: set-restricted routes disagree (N=" << p.n << ", |A|=" << pts.size()
             << "): lattice " << a << " vs avoidance " << b << "\n";
      ok = false;
    }
    const auto ef = exp_form_equivalence(p, env, kernel);
    if (!ef.holds) {
      report << "  partition: product form " << ef.log_z_product_form << " vs exp form "
             << ef.log_z_exp_form << " (N=" << p.n << ")\n";
      ok = false;
    }
  }
  return ok;
}

bool annealed_suite(const VerifyOptions& opt, std::ostream& report) {
  const double alpha = 0.4, beta = 0.1;
  const std::size_t n = 256, replicas = 4000;
  const auto kernel = make_kernel(alpha, 1u << 12);
  const auto spec = make_spec(1.8);
  const auto mass = mass_table(kernel, n);
  const auto parts = replica_partitions(kernel, spec, {beta, 0.0, n}, replicas, opt.seed);
  std::vector<double> zf, zc;
  for (const auto& r : parts) {
    zf.push_back(std::exp(r.log_z_free));
    zc.push_back(std::exp(r.log_z_constrained));
  }
  bool ok = true;
  const auto ef = estimate_median_of_means(zf, 8);
  const auto ec = estimate_median_of_means(zc, 8);
  if (!(ef.ci_low <= 1.0 && 1.0 <= ef.ci_high)) {
    report << "  estimators: E[Z^f] = 1 outside [" << ef.ci_low << ", " << ef.ci_high
           << "] (alpha=" << alpha << ", beta=" << beta << ", N=" << n << ")\n";
    ok = false;
  }
  if (!(ec.ci_low <= mass.u[n] && mass.u[n] <= ec.ci_high)) {
    report << "  estimators: E[Z] = u(N) = " << mass.u[n] << " outside [" << ec.ci_low << ", "
           << ec.ci_high << "]\n";
    ok = false;
  }
  const auto pz = paley_zygmund_check(zf, 1.2, 0.5);
  if (!pz.holds) {
    report << "  estimators: Paley-Zygmund violated, P[X >= E X / 2] in [" << pz.lhs_ci_low << ", "
           << pz.lhs_ci_high << "] vs bound " << pz.rhs << "\n";
    ok = false;
  }
  return ok;
}

bool homogeneous_suite(const VerifyOptions&, std::ostream& report) {
  const auto kernel = make_kernel_infinite(0.75, 1u << 16);
  std::vector<double> xs, ys;
  for (int i = 0; i < 9; ++i) {
    const double h = std::pow(10.0, -3.0 + 0.25 * i);
    xs.push_back(std::log(h));
    ys.push_back(std::log(homogeneous_free_energy(kernel, h)));
  }
  const auto fit = fit_exponent(xs, ys);
  if (std::abs(fit.slope - 1.0 / 0.75) > 0.1) {
    report << "  renewal: homogeneous exponent " << fit.slope << " vs 1/alpha = " << 1.0 / 0.75 << "\n";
    return false;
  }
  return true;
}

}  // namespace

int verify(const VerifyOptions& options, std::ostream& out) {
  const std::vector<std::pair<std::string, Suite>> suites = {
      {"renewal identities", [&](std::ostream& r) { return renewal_suite(options, r); }},
      {"oracle equivalence", [&](std::ostream& r) { return oracle_suite(options, r); }},
      {"homogeneous exponent", [&](std::ostream& r) { return homogeneous_suite(options, r); }},
      {"annealed identities", [&](std::ostream& r) { return annealed_suite(options, r); }},
  };
  bool all = true;
  for (const auto& [name, suite] : suites) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream report;
    bool ok = false;
    try {
      ok = suite(report);
    } catch (const std::exception& e) {
      report << "  exception: " << e.what() << "\n";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << (ok ? "PASS " : "FAIL ") << name << " (" << secs << " s)\n" << report.str();
    all = all && ok;
  }
  out << (all ? "verify: all suites passed\n" : "verify: FAILED\n");
  return all ? 0 : 1;
}

}  // namespace pinning
