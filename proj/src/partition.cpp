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

#include "pinning/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Mantissas stay within e^{+-300} of their segment scale.
constexpr double kSegmentSpan = 300.0;

struct Segment {
  std::size_t begin;
  double scale;
};

double log_sum_exp(std::span<const double> xs) {
  double top = kNegInf;
  for (double x : xs) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - top);
  return top + std::log(acc);
}

void check_finite(double value, std::size_t m, const char* where) {
  if (std::isnan(value) || value == std::numeric_limits<double>::infinity()) {
    std::ostringstream os;
    os << where << ": non-finite intermediate log Z = " << value << " at n=" << m;
    throw NumericalError(os.str());
  }
}

void check_weights(std::span<const double> lw, std::size_t n) {
  require(lw.size() >= n + 1, "partition: environment shorter than N");
  for (std::size_t i = 1; i <= n; ++i) check_finite(lw[i], i, "site weight");
}

}  // namespace

std::vector<double> log_forward_profile(std::span<const double> probs,
                                        std::span<const double> log_weights, std::size_t n) {
  require(log_weights.size() >= n + 1, "log_forward_profile: too few weights");
  const std::size_t horizon = probs.empty() ? 0 : probs.size() - 1;
  // krev[horizon - d] = K(d): the window sum over j becomes contiguous.
  std::vector<double> krev(horizon + 1, 0.0);
  for (std::size_t d = 1; d <= horizon; ++d) krev[horizon - d] = probs[d];

  std::vector<double> logz(n + 1, kNegInf);
  std::vector<double> mant(n + 1, 0.0);
  std::vector<Segment> segs;
  logz[0] = 0.0;
  mant[0] = 1.0;
  segs.push_back({0, 0.0});

  for (std::size_t m = 1; m <= n; ++m) {
    const std::size_t lo = m > horizon ? m - horizon : 0;
    // Last segment starting at or before lo; later ones cover the window.
    std::size_t first = segs.size() - 1;
    while (first > 0 && segs[first].begin > lo) --first;
    double top = kNegInf;
    for (std::size_t s = first; s < segs.size(); ++s) top = std::max(top, segs[s].scale);
    double acc = 0.0;
    const double* kr = krev.data() + horizon - m;  // kr[j] = K(m - j)
    for (std::size_t s = first; s < segs.size(); ++s) {
      const std::size_t a = std::max(lo, segs[s].begin);
      const std::size_t b = s + 1 < segs.size() ? segs[s + 1].begin : m;
      if (a >= b) continue;
      double dot = 0.0;
      const double* mp = mant.data();
#pragma omp simd reduction(+ : dot)
      for (std::size_t j = a; j < b; ++j) dot += mp[j] * kr[j];
      if (dot > 0.0) acc += std::exp(segs[s].scale - top) * dot;
    }
    double value = kNegInf;
    if (acc > 0.0 && log_weights[m] != kNegInf) value = log_weights[m] + top + std::log(acc);
    check_finite(value, m, "log_forward_profile");
    logz[m] = value;
    if (value == kNegInf) continue;  // mantissa stays 0
    if (std::abs(value - segs.back().scale) > kSegmentSpan) segs.push_back({m, value});
    mant[m] = std::exp(value - segs.back().scale);
  }
  return logz;
}

std::vector<double> log_site_weights(const PolymerParams& params, const EnvironmentSample& env) {
  require(params.beta >= 0.0 && params.beta < 1.0, "partition: beta must lie in [0,1)");
  require(env.size() >= params.n, "partition: environment shorter than N");
  std::vector<double> lw(params.n + 1, 0.0);
  for (std::size_t i = 1; i <= params.n; ++i) lw[i] = params.h + std::log1p(params.beta * env[i]);
  return lw;
}

std::vector<double> log_constrained_profile(const PolymerParams& params,
                                            const EnvironmentSample& env,
                                            const RenewalKernel& kernel) {
  const auto lw = log_site_weights(params, env);
  check_weights(lw, params.n);
  return log_forward_profile(kernel.probs(), lw, params.n);
}

double log_free_from_profile(std::span<const double> log_profile, const RenewalKernel& kernel,
                             std::size_t n) {
  require(log_profile.size() >= n + 1, "log_free_from_profile: profile too short");
  std::vector<double> terms(n + 1, kNegInf);
  for (std::size_t m = 0; m <= n; ++m) {
    const double s = m == n ? 1.0 : kernel.survival(n - m);
    if (s > 0.0 && log_profile[m] != kNegInf) terms[m] = log_profile[m] + std::log(s);
  }
  return log_sum_exp(terms);
}

namespace {

PartitionResult partition_with_weights(std::span<const double> lw, std::size_t n,
                                       const RenewalKernel& kernel, PartitionOptions options) {
  check_weights(lw, n);
  PartitionResult out;
  const auto fwd = log_forward_profile(kernel.probs(), lw, n);
  out.log_z_constrained = fwd[n];
  out.log_z_free = log_free_from_profile(fwd, kernel, n);
  if (!options.contacts || n == 0 || fwd[n] == kNegInf) return out;
  // Backward pass: the same recursion on the mirrored weights.
  std::vector<double> rev(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) rev[j] = lw[n - j];
  const auto bwd = log_forward_profile(kernel.probs(), rev, n);
  double contacts = 0.0;
  for (std::size_t m = 1; m <= n; ++m) {
    if (fwd[m] == kNegInf || bwd[n - m] == kNegInf) continue;
    const double lp = fwd[m] + bwd[n - m] + lw[n] - lw[m] - fwd[n];
    contacts += std::exp(std::min(lp, 0.0));
  }
  out.expected_contacts = std::min(contacts, static_cast<double>(n));
  return out;
}

}  // namespace

PartitionResult partition(const PolymerParams& params, const EnvironmentSample& env,
                          const RenewalKernel& kernel, PartitionOptions options) {
  const auto lw = log_site_weights(params, env);
  return partition_with_weights(lw, params.n, kernel, options);
}

PartitionResult enumerate_partition(const PolymerParams& params, const EnvironmentSample& env,
                                    const RenewalKernel& kernel) {
  const std::size_t n = params.n;
  require(n <= 16, "enumerate_partition: N must be <= 16");
  require(env.size() >= n, "enumerate_partition: environment shorter than N");
  std::vector<long double> w(n + 1, 1.0L);
  for (std::size_t i = 1; i <= n; ++i) {
    w[i] = std::exp(static_cast<long double>(params.h)) *
           (1.0L + static_cast<long double>(params.beta) * env[i]);
  }
  long double zc = 0.0L;
  long double zf = 0.0L;
  long double contacts = 0.0L;
  // Bit i-1 of mask <=> site i is a renewal point, i in [1, n].
  const std::uint32_t count = 1u << n;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    long double weight = 1.0L;
    std::size_t last = 0;
    std::size_t points = 0;
    for (std::size_t i = 1; i <= n && weight > 0.0L; ++i) {
      if (!(mask >> (i - 1) & 1u)) continue;
      weight *= static_cast<long double>(kernel(i - last)) * w[i];
      last = i;
      ++points;
    }
    if (weight == 0.0L) continue;
    const double tail = last == n ? 1.0 : kernel.survival(n - last);
    zf += weight * tail;
    if (last == n || n == 0) {
      zc += weight;
      contacts += weight * static_cast<long double>(points);
    }
  }
  PartitionResult out;
  out.log_z_constrained = static_cast<double>(std::log(zc));
  out.log_z_free = static_cast<double>(std::log(zf));
  out.expected_contacts = zc > 0.0L ? static_cast<double>(contacts / zc) : 0.0;
  return out;
}

ExpFormCheck exp_form_equivalence(const PolymerParams& params, const EnvironmentSample& env,
                                  const RenewalKernel& kernel) {
  require(params.beta >= 0.0 && params.beta < 1.0, "partition: beta must lie in [0,1)");
  require(env.size() >= params.n, "partition: environment shorter than N");
  std::vector<double> product(params.n + 1, 0.0);
  std::vector<double> expo(params.n + 1, 0.0);
  for (std::size_t i = 1; i <= params.n; ++i) {
    product[i] = std::log(std::exp(params.h) * (1.0 + params.beta * env[i]));
    const double tilde = std::log(1.0 + params.beta * env[i]);
    expo[i] = std::log(std::exp(tilde + params.h));
  }
  const PartitionOptions no_contacts{false};
  const auto a = partition_with_weights(product, params.n, kernel, no_contacts);
  const auto b = partition_with_weights(expo, params.n, kernel, no_contacts);
  ExpFormCheck out;
  out.log_z_product_form = a.log_z_constrained;
  out.log_z_exp_form = b.log_z_constrained;
  out.log_zf_product_form = a.log_z_free;
  out.log_zf_exp_form = b.log_z_free;
  auto close = [](double x, double y) {
    if (x == y) return true;
    return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x));
  };
  out.holds = close(a.log_z_constrained, b.log_z_constrained) && close(a.log_z_free, b.log_z_free);
  return out;
}

namespace {

void check_points(std::span<const std::size_t> points, std::size_t n) {
  require(!points.empty() && points.front() == 0, "set_restricted: points must start at 0");
  for (std::size_t i = 1; i < points.size(); ++i) {
    require(points[i] > points[i - 1], "set_restricted: points must be strictly increasing");
  }
  require(points.back() <= n, "set_restricted: points must lie in [0,N]");
}

}  // namespace

double log_set_restricted_partition(const PolymerParams& params,
                                    const EnvironmentSample& tilted_env,
                                    std::span<const std::size_t> points,
                                    const RenewalKernel& kernel) {
  check_points(points, params.n);
  require(params.beta >= 0.0 && params.beta < 1.0, "set_restricted: beta must lie in [0,1)");
  require(tilted_env.size() >= params.n, "set_restricted: environment shorter than N");
  std::vector<double> lw(params.n + 1, 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const std::size_t p = points[i];
    lw[p] = params.h + std::log1p(params.beta * tilted_env[p]);
  }
  check_weights(lw, params.n);
  const auto fwd = log_forward_profile(kernel.probs(), lw, params.n);
  return log_free_from_profile(fwd, kernel, params.n);
}

double set_restricted_partition_avoidance(const PolymerParams& params,
                                          const EnvironmentSample& tilted_env,
                                          std::span<const std::size_t> points,
                                          const RenewalMassTable& mass) {
  check_points(points, params.n);
  require(mass.length() >= params.n, "set_restricted: mass table shorter than N");
  require(tilted_env.size() >= params.n, "set_restricted: environment shorter than N");
  const std::size_t k = points.size();
  // V(b) = sum_a Z(a) u(a,b,points): mass of reaching b with no earlier
  // intersection in (a,b). Inclusion-exclusion on u(a,b,.) gives
  // V(b) = sum_{a<b} D(a) u(b-a), D(0) = 1, D(a) = (w(a) - 1) V(a).
  std::vector<double> d(k, 0.0);
  d[0] = 1.0;
  double total = 1.0;
  for (std::size_t i = 1; i < k; ++i) {
    const std::size_t b = points[i];
    double v = 0.0;
    for (std::size_t j = 0; j < i; ++j) v += d[j] * mass.u[b - points[j]];
    const double w = std::exp(params.h) * (1.0 + params.beta * tilted_env[b]);
    d[i] = (w - 1.0) * v;
    total += d[i];
  }
  return total;
}

namespace {

std::vector<double> truncated_probs(const IntersectionKernel& intersection, std::size_t L) {
  require(L >= 1 && L <= intersection.length(), "truncated_gap: L outside the kernel table");
  return std::vector<double>(intersection.ktilde.begin(),
                             intersection.ktilde.begin() + static_cast<std::ptrdiff_t>(L) + 1);
}

}  // namespace

std::vector<double> log_truncated_gap_profile(const IntersectionKernel& intersection,
                                              std::size_t L, std::size_t n_max,
                                              const EnvironmentSample& tilted_env, double beta,
                                              double h) {
  require(beta >= 0.0 && beta < 1.0, "truncated_gap: beta must lie in [0,1)");
  require(tilted_env.size() >= n_max, "truncated_gap: environment shorter than n");
  const auto probs = truncated_probs(intersection, L);
  std::vector<double> lw(n_max + 1);
  for (std::size_t i = 0; i <= n_max; ++i) lw[i] = h + std::log1p(beta * tilted_env[i]);
  auto prof = log_forward_profile(probs, lw, n_max);
  // The starting point carries its own weight.
  for (double& x : prof) x += lw[0];
  return prof;
}

double log_truncated_gap_partition(const IntersectionKernel& intersection, std::size_t L,
                                   std::size_t n, const EnvironmentSample& tilted_env,
                                   double beta, double h) {
  return log_truncated_gap_profile(intersection, L, n, tilted_env, beta, h)[n];
}

std::vector<double> log_penalized_annealed_profile(double eta1, double eta2, std::size_t j_max,
                                                   const RenewalKernel& kernel) {
  require(std::isfinite(eta1) && std::isfinite(eta2), "penalized: eta must be finite");
  // Sites 1..j each pay e^{-eta1}; contacts trade it for e^{-eta2}.
  std::vector<double> lw(j_max + 1, eta1 - eta2);
  lw[0] = 0.0;
  auto prof = log_forward_profile(kernel.probs(), lw, j_max);
  for (std::size_t j = 0; j <= j_max; ++j) prof[j] -= eta1 * static_cast<double>(j);
  return prof;
}

double log_penalized_annealed_partition(double eta1, double eta2, std::size_t j,
                                        const RenewalKernel& kernel) {
  return log_penalized_annealed_profile(eta1, eta2, j, kernel)[j];
}

double log_intersection_pinning(const IntersectionKernel& intersection, double chi,
                                std::size_t n) {
  require(intersection.length() >= n, "intersection pinning: kernel table shorter than N");
  std::vector<double> lw(n + 1, chi);
  lw[0] = 0.0;
  const auto fwd = log_forward_profile(intersection.ktilde, lw, n);
  // P[tau~_1 > d] includes the defect of the terminating kernel.
  std::vector<double> terms(n + 1, kNegInf);
  double cum = 0.0;
  std::vector<double> surv(n + 1);
  for (std::size_t d = 0; d <= n; ++d) {
    if (d > 0) cum += intersection.ktilde[d];
    surv[d] = std::max(0.0, 1.0 - cum);
  }
  for (std::size_t m = 0; m <= n; ++m) {
    if (surv[n - m] > 0.0 && fwd[m] != kNegInf) terms[m] = fwd[m] + std::log(surv[n - m]);
  }
  return log_sum_exp(terms);
}

}  // namespace pinning
