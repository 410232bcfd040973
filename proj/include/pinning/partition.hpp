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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pinning/disorder.hpp"
#include "pinning/renewal.hpp"

namespace pinning {

struct PolymerParams {
  double beta = 0.0;
  double h = 0.0;
  std::size_t n = 0;
};

struct PartitionResult {
  double log_z_constrained = 0.0;
  double log_z_free = 0.0;
  double expected_contacts = 0.0;  ///< under the constrained measure
};

struct PartitionOptions {
  bool contacts = true;
};

/// Core recursion in log space:
///   Z(0) = 1,  Z(m) = exp(lw[m]) * sum_{0 <= j < m} Z(j) probs[m-j],
/// with probs[0] ignored and probs[d] = 0 beyond probs.size()-1.
/// Returns log Z(0..n); log_weights must have at least n+1 entries.
///
/// Values are stored as mantissas relative to piecewise-constant scales, so
/// the inner loop is a plain dot product and never under- or overflows.
std::vector<double> log_forward_profile(std::span<const double> probs,
                                        std::span<const double> log_weights, std::size_t n);

/// lw[i] = h + log(1 + beta omega_i); lw[0] = 0.
std::vector<double> log_site_weights(const PolymerParams& params, const EnvironmentSample& env);

/// log Z_c(0..N) for the disordered model.
std::vector<double> log_constrained_profile(const PolymerParams& params,
                                            const EnvironmentSample& env,
                                            const RenewalKernel& kernel);

/// log sum_{m <= n} Z_c(m) P[tau_1 > n - m]
double log_free_from_profile(std::span<const double> log_profile, const RenewalKernel& kernel,
                             std::size_t n);

PartitionResult partition(const PolymerParams& params, const EnvironmentSample& env,
                          const RenewalKernel& kernel, PartitionOptions options = {});

/// Sum over every renewal configuration; N <= 16.
PartitionResult enumerate_partition(const PolymerParams& params, const EnvironmentSample& env,
                                    const RenewalKernel& kernel);

struct ExpFormCheck {
  bool holds = false;
  double log_z_product_form = 0.0;
  double log_z_exp_form = 0.0;
  double log_zf_product_form = 0.0;
  double log_zf_exp_form = 0.0;
};

/// Recomputes Z with weights exp(log(1+beta omega) + h) against e^h (1+beta omega).
ExpFormCheck exp_form_equivalence(const PolymerParams& params, const EnvironmentSample& env,
                                  const RenewalKernel& kernel);

/// log E[prod_{n=1}^N (e^h (1 + beta w_n))^{1{n in tau and n in points}}], free boundary.
/// Masked-lattice recursion: weight e^h(1+beta w_n) at points of the set, 1 elsewhere.
double log_set_restricted_partition(const PolymerParams& params,
                                    const EnvironmentSample& tilted_env,
                                    std::span<const std::size_t> points,
                                    const RenewalKernel& kernel);

/// Same quantity through the first-intersection decomposition over the
/// points of the set only; needs u on [0, N]. O(k^2) for k points.
double set_restricted_partition_avoidance(const PolymerParams& params,
                                          const EnvironmentSample& tilted_env,
                                          std::span<const std::size_t> points,
                                          const RenewalMassTable& mass);

/// log of Z~^L_n: renewal on Ktilde(.) 1{. <= L}, weight e^h (1+beta w_i) at
/// every renewal point i in [0, n], constrained at n.
double log_truncated_gap_partition(const IntersectionKernel& intersection, std::size_t L,
                                   std::size_t n, const EnvironmentSample& tilted_env,
                                   double beta, double h);

/// Same for every n in 0..n_max.
std::vector<double> log_truncated_gap_profile(const IntersectionKernel& intersection,
                                              std::size_t L, std::size_t n_max,
                                              const EnvironmentSample& tilted_env, double beta,
                                              double h);

/// log E[prod_{i=1}^j (e^{-eta2} delta_i + e^{-eta1} (1-delta_i)) delta_j] for j = 0..j_max.
std::vector<double> log_penalized_annealed_profile(double eta1, double eta2, std::size_t j_max,
                                                   const RenewalKernel& kernel);
double log_penalized_annealed_partition(double eta1, double eta2, std::size_t j,
                                        const RenewalKernel& kernel);

/// log E^{(2)}[exp(chi |tau_1 cap tau_2 cap [1, N]|)] on the intersection
/// renewal, free boundary. Needs intersection.length() >= N.
double log_intersection_pinning(const IntersectionKernel& intersection, double chi,
                                std::size_t n);

}  // namespace pinning
