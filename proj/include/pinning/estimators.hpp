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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinning/disorder.hpp"
#include "pinning/parallel.hpp"
#include "pinning/partition.hpp"
#include "pinning/renewal.hpp"
#include "pinning/stats.hpp"

namespace pinning {

/// Replica r always uses environment seed derive_seed(seed, r).
std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica);

/// One partition() per replica, contacts off. Deterministic for any team size.
std::vector<PartitionResult> replica_partitions(const RenewalKernel& kernel,
                                                const DisorderSpec& spec,
                                                const PolymerParams& params,
                                                std::size_t replicas, std::uint64_t seed,
                                                ParallelPolicy policy = {});

struct FreeEnergyEstimate {
  double beta = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double value = 0.0;             ///< (1/N) mean log Z^f - C log N / N
  double stderr_value = 0.0;
  double raw_mean = 0.0;          ///< (1/N) mean log Z^f
  double constrained_value = 0.0; ///< (1/N) mean log Z_c (superadditive lower bound)
  double constrained_stderr = 0.0;
  double log_correction = 0.0;    ///< C, with C = alpha + 2
  double annealed_value = 0.0;    ///< F(h)
  double convexity_as_written = 0.0;  ///< F(h + log E[1 + beta omega]) = F(h)
  double convexity_corrected = 0.0;   ///< F(h + E log(1 + beta omega))
  double hc_upper = 0.0;          ///< -E log(1 + beta omega)

  double reported() const { return value > 0.0 ? value : 0.0; }
};

FreeEnergyEstimate quenched_free_energy(const RenewalKernel& kernel, const DisorderSpec& spec,
                                        double beta, double h, std::size_t n,
                                        std::size_t replicas, std::uint64_t seed,
                                        ParallelPolicy policy = {});

/// Upper confidence bound used by every certificate: max of the
/// median-of-means block maximum and the mean + z standard errors.
double conservative_upper(std::span<const double> xs, std::size_t blocks, double z);

/// E[(Z^f_{N,h})^p] by median of means with ceil(2 log 20) = 6 blocks.
MomentEstimate fractional_moment(const RenewalKernel& kernel, const DisorderSpec& spec, double p,
                                 double beta, double h, std::size_t n, std::size_t replicas,
                                 std::uint64_t seed, bool force = false,
                                 ParallelPolicy policy = {});

struct SecondMomentResult {
  double value = 0.0;          ///< exact E[(Z^f_{N,h_beta}(omega_hat))^2]
  double log_value = 0.0;
  double value_with_chi = 0.0; ///< same recursion with chi = log(1 + beta^2 E[omega_hat^2])
  std::size_t n = 0;
};

SecondMomentResult exact_second_moment_truncated(const TruncationContext& ctx,
                                                 const IntersectionKernel& intersection,
                                                 std::size_t n);

/// Samples of (Z^f_{N,h_beta})^2 on capped environments.
std::vector<double> truncated_square_samples(const RenewalKernel& kernel,
                                             const DisorderSpec& spec,
                                             const TruncationContext& ctx, std::size_t n,
                                             std::size_t replicas, std::uint64_t seed,
                                             ParallelPolicy policy = {});

struct CopachiCheck {
  double lhs = 0.0;  ///< log P[tau~_1 <= N_beta]
  double rhs = 0.0;  ///< -2 chi
  bool holds = false;
};

CopachiCheck copachi_check(const TruncationContext& ctx, const IntersectionKernel& intersection);

struct SpineSample {
  std::vector<std::size_t> points;
  EnvironmentSample env;
};

/// tau' from the kernel, then omega tilted on tau' cap [1,N] and IID elsewhere.
SpineSample spine_sample(const RenewalKernel& kernel, const DisorderSpec& spec, double beta,
                         std::size_t n, std::uint64_t seed);

struct IrrelevanceCertificate {
  double q = 0.0;
  std::size_t L = 0;
  std::size_t n_max = 0;
  double term1 = 0.0;
  double term1_tail = 0.0;        ///< part extrapolated beyond the mass table
  double term2 = 0.0;
  double term2_tail = 0.0;        ///< heuristic C u(n)^{1+q} tail beyond n_max
  double ratio_constant = 0.0;      ///< max_n upper(E[Z~_n^q]) / u(n)^{2q}
  double product = 0.0;
  bool certified = false;
  std::vector<double> moment_upper;  ///< upper CI of E[(Z~^L_n)^q], n = 0..n_max
};

IrrelevanceCertificate irrelevance_certificate(const RenewalMassTable& mass,
                                               const IntersectionKernel& intersection,
                                               const DisorderSpec& spec, double beta, double q,
                                               std::size_t L, std::size_t n_max,
                                               std::size_t replicas, std::uint64_t seed,
                                               ParallelPolicy policy = {});

struct RhoCertificate {
  double beta = 0.0;
  double h = 0.0;
  std::size_t k = 0;
  double theta = 0.0;
  std::vector<double> a_values;  ///< upper confidence bounds on A_j, j = 0..k-1
  std::vector<double> a_point;   ///< plain means
  double disorder_factor = 0.0;  ///< E[e^{theta h} (1 + beta omega)^theta]
  double rho_upper = 0.0;
  double rho_point = 0.0;
  bool certified = false;
  std::size_t replicas = 0;
};

/// T(d) = sum_{m >= d} K(m)^theta for d = 0..horizon+1, tail included.
std::vector<double> kernel_power_suffix(const RenewalKernel& kernel, double theta);

RhoCertificate rho_certificate(const RenewalKernel& kernel, const DisorderSpec& spec,
                               double beta, double h, std::size_t k, std::size_t replicas,
                               std::uint64_t seed, ParallelPolicy policy = {});

/// h^{(2)}_beta for the given c2.
double h2_beta(double alpha, double gamma, double beta, double c2);
/// k = h^{-1/alpha} (alpha < 1), h^{-1} |log h|^{-2} (alpha = 1), h^{-1} (alpha > 1); at least 3.
std::size_t k_for_h(double alpha, double h);

struct FracMomentProfile {
  double theta = 0.0;
  double eta = 0.0;
  PenaltyFunctionals penalty;
  std::vector<double> holder_bound;  ///< cost^{j(1-theta)} (E[G Z_j])^theta
  std::vector<double> mc_point;
  std::vector<double> mc_low;
  std::vector<double> mc_high;
  std::vector<double> target;        ///< 2 e^2 u(j) for j < eta k, eta u(j) otherwise
  bool holder_consistent = false;    ///< holder_bound[j] >= mc_low[j] for every j
  bool bound_meets_target = false;   ///< holder_bound[j] <= target[j] for every j
};

FracMomentProfile fracmoment_profile(const RenewalKernel& kernel, const DisorderSpec& spec,
                                     double beta, double h, std::size_t k, double eta,
                                     std::size_t replicas, std::uint64_t seed,
                                     ParallelPolicy policy = {});

struct CriticalPointOptions {
  double threshold = 0.0;  ///< positivity threshold, >= 0; value already carries the log N / N correction
  bool use_rho = true;
  std::size_t rho_replicas = 64;
  std::size_t rho_k_max = 1u << 13;
  double h_max = 2.0;
};

struct CriticalPoint {
  double h_c_low = 0.0;
  double h_c_high = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
  std::string note;
};

CriticalPoint critical_point(double beta, const RenewalKernel& kernel, const DisorderSpec& spec,
                             std::size_t n, std::size_t replicas, double tol, std::uint64_t seed,
                             CriticalPointOptions options = {}, ParallelPolicy policy = {});

struct ExponentFit {
  std::vector<double> xs;
  std::vector<double> ys;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<double> residuals;
  std::string window;
};

/// Least squares on log-log data (inputs are already logarithms).
ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys,
                         std::string window = {});

struct PaleyZygmundCheck {
  double lhs = 0.0;  ///< empirical P[X >= theta E X]
  double rhs = 0.0;  ///< (1-theta)^{p'} E[X]^{p'} / E[X^p]^{1/(p-1)}, p' = p/(p-1)
  double lhs_ci_low = 0.0;
  double lhs_ci_high = 0.0;
  bool holds = false;
};

PaleyZygmundCheck paley_zygmund_check(std::span<const double> samples, double p, double theta);

}  // namespace pinning
