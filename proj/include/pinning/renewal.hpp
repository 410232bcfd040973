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
#include <vector>

namespace pinning {

/// How the mass beyond the horizon is modelled.
enum class TailModel {
  none,       ///< tail_mass is an opaque "jump beyond horizon"
  power_law,  ///< K(n) = n^{-(1+alpha)} / normalizer continues for n > horizon
};

/// Truncated power-law inter-arrival law K(1..horizon) plus explicit tail mass.
///
/// Immutable after construction and safe to share across threads.
class RenewalKernel {
 public:
  RenewalKernel(double alpha, std::vector<double> probs_from_one, double tail_mass,
                double normalizer, TailModel tail_model);

  double alpha() const { return alpha_; }
  std::size_t horizon() const { return horizon_; }
  double tail_mass() const { return tail_mass_; }
  double normalizer() const { return normalizer_; }
  TailModel tail_model() const { return tail_model_; }

  /// K(n); zero for n == 0 and n > horizon.
  double operator()(std::size_t n) const { return n == 0 || n > horizon_ ? 0.0 : probs_[n]; }
  /// K indexed by jump length; element 0 is 0.
  std::span<const double> probs() const { return probs_; }
  /// P[tau_1 > d], tail mass included.
  double survival(std::size_t d) const {
    return d >= horizon_ ? tail_mass_ : survival_[d];
  }

 private:
  double alpha_;
  std::size_t horizon_;
  std::vector<double> probs_;
  std::vector<double> survival_;
  double tail_mass_;
  double normalizer_;
  TailModel tail_model_;
};

/// Canonical kernel n^{-(1+alpha)} / sum_{m<=horizon} m^{-(1+alpha)}, no tail mass.
RenewalKernel make_kernel(double alpha, std::size_t horizon);
/// Same shape normalised by zeta(1+alpha); the missing mass becomes tail_mass.
RenewalKernel make_kernel_infinite(double alpha, std::size_t horizon);
/// Arbitrary law K(1..H) given as probs[0..H-1]; tail_mass = 1 - sum.
RenewalKernel kernel_from_probs(double alpha, std::vector<double> probs_from_one);

/// Hurwitz-type tail sum_{m >= from} m^{-s}, s > 1 (Euler-Maclaurin).
double zeta_tail(double s, std::size_t from);
double riemann_zeta(double s);

/// u(0..N) = P[n in tau]. Holds a copy of the kernel it came from.
struct RenewalMassTable {
  double alpha;
  std::vector<double> u;
  RenewalKernel kernel;

  std::size_t length() const { return u.size() - 1; }
};

RenewalMassTable mass_table(const RenewalKernel& kernel, std::size_t n);

/// Renewal recursion on an arbitrary (possibly defective) kernel K(1..H).
std::vector<double> renewal_mass(std::span<const double> probs, std::size_t n);

/// max_n |u(n) - sum_k K(k) u(n-k)| over the table.
double renewal_residual(const RenewalMassTable& table);

/// Law of the first common point of two independent copies of tau.
struct IntersectionKernel {
  std::vector<double> ktilde;  ///< element 0 is 0
  double total_mass = 0.0;
  bool recurrent = false;      ///< alpha >= 1/2
  double max_clamped = 0.0;    ///< largest |negative| value clamped to 0

  std::size_t length() const { return ktilde.size() - 1; }
  /// 1 - sum_{n <= d} Ktilde(n)
  double survival(std::size_t d) const;
};

IntersectionKernel intersection_kernel(const RenewalMassTable& mass, std::size_t l_max);

/// D_gamma(N) = sum_{n=1}^N u(n)^exponent.
double overlap_sum(const RenewalMassTable& mass, double exponent, std::size_t n);

/// Inverse-CDF sampler for the jump law; jumps beyond the horizon return 0.
class GapSampler {
 public:
  explicit GapSampler(const RenewalKernel& kernel);
  /// Jump length in 1..horizon, or 0 for "beyond the horizon".
  std::size_t operator()(double uniform) const;

 private:
  std::vector<double> cdf_;
};

std::vector<std::size_t> sample_path(const RenewalKernel& kernel, std::size_t n,
                                     std::uint64_t seed);

/// Renewal path conditioned on {N in tau}.
std::vector<std::size_t> sample_bridge(const RenewalMassTable& mass, std::size_t n,
                                       std::uint64_t seed);

/// g(x) = -log(sum_n e^{-nx} K(n)), tail mass as an atom at horizon+1.
double homogeneous_g(const RenewalKernel& kernel, double x);
/// g'(x)
double homogeneous_g_derivative(const RenewalKernel& kernel, double x);
/// Pure free energy: 0 for h <= 0, g^{-1}(h) otherwise.
double homogeneous_free_energy(const RenewalKernel& kernel, double h);

}  // namespace pinning
