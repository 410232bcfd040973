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
#include <functional>
#include <string>
#include <vector>

#include "pinning/rng.hpp"

namespace pinning {

enum class DisorderFamily { shifted_pareto };

std::string to_string(DisorderFamily family);
DisorderFamily family_from_string(const std::string& name);

/// omega = (gamma-1) Y - gamma with Y Pareto(gamma) on [1, inf).
///
/// min omega = -1, E[omega] = 0, P[omega > x] = ((x+gamma)/(gamma-1))^{-gamma}.
struct DisorderSpec {
  double gamma = 1.5;
  DisorderFamily family = DisorderFamily::shifted_pareto;

  /// x^gamma P[omega > x] -> c_p
  double c_p() const;
  /// Pareto coordinate y(x) = (x+gamma)/(gamma-1).
  double pareto_coord(double x) const { return (x + gamma) / (gamma - 1.0); }
  double survival(double x) const;
  /// omega with survival probability `tail` (inverse CDF from the top).
  double from_tail(double tail) const;
  /// E[omega 1{omega > x}]
  double partial_mean_above(double x) const;
};

DisorderSpec make_spec(double gamma);

/// One IID realisation. values[0] is an extra site used by conventions that
/// weight the starting point; values[1..N] are the lattice sites.
struct EnvironmentSample {
  std::vector<double> values;
  std::uint64_t seed = 0;
  DisorderSpec spec;

  std::size_t size() const { return values.empty() ? 0 : values.size() - 1; }
  double operator[](std::size_t n) const { return values[n]; }
};

EnvironmentSample sample_env(const DisorderSpec& spec, std::size_t n, std::uint64_t seed);

/// Exact sampler for the tilted law (1 + beta x) P[omega in dx].
///
/// (1+beta x) f = (1-beta) f + beta (1+x) f, and (1+omega) = (gamma-1)(Y-1),
/// so the second piece is the size-biased Pareto, drawn by rejection from a
/// Pareto(gamma-1) proposal with acceptance (y-1)/y.
class TiltedSampler {
 public:
  TiltedSampler(const DisorderSpec& spec, double beta);
  double operator()(CounterRng& rng) const;
  /// Probability that the first proposal is accepted: (1-beta) + beta/gamma.
  double acceptance_rate() const;
  double beta() const { return beta_; }

 private:
  DisorderSpec spec_;
  double beta_;
};

EnvironmentSample tilt_sample(const DisorderSpec& spec, double beta, std::size_t n,
                              std::uint64_t seed);

/// E[f(omega)] by tanh-sinh quadrature over the tail coordinate t in (0,1).
double expect(const DisorderSpec& spec, const std::function<double(double)>& f,
              double tolerance = 1e-12);
/// E[f(omega) 1{omega > x}]
double expect_above(const DisorderSpec& spec, double x, const std::function<double(double)>& f,
                    double tolerance = 1e-12);

/// Capping context: the environment min(omega, N_beta^{1/gamma}) and its
/// homogeneous shift/variance functionals.
struct TruncationContext {
  double beta = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double c1 = 0.0;
  double delta = 0.0;
  std::size_t n_beta = 0;
  double cutoff = 0.0;         ///< T = n_beta^{1/gamma}
  double mean_capped = 0.0;    ///< E[min(omega,T)]  (< 0)
  double second_capped = 0.0;  ///< E[min(omega,T)^2]
  double h_beta = 0.0;         ///< -log E[1 + beta omega_hat]
  double chi = 0.0;            ///< log(1 + beta^2 E[omega_hat^2])
  double chi_exact = 0.0;      ///< log E[(e^{h_beta}(1+beta omega_hat))^2]
};

/// Reference size N_beta before the integer part is taken.
double reference_size(double gamma, double alpha, double beta, double c1, double delta);

TruncationContext truncation_context(const DisorderSpec& spec, double kernel_alpha, double beta,
                                     double c1, double delta);

/// Closed form of E[min(omega,T)^2].
double capped_second_moment(const DisorderSpec& spec, double cutoff);
/// Closed form of E[min(omega,T)].
double capped_mean(const DisorderSpec& spec, double cutoff);

EnvironmentSample cap_environment(const EnvironmentSample& env, double cutoff);

/// E[(1 + beta omega)^r] for 0 <= r < gamma.
double moment_power(const DisorderSpec& spec, double beta, double r);
/// E[(1 + beta omega)^{1+q}], 0 < q < gamma - 1.
double moment_1plusq(const DisorderSpec& spec, double beta, double q);
/// Largest beta in (0,1) with E[(1+beta omega)^{1+q}] <= 1 + eps.
double beta_for_moment(const DisorderSpec& spec, double q, double eps);
/// E[log(1 + beta omega)]
double mean_log_weight(const DisorderSpec& spec, double beta);

/// Penalised change of measure g(omega) = exp(-1{omega >= k^{1/gamma}} / log k).
struct PenaltyFunctionals {
  double eta1 = 0.0;        ///< -log E[g]
  double eta2 = 0.0;        ///< -log E[g (1+beta omega)] - h
  double cost = 0.0;        ///< E[g^{-theta/(1-theta)}], theta = 1 - 1/log k
  double cost_bound = 0.0;  ///< 1 + (e-1) P[omega >= k^{1/gamma}]
  double theta = 0.0;
  double threshold = 0.0;   ///< k^{1/gamma}
  double tail_prob = 0.0;   ///< P[omega >= k^{1/gamma}]
};

PenaltyFunctionals penalty_functionals(const DisorderSpec& spec, double beta, double h,
                                       std::size_t k);

}  // namespace pinning
