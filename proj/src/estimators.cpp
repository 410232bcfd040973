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

#include "pinning/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinning/errors.hpp"
#include "pinning/rng.hpp"

namespace pinning {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCertificateBlocks = 8;

// Column j of a replica-major table.
std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows[r][j];
  return out;
}

}  // namespace

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) {
  return derive_seed(seed, replica);
}

std::vector<PartitionResult> replica_partitions(const RenewalKernel& kernel,
                                                const DisorderSpec& spec,
                                                const PolymerParams& params,
                                                std::size_t replicas, std::uint64_t seed,
                                                ParallelPolicy policy) {
  return map_replicas<PartitionResult>(
      replicas,
      [&](std::size_t r) {
        const auto env = sample_env(spec, params.n, replica_seed(seed, r));
        return partition(params, env, kernel, PartitionOptions{false});
      },
      policy);
}

FreeEnergyEstimate quenched_free_energy(const RenewalKernel& kernel, const DisorderSpec& spec,
                                        double beta, double h, std::size_t n,
                                        std::size_t replicas, std::uint64_t seed,
                                        ParallelPolicy policy) {
  require(replicas >= 30, "quenched_free_energy: replicas must be >= 30");
  require(n >= 2, "quenched_free_energy: N must be >= 2");
  const PolymerParams params{beta, h, n};
  const auto results = replica_partitions(kernel, spec, params, replicas, seed, policy);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> free_vals(replicas), constrained_vals(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    free_vals[r] = results[r].log_z_free * inv_n;
    constrained_vals[r] = results[r].log_z_constrained * inv_n;
  }
  const auto fs = summarize(free_vals);
  const auto cs = summarize(constrained_vals);
  FreeEnergyEstimate out;
  out.beta = beta;
  out.h = h;
  out.n = n;
  out.replicas = replicas;
  out.log_correction = kernel.alpha() + 2.0;
  out.raw_mean = fs.mean;
  out.value = fs.mean - out.log_correction * std::log(static_cast<double>(n)) * inv_n;
  out.stderr_value = fs.stderr_mean;
  out.constrained_value = cs.mean;
  out.constrained_stderr = cs.stderr_mean;
  out.annealed_value = homogeneous_free_energy(kernel, h);
  out.convexity_as_written = out.annealed_value;  // log E[1 + beta omega] = 0
  const double mlog = mean_log_weight(spec, beta);
  out.convexity_corrected = homogeneous_free_energy(kernel, h + mlog);
  out.hc_upper = -mlog;
  return out;
}

double conservative_upper(std::span<const double> xs, std::size_t blocks, double z) {
  const auto mean = estimate_mean(xs, z);
  double upper = mean.ci_high;
  if (xs.size() >= blocks) upper = std::max(upper, estimate_median_of_means(xs, blocks).ci_high);
  return upper;
}

MomentEstimate fractional_moment(const RenewalKernel& kernel, const DisorderSpec& spec, double p,
                                 double beta, double h, std::size_t n, std::size_t replicas,
                                 std::uint64_t seed, bool force, ParallelPolicy policy) {
  require(p > 0.0, "fractional_moment: p must be positive");
  if (p >= spec.gamma && !force) {
    std::ostringstream os;
    os << "fractional_moment: p = " << p << " >= gamma = " << spec.gamma
       << " gives an infinite moment (use --force to run anyway)";
    throw PreconditionError(os.str());
  }
  const std::size_t blocks = mom_blocks(0.05);
  require(replicas >= blocks, "fractional_moment: replicas must be >= the block count");
  const PolymerParams params{beta, h, n};
  const auto results = replica_partitions(kernel, spec, params, replicas, seed, policy);
  std::vector<double> xs(replicas);
  for (std::size_t r = 0; r < replicas; ++r) xs[r] = std::exp(p * results[r].log_z_free);
  auto est = estimate_median_of_means(xs, blocks);
  est.p = p;
  est.n = n;
  return est;
}

SecondMomentResult exact_second_moment_truncated(const TruncationContext& ctx,
                                                 const IntersectionKernel& intersection,
                                                 std::size_t n) {
  SecondMomentResult out;
  out.n = n;
  out.log_value = log_intersection_pinning(intersection, ctx.chi_exact, n);
  out.value = std::exp(out.log_value);
  out.value_with_chi = std::exp(log_intersection_pinning(intersection, ctx.chi, n));
  return out;
}

std::vector<double> truncated_square_samples(const RenewalKernel& kernel,
                                             const DisorderSpec& spec,
                                             const TruncationContext& ctx, std::size_t n,
                                             std::size_t replicas, std::uint64_t seed,
                                             ParallelPolicy policy) {
  const PolymerParams params{ctx.beta, ctx.h_beta, n};
  return map_replicas<double>(
      replicas,
      [&](std::size_t r) {
        const auto env = cap_environment(sample_env(spec, n, replica_seed(seed, r)), ctx.cutoff);
        return std::exp(2.0 * partition(params, env, kernel, PartitionOptions{false}).log_z_free);
      },
      policy);
}

CopachiCheck copachi_check(const TruncationContext& ctx, const IntersectionKernel& intersection) {
  require(intersection.length() >= ctx.n_beta,
          "copachi_check: intersection table shorter than N_beta");
  double mass = 0.0;
  for (std::size_t m = ctx.n_beta; m >= 1; --m) mass += intersection.ktilde[m];
  CopachiCheck out;
  out.lhs = std::log(mass);
  out.rhs = -2.0 * ctx.chi;
  out.holds = out.lhs <= out.rhs;
  return out;
}

SpineSample spine_sample(const RenewalKernel& kernel, const DisorderSpec& spec, double beta,
                         std::size_t n, std::uint64_t seed) {
  require(beta >= 0.0 && beta < 1.0, "spine_sample: beta must lie in [0,1)");
  SpineSample out;
  out.points = sample_path(kernel, n, seed);
  out.env = sample_env(spec, n, seed);
  const TiltedSampler tilted(spec, beta);
  for (std::size_t p : out.points) {
    if (p == 0) continue;
    CounterRng rng(seed, make_stream(Stream::spine, p));
    out.env.values[p] = tilted(rng);
  }
  return out;
}

namespace {

// sum_{m > from} (c m^{-(1-alpha)})^power from the asymptotic u(m) ~ c m^{alpha-1}.
double asymptotic_mass_tail(double c, double alpha, double power, std::size_t from) {
  const double s = (1.0 - alpha) * power;
  if (s <= 1.0) return kInf;
  return std::pow(c, power) * zeta_tail(s, from + 1);
}

}  // namespace

IrrelevanceCertificate irrelevance_certificate(const RenewalMassTable& mass,
                                               const IntersectionKernel& intersection,
                                               const DisorderSpec& spec, double beta, double q,
                                               std::size_t L, std::size_t n_max,
                                               std::size_t replicas, std::uint64_t seed,
                                               ParallelPolicy policy) {
  const double alpha = mass.alpha;
  const double g = spec.gamma;
  require(alpha < 1.0, "irrelevance_certificate: alpha must be < 1");
  const double q_low = alpha / (1.0 - alpha);
  if (q_low >= g - 1.0) {
    throw PreconditionError(
        "irrelevance_certificate: alpha >= (gamma-1)/gamma, not in the irrelevant regime");
  }
  if (!(q > q_low && q < g - 1.0)) {
    std::ostringstream os;
    os << "irrelevance_certificate: q must lie in (" << q_low << ", " << g - 1.0 << ")";
    throw PreconditionError(os.str());
  }
  require(L >= 1 && L <= intersection.length(), "irrelevance_certificate: L outside the table");
  require(n_max <= mass.length(), "irrelevance_certificate: n_max exceeds the mass table");
  require(L <= mass.length(), "irrelevance_certificate: L exceeds the mass table");
  require(replicas >= kCertificateBlocks, "irrelevance_certificate: too few replicas");

  IrrelevanceCertificate out;
  out.q = q;
  out.L = L;
  out.n_max = n_max;
  const auto& u = mass.u;
  const std::size_t top = mass.length();
  const double c_prime = u[top] * std::pow(static_cast<double>(top), 1.0 - alpha);

  double t1 = 0.0;
  for (std::size_t m = top; m >= L; --m) t1 += std::pow(u[m], q + 1.0);
  out.term1_tail = asymptotic_mass_tail(c_prime, alpha, q + 1.0, top);
  out.term1 = t1 + out.term1_tail;

  const auto rows = map_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) {
        const auto env = tilt_sample(spec, beta, n_max, replica_seed(seed, r));
        auto prof = log_truncated_gap_profile(intersection, L, n_max, env, beta, 0.0);
        for (double& x : prof) x = std::exp(q * x);
        return prof;
      },
      policy);
  out.moment_upper.resize(n_max + 1);
  double t2 = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const auto col = column(rows, n);
    out.moment_upper[n] = conservative_upper(col, kCertificateBlocks, kZ95);
    t2 += std::pow(u[n], 1.0 - q) * out.moment_upper[n];
    out.ratio_constant = std::max(out.ratio_constant, out.moment_upper[n] / std::pow(u[n], 2.0 * q));
  }
  double tail = 0.0;
  for (std::size_t n = n_max + 1; n <= top; ++n) tail += std::pow(u[n], 1.0 + q);
  tail += asymptotic_mass_tail(c_prime, alpha, 1.0 + q, top);
  out.term2_tail = out.ratio_constant * tail;
  out.term2 = t2 + out.term2_tail;
  out.product = out.term1 * out.term2;
  out.certified = out.product < 1.0;
  return out;
}

std::vector<double> kernel_power_suffix(const RenewalKernel& kernel, double theta) {
  const std::size_t horizon = kernel.horizon();
  std::vector<double> t(horizon + 2, 0.0);
  double tail = 0.0;
  if (kernel.tail_model() == TailModel::power_law) {
    const double s = (1.0 + kernel.alpha()) * theta;
    tail = s > 1.0 ? std::pow(kernel.normalizer(), -theta) * zeta_tail(s, horizon + 1) : kInf;
  } else if (kernel.tail_mass() > 0.0) {
    tail = std::pow(kernel.tail_mass(), theta);  // atom at horizon + 1
  }
  t[horizon + 1] = tail;
  for (std::size_t d = horizon; d >= 1; --d) t[d] = t[d + 1] + std::pow(kernel(d), theta);
  t[0] = t[1];
  return t;
}

RhoCertificate rho_certificate(const RenewalKernel& kernel, const DisorderSpec& spec,
                               double beta, double h, std::size_t k, std::size_t replicas,
                               std::uint64_t seed, ParallelPolicy policy) {
  require(k >= 3, "rho_certificate: k must be >= 3 so that theta = 1 - 1/log k lies in (0,1)");
  require(replicas >= kCertificateBlocks, "rho_certificate: too few replicas");
  RhoCertificate out;
  out.beta = beta;
  out.h = h;
  out.k = k;
  out.replicas = replicas;
  out.theta = 1.0 - 1.0 / std::log(static_cast<double>(k));
  const double theta = out.theta;
  const PolymerParams params{beta, h, k - 1};
  const auto rows = map_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) {
        const auto env = sample_env(spec, k - 1, replica_seed(seed, r));
        auto prof = log_constrained_profile(params, env, kernel);
        for (double& x : prof) x = std::exp(theta * x);
        return prof;
      },
      policy);
  out.a_values.assign(k, 1.0);
  out.a_point.assign(k, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    const auto col = column(rows, j);
    out.a_point[j] = summarize(col).mean;
    out.a_values[j] = conservative_upper(col, kCertificateBlocks, kZ95);
  }
  out.disorder_factor = std::exp(theta * h) * moment_power(spec, beta, theta);
  const auto suffix = kernel_power_suffix(kernel, theta);
  const std::size_t horizon = kernel.horizon();
  const double s_exp = (1.0 + kernel.alpha()) * theta;
  auto tail_from = [&](std::size_t d) {
    if (d <= horizon + 1) return suffix[d];
    if (kernel.tail_model() == TailModel::power_law) {
      return s_exp > 1.0 ? std::pow(kernel.normalizer(), -theta) * zeta_tail(s_exp, d) : kInf;
    }
    return 0.0;
  };
  double up = 0.0, point = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double s = tail_from(k - j);
    up += out.a_values[j] * s;
    point += out.a_point[j] * s;
  }
  out.rho_upper = out.disorder_factor * up;
  out.rho_point = out.disorder_factor * point;
  out.certified = out.rho_upper <= 1.0;
  return out;
}

double h2_beta(double alpha, double gamma, double beta, double c2) {
  require(beta > 0.0 && beta < 1.0, "h2_beta: beta must lie in (0,1)");
  require(c2 > 0.0, "h2_beta: c2 must be positive");
  require(alpha > 1.0 - 1.0 / gamma, "h2_beta: alpha must exceed 1 - 1/gamma");
  const double lg = std::abs(std::log(beta)) + 1.0;
  if (std::abs(alpha - 1.0) < 1e-12) return c2 * std::pow(beta, gamma) / std::pow(lg, 3.0 * gamma - 2.0);
  if (alpha > 1.0) return c2 * std::pow(beta / lg, gamma);
  return c2 * std::pow(beta / lg, alpha * gamma / (1.0 - gamma * (1.0 - alpha)));
}

std::size_t k_for_h(double alpha, double h) {
  require(h > 0.0, "k_for_h: h must be positive");
  double k = 0.0;
  if (std::abs(alpha - 1.0) < 1e-12) {
    const double lh = std::abs(std::log(h));
    k = 1.0 / (h * lh * lh);
  } else if (alpha > 1.0) {
    k = 1.0 / h;
  } else {
    k = std::pow(h, -1.0 / alpha);
  }
  require(k < 1e12, "k_for_h: k exceeds the supported range");
  return std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(k)));
}

FracMomentProfile fracmoment_profile(const RenewalKernel& kernel, const DisorderSpec& spec,
                                     double beta, double h, std::size_t k, double eta,
                                     std::size_t replicas, std::uint64_t seed,
                                     ParallelPolicy policy) {
  require(k >= 3, "fracmoment_profile: k must be >= 3");
  require(eta > 0.0, "fracmoment_profile: eta must be positive");
  FracMomentProfile out;
  out.eta = eta;
  out.penalty = penalty_functionals(spec, beta, h, k);
  out.theta = out.penalty.theta;
  const double theta = out.theta;
  const auto mass = mass_table(kernel, k - 1);
  const auto lp = log_penalized_annealed_profile(out.penalty.eta1, out.penalty.eta2, k - 1, kernel);
  const double log_cost = std::log(out.penalty.cost);
  out.holder_bound.resize(k);
  out.target.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.holder_bound[j] = std::exp(static_cast<double>(j) * (1.0 - theta) * log_cost + theta * lp[j]);
    const bool short_range = static_cast<double>(j) < eta * static_cast<double>(k);
    out.target[j] = (short_range ? 2.0 * std::exp(2.0) : eta) * mass.u[j];
  }
  const PolymerParams params{beta, h, k - 1};
  const auto rows = map_replicas<std::vector<double>>(
      replicas,
      [&](std::size_t r) {
        const auto env = sample_env(spec, k - 1, replica_seed(seed, r));
        auto prof = log_constrained_profile(params, env, kernel);
        for (double& x : prof) x = std::exp(theta * x);
        return prof;
      },
      policy);
  out.mc_point.assign(k, 1.0);
  out.mc_low.assign(k, 1.0);
  out.mc_high.assign(k, 1.0);
  out.holder_consistent = true;
  out.bound_meets_target = true;
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) {
      const auto col = column(rows, j);
      const auto mean = estimate_mean(col, kZ95);
      out.mc_point[j] = mean.point_estimate;
      double low = mean.ci_low;
      if (col.size() >= kCertificateBlocks) {
        low = std::min(low, estimate_median_of_means(col, kCertificateBlocks).ci_low);
      }
      out.mc_low[j] = low;
      out.mc_high[j] = conservative_upper(col, kCertificateBlocks, kZ95);
    }
    if (out.holder_bound[j] < out.mc_low[j]) out.holder_consistent = false;
    if (out.holder_bound[j] > out.target[j]) out.bound_meets_target = false;
  }
  return out;
}

CriticalPoint critical_point(double beta, const RenewalKernel& kernel, const DisorderSpec& spec,
                             std::size_t n, std::size_t replicas, double tol, std::uint64_t seed,
                             CriticalPointOptions options, ParallelPolicy policy) {
  require(tol > 0.0, "critical_point: tol must be positive");
  require(beta >= 0.0 && beta < 1.0, "critical_point: beta must lie in [0,1)");
  CriticalPoint out;
  if (beta == 0.0) {
    // Pure model: F(h) > 0 exactly for h > 0.
    out.converged = true;
    out.note = "pure model, exact";
    return out;
  }
  require(options.threshold >= 0.0, "critical_point: threshold must be nonnegative");
  const double threshold = options.threshold;
  auto above = [&](double h) {
    ++out.evaluations;
    const auto e = quenched_free_energy(kernel, spec, beta, h, n, replicas, seed, policy);
    return e.value - 3.0 * e.stderr_value > threshold;
  };
  auto below = [&](double h) {
    ++out.evaluations;
    const auto e = quenched_free_energy(kernel, spec, beta, h, n, replicas, seed, policy);
    if (e.raw_mean + 3.0 * e.stderr_value < threshold) return true;
    if (!options.use_rho) return false;
    const std::size_t k = std::min(k_for_h(kernel.alpha(), h), options.rho_k_max);
    return rho_certificate(kernel, spec, beta, h, k, options.rho_replicas, seed, policy).certified;
  };
  double lo = 0.0;
  double hi = options.h_max;
  if (!above(hi)) {
    out.h_c_low = 0.0;
    out.h_c_high = options.h_max;
    out.note = "no localized bracket within [0, h_max]";
    return out;
  }
  while (hi - lo > 0.5 * tol) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
  }
  out.h_c_high = hi;
  lo = 0.0;
  hi = out.h_c_high;
  while (hi - lo > 0.5 * tol) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? lo : hi) = mid;
  }
  out.h_c_low = lo;
  out.converged = out.h_c_high - out.h_c_low <= tol;
  if (!out.converged) out.note = "undecided band wider than tol";
  return out;
}

ExponentFit fit_exponent(std::span<const double> xs, std::span<const double> ys,
                         std::string window) {
  require(xs.size() >= 4, "fit_exponent: need at least 4 points");
  const auto fit = least_squares(xs, ys);
  ExponentFit out;
  out.xs.assign(xs.begin(), xs.end());
  out.ys.assign(ys.begin(), ys.end());
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.stderr_slope = fit.slope_stderr;
  out.residuals = fit.residuals;
  out.window = std::move(window);
  return out;
}

PaleyZygmundCheck paley_zygmund_check(std::span<const double> samples, double p, double theta) {
  require(p > 1.0, "paley_zygmund_check: p must exceed 1");
  require(theta > 0.0 && theta < 1.0, "paley_zygmund_check: theta must lie in (0,1)");
  require(!samples.empty(), "paley_zygmund_check: no samples");
  double m1 = 0.0, mp = 0.0;
  for (double x : samples) {
    require(x > 0.0, "paley_zygmund_check: samples must be positive");
    m1 += x;
    mp += std::pow(x, p);
  }
  const double n = static_cast<double>(samples.size());
  m1 /= n;
  mp /= n;
  std::size_t hits = 0;
  for (double x : samples) hits += x >= theta * m1 ? 1 : 0;
  PaleyZygmundCheck out;
  out.lhs = static_cast<double>(hits) / n;
  const double pp = p / (p - 1.0);
  out.rhs = std::exp(pp * std::log1p(-theta) + pp * std::log(m1) - std::log(mp) / (p - 1.0));
  // Wilson score interval for the hit frequency.
  const double z = kZ95;
  const double denom = 1.0 + z * z / n;
  const double centre = (out.lhs + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(out.lhs * (1.0 - out.lhs) / n + z * z / (4.0 * n * n)) / denom;
  out.lhs_ci_low = centre - half;
  out.lhs_ci_high = centre + half;
  out.holds = out.lhs >= out.rhs * (1.0 - 1e-12);
  return out;
}

}  // namespace pinning
