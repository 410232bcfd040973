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

#include "pinning/disorder.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinning/errors.hpp"

namespace pinning {

std::string to_string(DisorderFamily family) {
  switch (family) {
    case DisorderFamily::shifted_pareto:
      return "shifted_pareto";
  }
  return "unknown";
}

DisorderFamily family_from_string(const std::string& name) {
  if (name == "shifted_pareto") return DisorderFamily::shifted_pareto;
  throw PreconditionError("unknown disorder family '" + name + "'");
}

double DisorderSpec::c_p() const { return std::pow(gamma - 1.0, gamma); }

double DisorderSpec::survival(double x) const {
  if (x <= -1.0) return 1.0;
  return std::pow(pareto_coord(x), -gamma);
}

double DisorderSpec::from_tail(double tail) const {
  return (gamma - 1.0) * std::pow(tail, -1.0 / gamma) - gamma;
}

double DisorderSpec::partial_mean_above(double x) const {
  if (x <= -1.0) return 0.0;  // E[omega] = 0
  const double s = pareto_coord(x);
  return gamma * std::pow(s, -gamma) * (s - 1.0);
}

DisorderSpec make_spec(double gamma) {
  require(gamma > 1.0 && gamma < 2.0, "make_spec: gamma must lie in (1,2)");
  return DisorderSpec{gamma, DisorderFamily::shifted_pareto};
}

EnvironmentSample sample_env(const DisorderSpec& spec, std::size_t n, std::uint64_t seed) {
  EnvironmentSample env;
  env.seed = seed;
  env.spec = spec;
  env.values.resize(n + 1);
  const std::uint64_t stream = make_stream(Stream::environment, 0);
  for (std::size_t i = 0; i <= n; ++i) env.values[i] = spec.from_tail(uniform_at(seed, stream, i));
  return env;
}

TiltedSampler::TiltedSampler(const DisorderSpec& spec, double beta) : spec_(spec), beta_(beta) {
  require(beta >= 0.0 && beta < 1.0, "tilt: beta must lie in [0,1)");
}

double TiltedSampler::operator()(CounterRng& rng) const {
  const double pick = rng.uniform();
  if (pick >= beta_) return spec_.from_tail(rng.uniform());
  const double g = spec_.gamma;
  for (;;) {
    const double y = std::pow(rng.uniform(), -1.0 / (g - 1.0));
    if (rng.uniform() * y <= y - 1.0) return (g - 1.0) * y - g;
  }
}

double TiltedSampler::acceptance_rate() const { return (1.0 - beta_) + beta_ / spec_.gamma; }

EnvironmentSample tilt_sample(const DisorderSpec& spec, double beta, std::size_t n,
                              std::uint64_t seed) {
  require(beta >= 0.0 && beta < 1.0, "tilt_sample: beta must lie in [0,1)");
  const TiltedSampler draw(spec, beta);
  EnvironmentSample env;
  env.seed = seed;
  env.spec = spec;
  env.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    CounterRng rng(seed, make_stream(Stream::tilt, i));
    env.values[i] = draw(rng);
  }
  return env;
}

namespace {

double integrate_tail(const DisorderSpec& spec, double t_max,
                      const std::function<double(double)>& f, double tolerance) {
  if (t_max <= 0.0) return 0.0;
  // t = v^2 tames the t^{-r/gamma} endpoint behaviour of power integrands.
  const double v_max = std::sqrt(t_max);
  auto integrand = [&](double v) {
    // tanh_sinh probes v down to ~1e-300; t = v^2 underflows there. The
    // tail mass below that is < 1e-290, drop it.
    const double t = v * v;
    if (t < 1e-290) return 0.0;
    const double value = f(spec.from_tail(t));
    return 2.0 * v * value;
  };
  boost::math::quadrature::tanh_sinh<double> rule;
  double error = 0.0;
  const double value = rule.integrate(integrand, 0.0, v_max, tolerance, &error);
  if (!std::isfinite(value)) throw NumericalError("quadrature produced a non-finite value");
  return value;
}

}  // namespace

double expect(const DisorderSpec& spec, const std::function<double(double)>& f,
              double tolerance) {
  return integrate_tail(spec, 1.0, f, tolerance);
}

double expect_above(const DisorderSpec& spec, double x, const std::function<double(double)>& f,
                    double tolerance) {
  return integrate_tail(spec, spec.survival(x), f, tolerance);
}

double reference_size(double gamma, double alpha, double beta, double c1, double delta) {
  const double denom = 1.0 - gamma * (1.0 - alpha);
  if (std::abs(alpha - 0.5) < 1e-12) {
    return c1 * std::pow(beta * beta * std::abs(std::log(beta)), -gamma / (2.0 - gamma));
  }
  if (alpha > 0.5) return c1 * std::pow(beta, -gamma / denom);
  return c1 * std::pow(beta, -gamma * (1.0 - delta) / denom);
}

double capped_mean(const DisorderSpec& spec, double cutoff) {
  if (cutoff <= -1.0) return cutoff;
  return -std::pow(spec.pareto_coord(cutoff), 1.0 - spec.gamma);
}

double capped_second_moment(const DisorderSpec& spec, double cutoff) {
  const double g = spec.gamma;
  if (cutoff <= -1.0) return cutoff * cutoff;
  const double s = spec.pareto_coord(cutoff);
  // int_1^s ((g-1)y - g)^2 g y^{-g-1} dy, expanded term by term.
  const double quad = (g - 1.0) * (g - 1.0) * g * (std::pow(s, 2.0 - g) - 1.0) / (2.0 - g);
  const double lin = -2.0 * g * g * (1.0 - std::pow(s, 1.0 - g));
  const double cst = g * g * (1.0 - std::pow(s, -g));
  return quad + lin + cst + cutoff * cutoff * std::pow(s, -g);
}

TruncationContext truncation_context(const DisorderSpec& spec, double kernel_alpha, double beta,
                                     double c1, double delta) {
  const double g = spec.gamma;
  require(beta > 0.0 && beta < 1.0, "truncation_context: beta must lie in (0,1)");
  require(c1 > 0.0, "truncation_context: c1 must be positive");
  require(delta >= 0.0 && delta < 1.0, "truncation_context: delta must lie in [0,1)");
  require(kernel_alpha > 1.0 - 1.0 / g && kernel_alpha < 1.0,
          "truncation_context: alpha must lie in (1 - 1/gamma, 1)");
  const double n_real = reference_size(g, kernel_alpha, beta, c1, delta);
  if (!(n_real >= 2.0)) {
    std::ostringstream os;
    os << "truncation_context: N_beta = " << n_real << " < 2 (beta too large for c1)";
    throw PreconditionError(os.str());
  }
  require(n_real < 1e15, "truncation_context: N_beta exceeds the supported range");
  TruncationContext ctx;
  ctx.beta = beta;
  ctx.alpha = kernel_alpha;
  ctx.gamma = g;
  ctx.c1 = c1;
  ctx.delta = delta;
  ctx.n_beta = static_cast<std::size_t>(std::floor(n_real));
  ctx.cutoff = std::pow(static_cast<double>(ctx.n_beta), 1.0 / g);
  ctx.mean_capped = capped_mean(spec, ctx.cutoff);
  ctx.second_capped = capped_second_moment(spec, ctx.cutoff);
  ctx.h_beta = -std::log1p(beta * ctx.mean_capped);
  ctx.chi = std::log1p(beta * beta * ctx.second_capped);
  const double shifted = 1.0 + beta * ctx.mean_capped;
  const double variance = ctx.second_capped - ctx.mean_capped * ctx.mean_capped;
  ctx.chi_exact = std::log1p(beta * beta * variance / (shifted * shifted));
  return ctx;
}

EnvironmentSample cap_environment(const EnvironmentSample& env, double cutoff) {
  EnvironmentSample out = env;
  for (double& w : out.values) w = std::min(w, cutoff);
  return out;
}

double moment_power(const DisorderSpec& spec, double beta, double r) {
  require(beta >= 0.0 && beta < 1.0, "moment_power: beta must lie in [0,1)");
  require(r >= 0.0, "moment_power: order must be nonnegative");
  if (r >= spec.gamma) return std::numeric_limits<double>::infinity();
  if (beta == 0.0 || r == 0.0) return 1.0;
  return expect(spec, [&](double w) { return std::pow(1.0 + beta * w, r); });
}

double moment_1plusq(const DisorderSpec& spec, double beta, double q) {
  require(q > 0.0, "moment_1plusq: q must be positive");
  if (q >= spec.gamma - 1.0) {
    std::ostringstream os;
    os << "moment_1plusq: q = " << q << " >= gamma - 1 = " << spec.gamma - 1.0
       << ", the moment is infinite";
    throw PreconditionError(os.str());
  }
  return moment_power(spec, beta, 1.0 + q);
}

double beta_for_moment(const DisorderSpec& spec, double q, double eps) {
  require(eps > 0.0, "beta_for_moment: eps must be positive");
  const double top = 1.0 - 1e-9;
  if (moment_1plusq(spec, top, q) <= 1.0 + eps) return top;
  double lo = 0.0;
  double hi = top;
  for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (moment_1plusq(spec, mid, q) <= 1.0 + eps) lo = mid; else hi = mid;
  }
  return lo;
}

double mean_log_weight(const DisorderSpec& spec, double beta) {
  require(beta >= 0.0 && beta < 1.0, "mean_log_weight: beta must lie in [0,1)");
  if (beta == 0.0) return 0.0;
  return expect(spec, [&](double w) { return std::log1p(beta * w); });
}

PenaltyFunctionals penalty_functionals(const DisorderSpec& spec, double beta, double h,
                                       std::size_t k) {
  require(k >= 3, "penalty_functionals: k must be >= 3");
  require(beta >= 0.0 && beta < 1.0, "penalty_functionals: beta must lie in [0,1)");
  const double logk = std::log(static_cast<double>(k));
  PenaltyFunctionals out;
  out.theta = 1.0 - 1.0 / logk;
  out.threshold = std::pow(static_cast<double>(k), 1.0 / spec.gamma);
  out.tail_prob = spec.survival(out.threshold);
  const double drop = -std::expm1(-1.0 / logk);  // 1 - e^{-1/log k}
  out.eta1 = -std::log1p(-drop * out.tail_prob);
  const double tilted_tail = out.tail_prob + beta * spec.partial_mean_above(out.threshold);
  out.eta2 = -std::log1p(-drop * tilted_tail) - h;
  out.cost = 1.0 + std::expm1(1.0 - 1.0 / logk) * out.tail_prob;
  out.cost_bound = 1.0 + (std::exp(1.0) - 1.0) * out.tail_prob;
  return out;
}

}  // namespace pinning
