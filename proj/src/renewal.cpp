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

#include "pinning/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pinning/errors.hpp"
#include "pinning/rng.hpp"

namespace pinning {

RenewalKernel::RenewalKernel(double alpha, std::vector<double> probs_from_one, double tail_mass,
                             double normalizer, TailModel tail_model)
    : alpha_(alpha),
      horizon_(probs_from_one.size()),
      tail_mass_(tail_mass),
      normalizer_(normalizer),
      tail_model_(tail_model) {
  require(alpha > 0.0, "kernel: alpha must be positive");
  require(horizon_ >= 1, "kernel: empty probability table");
  require(tail_mass >= 0.0 && tail_mass < 1.0, "kernel: tail_mass must lie in [0,1)");
  probs_.reserve(horizon_ + 1);
  probs_.push_back(0.0);
  for (double p : probs_from_one) {
    require(p >= 0.0 && std::isfinite(p), "kernel: probabilities must be finite and >= 0");
    probs_.push_back(p);
  }
  // Suffix sums from the small end keep P[tau_1 > d] accurate for large d.
  survival_.assign(horizon_ + 1, 0.0);
  double acc = tail_mass_;
  for (std::size_t d = horizon_; d-- > 0;) {
    acc += probs_[d + 1];
    survival_[d] = acc;
  }
  const double total = survival_[0];
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "kernel: sum K + tail_mass = " << total << " differs from 1";
    throw PreconditionError(os.str());
  }
}

double zeta_tail(double s, std::size_t from) {
  require(s > 1.0, "zeta_tail: exponent must exceed 1");
  require(from >= 1, "zeta_tail: start index must be >= 1");
  constexpr std::size_t kDirect = 32;
  double direct = 0.0;
  std::size_t m = from;
  for (; m < kDirect; ++m) direct += std::pow(static_cast<double>(m), -s);
  // Euler-Maclaurin from m with Bernoulli corrections up to B_8.
  const double x = static_cast<double>(m);
  const double xs = std::pow(x, -s);
  double tail = x * xs / (s - 1.0) + 0.5 * xs;
  double term = s * xs / x;  // s x^{-s-1}
  tail += term / 12.0;
  term *= (s + 1.0) * (s + 2.0) / (x * x);
  tail -= term / 720.0;
  term *= (s + 3.0) * (s + 4.0) / (x * x);
  tail += term / 30240.0;
  term *= (s + 5.0) * (s + 6.0) / (x * x);
  tail -= term / 1209600.0;
  return direct + tail;
}

double riemann_zeta(double s) { return zeta_tail(s, 1); }

namespace {

std::vector<double> power_weights(double alpha, std::size_t horizon) {
  std::vector<double> w(horizon);
  for (std::size_t n = 1; n <= horizon; ++n) {
    w[n - 1] = std::pow(static_cast<double>(n), -(1.0 + alpha));
  }
  return w;
}

}  // namespace

RenewalKernel make_kernel(double alpha, std::size_t horizon) {
  require(alpha > 0.0, "make_kernel: alpha must be positive");
  require(horizon >= 2, "make_kernel: horizon must be >= 2");
  auto w = power_weights(alpha, horizon);
  double z = 0.0;
  for (std::size_t i = horizon; i-- > 0;) z += w[i];
  if (!std::isfinite(z) || z <= 0.0) throw NumericalError("make_kernel: non-finite normalizer");
  for (double& x : w) x /= z;
  // Absorb the rounding residue so that the sum is 1 to the last ulp.
  double s = 0.0;
  for (std::size_t i = horizon; i-- > 0;) s += w[i];
  w[0] += 1.0 - s;
  return RenewalKernel(alpha, std::move(w), 0.0, z, TailModel::none);
}

RenewalKernel make_kernel_infinite(double alpha, std::size_t horizon) {
  require(alpha > 0.0, "make_kernel_infinite: alpha must be positive");
  require(horizon >= 2, "make_kernel_infinite: horizon must be >= 2");
  const double z = riemann_zeta(1.0 + alpha);
  if (!std::isfinite(z)) throw NumericalError("make_kernel_infinite: non-finite normalizer");
  auto w = power_weights(alpha, horizon);
  for (double& x : w) x /= z;
  const double tail = zeta_tail(1.0 + alpha, horizon + 1) / z;
  double s = tail;
  for (std::size_t i = horizon; i-- > 0;) s += w[i];
  w[0] += 1.0 - s;
  return RenewalKernel(alpha, std::move(w), tail, z, TailModel::power_law);
}

RenewalKernel kernel_from_probs(double alpha, std::vector<double> probs_from_one) {
  double s = 0.0;
  for (std::size_t i = probs_from_one.size(); i-- > 0;) s += probs_from_one[i];
  require(s <= 1.0 + 1e-12, "kernel_from_probs: probabilities sum above 1");
  const double tail = std::max(0.0, 1.0 - s);
  return RenewalKernel(alpha, std::move(probs_from_one), tail, 1.0, TailModel::none);
}

std::vector<double> renewal_mass(std::span<const double> probs, std::size_t n) {
  const std::size_t horizon = probs.empty() ? 0 : probs.size() - 1;
  std::vector<double> u(n + 1, 0.0);
  u[0] = 1.0;
  const double* k = probs.data();
  for (std::size_t m = 1; m <= n; ++m) {
    const std::size_t top = std::min(m, horizon);
    const double* um = u.data() + m;
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 1; j <= top; ++j) acc += k[j] * um[-static_cast<std::ptrdiff_t>(j)];
    u[m] = acc;
  }
  return u;
}

RenewalMassTable mass_table(const RenewalKernel& kernel, std::size_t n) {
  return RenewalMassTable{kernel.alpha(), renewal_mass(kernel.probs(), n), kernel};
}

double renewal_residual(const RenewalMassTable& table) {
  const auto& u = table.u;
  double worst = std::abs(u[0] - 1.0);
  for (std::size_t m = 1; m < u.size(); ++m) {
    const std::size_t top = std::min(m, table.kernel.horizon());
    long double acc = 0.0L;
    for (std::size_t j = top; j >= 1; --j) acc += static_cast<long double>(table.kernel(j)) * u[m - j];
    worst = std::max(worst, static_cast<double>(std::abs(static_cast<long double>(u[m]) - acc)));
  }
  return worst;
}

double IntersectionKernel::survival(std::size_t d) const {
  double acc = 0.0;
  const std::size_t top = std::min(d, length());
  for (std::size_t n = 1; n <= top; ++n) acc += ktilde[n];
  return 1.0 - acc;
}

IntersectionKernel intersection_kernel(const RenewalMassTable& mass, std::size_t l_max) {
  require(l_max <= mass.length(), "intersection_kernel: L_max exceeds the mass table");
  std::vector<double> ut(l_max + 1);
  for (std::size_t n = 0; n <= l_max; ++n) ut[n] = mass.u[n] * mass.u[n];
  IntersectionKernel out;
  out.ktilde.assign(l_max + 1, 0.0);
  out.recurrent = mass.alpha >= 0.5;
  for (std::size_t n = 1; n <= l_max; ++n) {
    double acc = 0.0;
    const double* kt = out.ktilde.data();
    const double* un = ut.data() + n;
#pragma omp simd reduction(+ : acc)
    for (std::size_t k = 1; k < n; ++k) acc += kt[k] * un[-static_cast<std::ptrdiff_t>(k)];
    double value = ut[n] - acc;
    if (value < 0.0) {
      if (value < -1e-9) {
        std::ostringstream os;
        os << "intersection_kernel: inversion failure at n=" << n << " (Ktilde=" << value << ")";
        throw NumericalError(os.str());
      }
      out.max_clamped = std::max(out.max_clamped, -value);
      value = 0.0;
    }
    out.ktilde[n] = value;
  }
  for (std::size_t n = l_max; n >= 1; --n) out.total_mass += out.ktilde[n];
  return out;
}

double overlap_sum(const RenewalMassTable& mass, double exponent, std::size_t n) {
  require(exponent > 0.0, "overlap_sum: exponent must be positive");
  require(n <= mass.length(), "overlap_sum: N exceeds the mass table");
  double acc = 0.0;
  for (std::size_t m = 1; m <= n; ++m) acc += std::pow(mass.u[m], exponent);
  return acc;
}

GapSampler::GapSampler(const RenewalKernel& kernel) : cdf_(kernel.horizon() + 1) {
  for (std::size_t k = 0; k <= kernel.horizon(); ++k) cdf_[k] = 1.0 - kernel.survival(k);
}

std::size_t GapSampler::operator()(double uniform) const {
  if (uniform > cdf_.back()) return 0;
  const auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), uniform);
  return static_cast<std::size_t>(it - cdf_.begin());
}

std::vector<std::size_t> sample_path(const RenewalKernel& kernel, std::size_t n,
                                     std::uint64_t seed) {
  const GapSampler gaps(kernel);
  CounterRng rng(seed, make_stream(Stream::path, 0));
  std::vector<std::size_t> points{0};
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t gap = gaps(rng.uniform());
    if (gap == 0 || gap > n - pos) break;
    pos += gap;
    points.push_back(pos);
  }
  return points;
}

std::vector<std::size_t> sample_bridge(const RenewalMassTable& mass, std::size_t n,
                                       std::uint64_t seed) {
  require(n <= mass.length(), "sample_bridge: N exceeds the mass table");
  require(mass.u[n] > 0.0, "sample_bridge: u(N) must be positive");
  const auto& kernel = mass.kernel;
  const auto& u = mass.u;
  CounterRng rng(seed, make_stream(Stream::bridge, 0));
  std::vector<std::size_t> points{0};
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t rest = n - pos;
    const double target = rng.uniform() * u[rest];
    const std::size_t top = std::min(rest, kernel.horizon());
    double acc = 0.0;
    std::size_t chosen = 0;
    for (std::size_t k = 1; k <= top; ++k) {
      const double w = kernel(k) * u[rest - k];
      if (w > 0.0) chosen = k;
      acc += w;
      if (acc >= target && w > 0.0) break;
    }
    if (chosen == 0) throw NumericalError("sample_bridge: no admissible jump");
    pos += chosen;
    points.push_back(pos);
  }
  return points;
}

namespace {

// Returns (1 - S(x), S(x)) where S(x) = sum_n e^{-nx} K(n) + tail e^{-(H+1)x}.
// The deficit is accumulated directly so that small x keeps full precision.
std::pair<double, double> laplace_parts(const RenewalKernel& kernel, double x) {
  const std::size_t horizon = kernel.horizon();
  double deficit = 0.0;
  std::size_t n = 1;
  for (; n <= horizon; ++n) {
    const double nx = static_cast<double>(n) * x;
    if (nx > 40.0) break;
    deficit += kernel(n) * -std::expm1(-nx);
  }
  if (n <= horizon) {
    deficit += kernel.survival(n - 1);
  } else {
    deficit += kernel.tail_mass() * -std::expm1(-static_cast<double>(horizon + 1) * x);
  }
  double s = 0.0;
  if (deficit >= 0.5) {
    for (std::size_t m = 1; m <= horizon; ++m) {
      const double mx = static_cast<double>(m) * x;
      if (mx > 745.0) break;
      s += kernel(m) * std::exp(-mx);
    }
    s += kernel.tail_mass() * std::exp(-static_cast<double>(horizon + 1) * x);
  } else {
    s = 1.0 - deficit;
  }
  return {deficit, s};
}

}  // namespace

double homogeneous_g(const RenewalKernel& kernel, double x) {
  require(x >= 0.0, "homogeneous_g: x must be nonnegative");
  if (x == 0.0) return 0.0;
  const auto [deficit, s] = laplace_parts(kernel, x);
  if (deficit < 0.5) return -std::log1p(-deficit);
  return -std::log(s);
}

double homogeneous_g_derivative(const RenewalKernel& kernel, double x) {
  const std::size_t horizon = kernel.horizon();
  double num = 0.0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    const double nx = static_cast<double>(n) * x;
    if (nx > 745.0) break;
    num += static_cast<double>(n) * kernel(n) * std::exp(-nx);
  }
  const double hx = static_cast<double>(horizon + 1);
  num += hx * kernel.tail_mass() * std::exp(-hx * x);
  const auto [deficit, s] = laplace_parts(kernel, x);
  (void)deficit;
  return num / s;
}

double homogeneous_free_energy(const RenewalKernel& kernel, double h) {
  if (!(h > 0.0)) return 0.0;
  double lo = 0.0;
  double hi = h;  // g(x) >= x because every jump is >= 1
  while (homogeneous_g(kernel, hi) < h) hi *= 2.0;
  double x = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const double gx = homogeneous_g(kernel, x) - h;
    if (gx == 0.0) return x;
    if (gx > 0.0) hi = x; else lo = x;
    const double slope = homogeneous_g_derivative(kernel, x);
    double next = x - gx / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 1e-16 * hi) return next;
    x = next;
  }
  return x;
}

}  // namespace pinning
