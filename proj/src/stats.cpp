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

#include "pinning/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "pinning/errors.hpp"

namespace pinning {

SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double acc = 0.0;
  for (double x : xs) acc += x;
  s.mean = acc / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / static_cast<double>(xs.size() - 1);
  s.stderr_mean = std::sqrt(s.variance / static_cast<double>(xs.size()));
  return s;
}

std::string to_string(MomentMethod method) {
  return method == MomentMethod::mean ? "mean" : "median_of_means";
}

std::size_t mom_blocks(double delta) {
  require(delta > 0.0 && delta < 1.0, "mom_blocks: delta must lie in (0,1)");
  return static_cast<std::size_t>(std::ceil(2.0 * std::log(1.0 / delta)));
}

MomentEstimate estimate_mean(std::span<const double> xs, double z) {
  require(!xs.empty(), "estimate_mean: no samples");
  const auto s = summarize(xs);
  MomentEstimate out;
  out.method = MomentMethod::mean;
  out.replicas = xs.size();
  out.point_estimate = s.mean;
  out.stderr_mean = s.stderr_mean;
  out.ci_low = s.mean - z * s.stderr_mean;
  out.ci_high = s.mean + z * s.stderr_mean;
  return out;
}

double median(std::vector<double> xs) {
  require(!xs.empty(), "median: no samples");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) return upper;
  const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

MomentEstimate estimate_median_of_means(std::span<const double> xs, std::size_t blocks) {
  require(blocks >= 1, "median_of_means: need at least one block");
  require(xs.size() >= blocks, "median_of_means: fewer samples than blocks");
  std::vector<double> means(blocks, 0.0);
  const std::size_t n = xs.size();
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * n / blocks;
    const std::size_t hi = (b + 1) * n / blocks;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += xs[i];
    means[b] = acc / static_cast<double>(hi - lo);
  }
  MomentEstimate out;
  out.method = MomentMethod::median_of_means;
  out.replicas = n;
  out.point_estimate = median(means);
  out.ci_low = *std::min_element(means.begin(), means.end());
  out.ci_high = *std::max_element(means.begin(), means.end());
  out.stderr_mean = summarize(xs).stderr_mean;
  return out;
}

namespace {

LinearFit fit_impl(std::span<const double> xs, std::span<const double> ys,
                   std::span<const double> w, bool weighted) {
  require(xs.size() == ys.size(), "least_squares: xs and ys differ in length");
  require(xs.size() >= 2, "least_squares: need at least two points");
  const std::size_t n = xs.size();
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += w[i] * (xs[i] - mx) * (ys[i] - my);
  }
  require(sxx > 0.0, "least_squares: degenerate xs");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = ys[i] - (fit.slope * xs[i] + fit.intercept);
    fit.rss += w[i] * fit.residuals[i] * fit.residuals[i];
  }
  if (weighted) {
    fit.slope_stderr = std::sqrt(1.0 / sxx);
    fit.intercept_stderr = std::sqrt(1.0 / sw + mx * mx / sxx);
  } else if (n > 2) {
    const double s2 = fit.rss / static_cast<double>(n - 2);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return fit;
}

}  // namespace

LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const std::vector<double> w(xs.size(), 1.0);
  return fit_impl(xs, ys, w, false);
}

LinearFit weighted_least_squares(std::span<const double> xs, std::span<const double> ys,
                                 std::span<const double> sigmas) {
  require(sigmas.size() == xs.size(), "weighted_least_squares: sigma length mismatch");
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    require(sigmas[i] > 0.0, "weighted_least_squares: sigmas must be positive");
    w[i] = 1.0 / (sigmas[i] * sigmas[i]);
  }
  return fit_impl(xs, ys, w, true);
}

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace pinning
