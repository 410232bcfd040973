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
#include <string>
#include <vector>

namespace pinning {

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

/// Two-pass mean and variance, folded in index order.
SampleSummary summarize(std::span<const double> xs);

enum class MomentMethod { mean, median_of_means };

std::string to_string(MomentMethod method);

/// Point estimate with a two-sided 95% interval.
struct MomentEstimate {
  double p = 1.0;
  std::size_t n = 0;
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicas = 0;
  MomentMethod method = MomentMethod::mean;
  double stderr_mean = 0.0;  ///< plug-in standard error of the plain mean
};

/// Number of median-of-means blocks for confidence level 1 - delta.
std::size_t mom_blocks(double delta);

/// Mean with +-z standard errors.
MomentEstimate estimate_mean(std::span<const double> xs, double z = 1.959963984540054);

/// Median of B contiguous block means. The interval is [min, max] of the
/// block means: it covers the median of the block-mean law with probability
/// 1 - 2^{1-B}, and each block mean is a consistent estimator.
MomentEstimate estimate_median_of_means(std::span<const double> xs, std::size_t blocks);

double median(std::vector<double> xs);

/// Ordinary least squares y = slope x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::vector<double> residuals;
  double rss = 0.0;
};

LinearFit least_squares(std::span<const double> xs, std::span<const double> ys);
/// Weighted least squares with weights 1/sigma^2; slope_stderr from the weights.
LinearFit weighted_least_squares(std::span<const double> xs, std::span<const double> ys,
                                 std::span<const double> sigmas);

/// Standard normal quantile (Acklam's rational approximation, refined).
double normal_quantile(double p);

}  // namespace pinning
