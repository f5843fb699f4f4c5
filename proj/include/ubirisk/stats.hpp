// Copyright 2026 The ubirisk Authors
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

#include <cmath>
#include <span>
#include <vector>

namespace ubirisk {

double mean(std::span<const double> x);

/// Sample standard deviation with the n-1 denominator.
double sample_sd(std::span<const double> x);

/// Median; even-length inputs average the two middle order statistics.
double median(std::vector<double> x);

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Regularized incomplete beta function I_x(a, b), continued-fraction evaluation.
double inc_beta(double a, double b, double x);

/// CDF of Student's t with (possibly fractional) df degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
    double t;
    double df;  // Welch-Satterthwaite
    double p;   // two-sided
};

/// Welch's unequal-variance two-sample t-test.
/// Requires both samples of size >= 2 and nonzero variance in at least one.
TTestResult welch_t_test(std::span<const double> group0, std::span<const double> group1);

}  // namespace ubirisk
