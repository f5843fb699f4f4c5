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

#include "ubirisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ubirisk/common.hpp"

namespace ubirisk {

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> x) {
    if (x.empty()) throw NumericError("median of empty sample");
    const size_t n = x.size();
    std::nth_element(x.begin(), x.begin() + n / 2, x.end());
    double hi = x[n / 2];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(x.begin(), x.begin() + n / 2);
    return 0.5 * (lo + hi);
}

namespace {

// Lentz's continued fraction for the incomplete beta function.
double inc_beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * inc_beta_cf(a, b, x) / a;
    }
    return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    const double x = df / (df + t * t);
    const double tail = 0.5 * inc_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult welch_t_test(std::span<const double> group0, std::span<const double> group1) {
    if (group0.size() < 2 || group1.size() < 2)
        throw NumericError("welch_t_test: both samples need size >= 2");
    const double n0 = static_cast<double>(group0.size());
    const double n1 = static_cast<double>(group1.size());
    const double m0 = mean(group0);
    const double m1 = mean(group1);
    double v0 = 0.0, v1 = 0.0;
    for (double v : group0) v0 += (v - m0) * (v - m0);
    for (double v : group1) v1 += (v - m1) * (v - m1);
    v0 /= n0 - 1.0;
    v1 /= n1 - 1.0;
    if (v0 <= 0.0 && v1 <= 0.0)
        throw NumericError("welch_t_test: both samples degenerate (zero variance)");

    const double se0 = v0 / n0;
    const double se1 = v1 / n1;
    const double se = std::sqrt(se0 + se1);
    const double t = (m1 - m0) / se;
    const double df = (se0 + se1) * (se0 + se1) /
                      (se0 * se0 / (n0 - 1.0) + se1 * se1 / (n1 - 1.0));
    const double p = 2.0 * (1.0 - student_t_cdf(std::fabs(t), df));
    return {t, df, std::min(1.0, std::max(0.0, p))};
}

}  // namespace ubirisk
