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

#include <cstdint>
#include <functional>
#include <vector>

namespace ubirisk {

// Gaussian-process surrogate with a squared-exponential ARD kernel
//   k(x, x') = sigma_f^2 exp(-1/2 sum_d (x_d - x'_d)^2 / l_d^2) + noise * I,
// length scales and signal variance fit by maximizing the marginal
// likelihood; the observation noise stays at a fixed jitter.

class GaussianProcess {
  public:
    /// Hyperparameters as log values: [log sigma_f, log l_1 .. log l_D].
    struct Hyper {
        double log_sigma_f = 0.0;
        std::vector<double> log_length;
    };

    GaussianProcess(std::vector<std::vector<double>> x, std::vector<double> y,
                    double noise_var = 1e-6);

    /// Log marginal likelihood at the given hyperparameters, with the
    /// analytic gradient (same layout as Hyper) if grad is non-null.
    double log_marginal_likelihood(const Hyper& hyper, std::vector<double>* grad = nullptr) const;

    /// Multi-start gradient ascent on the marginal likelihood.
    void fit(int restarts = 3, std::uint64_t seed = 0);

    void set_hyper(const Hyper& hyper);
    const Hyper& hyper() const { return hyper_; }

    struct Posterior {
        double mean;
        double var;
    };
    Posterior posterior(const std::vector<double>& x) const;

    size_t dim() const { return dim_; }

  private:
    void refresh_cache();

    std::vector<std::vector<double>> x_;
    std::vector<double> y_;
    double y_mean_ = 0.0;
    double noise_var_;
    size_t dim_;
    Hyper hyper_;
    // Cholesky factor of K and alpha = K^-1 (y - mean), kept as flat storage.
    std::vector<double> chol_;
    std::vector<double> alpha_;
};

/// Expected improvement for maximization with exploration margin xi.
double expected_improvement(double mean, double sd, double incumbent, double xi);

struct IntBox {
    std::vector<std::pair<int, int>> bounds;  // inclusive per-dimension ranges
};

struct BayesOptResult {
    std::vector<std::vector<int>> points;
    std::vector<double> values;
    std::vector<int> best_point;
    double best_value = 0.0;
};

/// Maximizes a black-box function over an integer box: seeded initial design
/// of `initial` distinct points, then EI-guided picks until `total`
/// evaluations. EI is scanned over every unevaluated grid point.
BayesOptResult bayes_opt_max(const std::function<double(const std::vector<int>&)>& objective,
                             const IntBox& box, int initial, int total, double xi,
                             std::uint64_t seed);

}  // namespace ubirisk
