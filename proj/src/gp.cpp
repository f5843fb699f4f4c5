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

#include "ubirisk/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ubirisk/common.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

namespace ubirisk {

GaussianProcess::GaussianProcess(std::vector<std::vector<double>> x, std::vector<double> y,
                                 double noise_var)
    : x_(std::move(x)), y_(std::move(y)), noise_var_(noise_var) {
    if (x_.empty() || x_.size() != y_.size())
        throw UsageError("GaussianProcess: inputs and targets must be non-empty and aligned");
    dim_ = x_.front().size();
    for (const auto& row : x_)
        if (row.size() != dim_) throw UsageError("GaussianProcess: ragged input");
    y_mean_ = mean(y_);
    hyper_.log_sigma_f = 0.0;
    hyper_.log_length.assign(dim_, 0.0);
}

namespace {

Eigen::MatrixXd kernel_matrix(const std::vector<std::vector<double>>& x, double sigma_f2,
                              const std::vector<double>& length, double noise_var) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double q = 0.0;
            for (size_t d = 0; d < length.size(); ++d) {
                const double dx = (x[i][d] - x[j][d]) / length[d];
                q += dx * dx;
            }
            const double v = sigma_f2 * std::exp(-0.5 * q);
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) += noise_var;
    }
    return k;
}

}  // namespace

double GaussianProcess::log_marginal_likelihood(const Hyper& hyper,
                                                std::vector<double>* grad) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    const double sigma_f2 = std::exp(2.0 * hyper.log_sigma_f);
    std::vector<double> length(dim_);
    for (size_t d = 0; d < dim_; ++d) length[d] = std::exp(hyper.log_length[d]);

    Eigen::MatrixXd k = kernel_matrix(x_, sigma_f2, length, noise_var_);
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();

    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) yc(i) = y_[i] - y_mean_;
    Eigen::VectorXd alpha = llt.solve(yc);

    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
    const double ll = -0.5 * yc.dot(alpha) - log_det -
                      0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

    if (grad) {
        // dL/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)
        Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        Eigen::MatrixXd outer = alpha * alpha.transpose() - kinv;
        grad->assign(dim_ + 1, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double k_se = k(i, j) - (i == j ? noise_var_ : 0.0);
                (*grad)[0] += 0.5 * outer(i, j) * 2.0 * k_se;
                for (size_t d = 0; d < dim_; ++d) {
                    const double dx = (x_[i][d] - x_[j][d]) / length[d];
                    (*grad)[d + 1] += 0.5 * outer(i, j) * k_se * dx * dx;
                }
            }
        }
    }
    return ll;
}

void GaussianProcess::fit(int restarts, std::uint64_t seed) {
    Hyper best = hyper_;
    double best_ll = -std::numeric_limits<double>::infinity();
    const double y_sd = y_.size() > 1 ? sample_sd(y_) : 0.0;

    for (int r = 0; r < restarts; ++r) {
        Rng rng(seed, 0x69b0000u + static_cast<std::uint64_t>(r));
        Hyper h;
        h.log_sigma_f = std::log(std::max(y_sd, 1e-3)) + (r == 0 ? 0.0 : rng.normal(0.0, 0.5));
        h.log_length.assign(dim_, 0.0);
        for (auto& l : h.log_length) l = (r == 0 ? std::log(0.5) : rng.normal(std::log(0.5), 0.7));

        // Gradient ascent with backtracking on the step size.
        std::vector<double> grad;
        double ll = log_marginal_likelihood(h, &grad);
        double step = 0.1;
        for (int iter = 0; iter < 80 && step > 1e-6; ++iter) {
            Hyper trial = h;
            trial.log_sigma_f += step * grad[0];
            for (size_t d = 0; d < dim_; ++d) trial.log_length[d] += step * grad[d + 1];
            trial.log_sigma_f = std::clamp(trial.log_sigma_f, -8.0, 8.0);
            for (auto& l : trial.log_length) l = std::clamp(l, -5.0, 5.0);
            std::vector<double> trial_grad;
            const double trial_ll = log_marginal_likelihood(trial, &trial_grad);
            if (trial_ll > ll) {
                h = trial;
                ll = trial_ll;
                grad = trial_grad;
                step *= 1.3;
            } else {
                step *= 0.5;
            }
        }
        if (ll > best_ll) {
            best_ll = ll;
            best = h;
        }
    }
    set_hyper(best);
}

void GaussianProcess::set_hyper(const Hyper& hyper) {
    hyper_ = hyper;
    refresh_cache();
}

void GaussianProcess::refresh_cache() {
    const auto n = static_cast<Eigen::Index>(x_.size());
    const double sigma_f2 = std::exp(2.0 * hyper_.log_sigma_f);
    std::vector<double> length(dim_);
    for (size_t d = 0; d < dim_; ++d) length[d] = std::exp(hyper_.log_length[d]);
    Eigen::MatrixXd k = kernel_matrix(x_, sigma_f2, length, noise_var_);
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
        throw NumericError("GaussianProcess: kernel matrix is not positive definite");
    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) yc(i) = y_[i] - y_mean_;
    Eigen::VectorXd alpha = llt.solve(yc);
    Eigen::MatrixXd l = llt.matrixL();
    chol_.assign(l.data(), l.data() + n * n);
    alpha_.assign(alpha.data(), alpha.data() + n);
}

GaussianProcess::Posterior GaussianProcess::posterior(const std::vector<double>& x) const {
    if (x.size() != dim_) throw UsageError("GaussianProcess::posterior: wrong dimension");
    const auto n = static_cast<Eigen::Index>(x_.size());
    const double sigma_f2 = std::exp(2.0 * hyper_.log_sigma_f);

    Eigen::VectorXd kstar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double q = 0.0;
        for (size_t d = 0; d < dim_; ++d) {
            const double dx = (x_[i][d] - x[d]) / std::exp(hyper_.log_length[d]);
            q += dx * dx;
        }
        kstar(i) = sigma_f2 * std::exp(-0.5 * q);
    }

    double mean = y_mean_;
    for (Eigen::Index i = 0; i < n; ++i) mean += kstar(i) * alpha_[i];

    // var = k(x,x) - k*^T K^-1 k*, via the cached Cholesky factor.
    Eigen::Map<const Eigen::MatrixXd> l(chol_.data(), n, n);
    Eigen::VectorXd v = l.triangularView<Eigen::Lower>().solve(kstar);
    double var = sigma_f2 - v.squaredNorm();
    return {mean, std::max(var, 0.0)};
}

double expected_improvement(double mean, double sd, double incumbent, double xi) {
    const double imp = mean - incumbent - xi;
    if (sd < 1e-12) return std::max(imp, 0.0);
    const double z = imp / sd;
    return imp * norm_cdf(z) + sd * norm_pdf(z);
}

BayesOptResult bayes_opt_max(const std::function<double(const std::vector<int>&)>& objective,
                             const IntBox& box, int initial, int total, double xi,
                             std::uint64_t seed) {
    if (box.bounds.empty()) throw UsageError("bayes_opt_max: empty box");
    if (initial < 1) throw UsageError("bayes_opt_max: initial design must have >= 1 point");
    if (total < initial)
        throw UsageError("bayes_opt_max: budget smaller than the initial design");
    for (auto [lo, hi] : box.bounds)
        if (lo > hi) throw UsageError("bayes_opt_max: inverted bounds");

    // Enumerate the integer grid.
    std::vector<std::vector<int>> grid;
    std::vector<int> point(box.bounds.size());
    size_t cells = 1;
    for (auto [lo, hi] : box.bounds) {
        cells *= static_cast<size_t>(hi - lo + 1);
        if (cells > 200000) throw UsageError("bayes_opt_max: integer box too large to enumerate");
    }
    grid.reserve(cells);
    std::function<void(size_t)> emit = [&](size_t d) {
        if (d == box.bounds.size()) {
            grid.push_back(point);
            return;
        }
        for (int v = box.bounds[d].first; v <= box.bounds[d].second; ++v) {
            point[d] = v;
            emit(d + 1);
        }
    };
    emit(0);

    // Standardize coordinates to [0, 1] for the surrogate.
    auto standardize = [&](const std::vector<int>& p) {
        std::vector<double> s(p.size());
        for (size_t d = 0; d < p.size(); ++d) {
            const double span = static_cast<double>(box.bounds[d].second - box.bounds[d].first);
            s[d] = span > 0.0 ? (p[d] - box.bounds[d].first) / span : 0.0;
        }
        return s;
    };

    Rng rng(seed, 0xbaeu);
    std::vector<size_t> order(grid.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    BayesOptResult result;
    std::vector<char> evaluated(grid.size(), 0);
    const size_t n_init = std::min<size_t>(static_cast<size_t>(initial), grid.size());
    for (size_t i = 0; i < n_init; ++i) {
        const auto& p = grid[order[i]];
        evaluated[order[i]] = 1;
        result.points.push_back(p);
        result.values.push_back(objective(p));
    }

    while (result.points.size() < std::min<size_t>(static_cast<size_t>(total), grid.size())) {
        std::vector<std::vector<double>> xs;
        xs.reserve(result.points.size());
        for (const auto& p : result.points) xs.push_back(standardize(p));
        GaussianProcess gp(xs, result.values);
        gp.fit(3, seed + result.points.size());

        const double incumbent = *std::max_element(result.values.begin(), result.values.end());
        double best_ei = -1.0;
        size_t best_idx = grid.size();
        for (size_t i = 0; i < grid.size(); ++i) {
            if (evaluated[i]) continue;
            auto post = gp.posterior(standardize(grid[i]));
            const double ei = expected_improvement(post.mean, std::sqrt(post.var), incumbent, xi);
            if (ei > best_ei) {
                best_ei = ei;
                best_idx = i;
            }
        }
        if (best_idx == grid.size()) break;  // nothing left to try
        evaluated[best_idx] = 1;
        result.points.push_back(grid[best_idx]);
        result.values.push_back(objective(grid[best_idx]));
    }

    size_t argmax = 0;
    for (size_t i = 1; i < result.values.size(); ++i)
        if (result.values[i] > result.values[argmax]) argmax = i;
    result.best_point = result.points[argmax];
    result.best_value = result.values[argmax];
    return result;
}

}  // namespace ubirisk
