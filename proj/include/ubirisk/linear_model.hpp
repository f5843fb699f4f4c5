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

#include <span>
#include <string>
#include <vector>

#include "ubirisk/table.hpp"

namespace ubirisk {

// Logistic regression family. The penalized solver is a proximal Newton
// scheme: an outer quadratic approximation of the cross-entropy at the
// current iterate, solved by cyclic coordinate descent with the elastic-net
// soft-thresholding update. The intercept is never penalized.

struct PenaltySpec {
    double lambda = 0.0;  // >= 0; 0 recovers the unpenalized fit
    double alpha = 1.0;   // 1 = lasso, 0 = ridge
};

struct ConvergenceReport {
    int outer_iterations = 0;
    double final_objective = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // one entry per outer iteration
};

struct GlmModel {
    double intercept = 0.0;
    std::vector<double> coef;          // aligned to columns
    std::vector<std::string> columns;  // training column contract
    PenaltySpec penalty;
    ConvergenceReport report;

    std::string to_json() const;
    static GlmModel from_json(const std::string& text);
};

struct GlmFitOptions {
    double tol = 1e-7;  // relative objective change between outer iterations
    int max_outer = 100;
    int max_inner = 1000;  // coordinate-descent sweeps per outer iteration
    const GlmModel* warm_start = nullptr;
};

/// Mean cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double cross_entropy(double intercept, std::span<const double> coef, const FeatureTable& table);
double cross_entropy(const GlmModel& model, const FeatureTable& table);

/// Analytic gradient of the mean cross-entropy: returns (d/d intercept,
/// d/d coef_j ...) = (1/n) X^T (p - y) with the leading 1-column.
std::vector<double> cross_entropy_gradient(double intercept, std::span<const double> coef,
                                           const FeatureTable& table);

/// Unpenalized MLE via iteratively reweighted least squares. Fails on
/// rank-deficient designs and on separation (diverging coefficients).
GlmModel fit_logistic_irls(const FeatureTable& table);

GlmModel fit_penalized(const FeatureTable& table, PenaltySpec penalty,
                       const GlmFitOptions& options = {});

/// Fits a sequence of penalties at fixed alpha, warm-starting each fit from
/// the previous solution. Pass lambdas in decreasing order; results align
/// with the input order.
std::vector<GlmModel> fit_penalized_path(const FeatureTable& table,
                                         const std::vector<double>& lambdas, double alpha,
                                         const GlmFitOptions& options = {});

std::vector<double> predict(const GlmModel& model, const FeatureTable& table);

/// Columns ranked by |coefficient|, descending; ties break lexicographically.
std::vector<std::pair<std::string, double>> glm_importance(const GlmModel& model);

/// Largest violation of the elastic-net KKT conditions at the model's
/// penalty. Zero at an exact solution.
double kkt_max_violation(const GlmModel& model, const FeatureTable& table);

}  // namespace ubirisk
