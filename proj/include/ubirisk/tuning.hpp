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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ubirisk/forest.hpp"
#include "ubirisk/gp.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/table.hpp"

namespace ubirisk {

/// The 100-value penalty grid 10^(-10 + (i-1)/9.9), i = 1..100: log-uniform
/// from 1e-10 to 1.
std::vector<double> lambda_grid();

/// Mann-Whitney AUC with ties counted 1/2, computed by sorting (O(n log n)).
/// Both classes must be present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Stratified k-fold plan: fold sizes differ by at most one, and so do the
/// per-fold class-1 counts.
struct CvPlan {
    int k = 5;
    std::vector<int> fold_of_row;
    std::uint64_t seed = 0;

    static CvPlan stratified(std::span<const int> y, int k, std::uint64_t seed);
};

/// fit(train) returns a scorer; the scorer maps a table to per-row claim
/// probabilities. Preprocessing must happen inside fit so each fold's recipe
/// sees only its own training rows.
using ScoreFn = std::function<std::vector<double>(const FeatureTable&)>;
using PipelineFn = std::function<ScoreFn(const FeatureTable&)>;

struct CvScore {
    double mean_auc = 0.0;
    double sd_auc = 0.0;
    std::vector<double> per_fold;
};

CvScore cv_auc(const FeatureTable& table, const PipelineFn& fit, const CvPlan& plan);

struct TuneCandidate {
    std::vector<std::pair<std::string, double>> params;
    double mean_auc = 0.0;
    double sd_auc = 0.0;
    bool failed = false;
};

struct TuneResult {
    std::vector<TuneCandidate> candidates;
    int best_index = -1;
    std::vector<std::string> notes;

    const TuneCandidate& best() const;
    void write_csv(std::ostream& out) const;
    std::string summary_json() const;
};

/// Exhaustive (lambda, alpha) search scored by stratified-CV AUC with a
/// warm-started lambda path per fold; the recipe is refit inside every fold.
/// Ties prefer the smaller lambda, then the larger alpha.
TuneResult grid_search_glm(const FeatureTable& table, const std::vector<double>& lambdas,
                           const std::vector<double>& alphas, const CvPlan& plan,
                           const RecipeConfig& recipe_config = {});

struct BayesBudget {
    int initial = 5;
    int total = 25;  // initial design + EI-guided evaluations
};

/// Gaussian-process tuning of (p*, n*) for the forest, maximizing CV AUC.
/// bounds.bounds[0] is the p* range, bounds.bounds[1] the n* range.
TuneResult bayes_opt_forest(const FeatureTable& table, const IntBox& bounds, const CvPlan& plan,
                            const BayesBudget& budget, const ForestSpec& base_spec,
                            const RecipeConfig& recipe_config = {}, int jobs = 1);

}  // namespace ubirisk
