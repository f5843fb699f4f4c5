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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ubirisk/featurize.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/table.hpp"
#include "ubirisk/trip_store.hpp"

namespace ubirisk {

// For each dataset D_0..D_12 of one truncation method: tune a lasso by
// 5-fold CV over the 100-value penalty grid, refit on the full training
// part, and score the held-out part plus b bootstrap resamples of it. The
// redundancy point is where the median-AUC curve plateaus.

struct BootstrapDistribution {
    LeapMethod method = LeapMethod::TimeLeap;
    int k = 0;
    std::vector<double> replicate_auc;
    double point_auc = 0.0;
    double tuned_lambda = 0.0;
    int redraws = 0;  // single-class resamples that had to be redrawn
};

struct StudyConfig {
    int b = 500;
    double train_frac = 0.7;
    int cv_folds = 5;
    std::uint64_t split_seed = 1;
    std::uint64_t cv_seed = 2;
    std::uint64_t bootstrap_seed = 3;
    double delta = 0.005;  // median-AUC plateau tolerance
    RecipeConfig recipe;
    std::vector<double> lambdas;  // empty = the standard 100-value grid
    int jobs = 1;
};

struct StudyResult {
    LeapMethod method = LeapMethod::TimeLeap;
    std::vector<BootstrapDistribution> distributions;  // k = 0..12
    int redundancy_k = 12;
    StudyConfig config;
    std::vector<std::string> notes;

    /// Plot-ready long format: k, replicate_index, auc.
    void write_csv(std::ostream& out) const;
    /// Medians, quartiles, point AUCs, tuned lambdas, k*, seeds.
    std::string summary_json() const;
};

/// Resample AUCs: b with-replacement resamples of (score, label) rows,
/// resample size = row count. Single-class resamples are redrawn and
/// counted; more than 1000 consecutive redraws is an error.
/// The identity_first test hook makes replicate 0 use the original rows.
std::vector<double> bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                                  int b, std::uint64_t seed, int* redraws = nullptr,
                                  bool identity_first = false);

/// Smallest k >= 1 such that every later median exceeds median_k by at most
/// delta; 12 when no such k exists. Expects distributions ordered k = 0..12.
int redundancy_point(const std::vector<BootstrapDistribution>& distributions, double delta);

StudyResult run_study(const std::vector<VehicleContract>& contracts, LeapMethod method,
                      const StudyConfig& config);

struct ImportanceRow {
    std::string column;
    ColumnOrigin origin;
    std::vector<int> rank_per_model;  // 1 = most important
    double avg_rank = 0.0;
};

struct ImportanceComparison {
    std::vector<std::string> model_names;
    std::vector<ImportanceRow> rows;  // sorted by avg_rank
    double telematics_avg_rank = 0.0;
    double classical_avg_rank = 0.0;

    void write_csv(std::ostream& out) const;
};

/// Joins per-model importance rankings (already sorted, as produced by
/// glm_importance / forest_importance) into one rank table with the average
/// rank per feature origin.
ImportanceComparison compare_importance(
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>&
        model_importances,
    const std::map<std::string, ColumnOrigin>& origins);

}  // namespace ubirisk
