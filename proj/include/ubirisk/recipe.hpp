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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ubirisk/cart.hpp"
#include "ubirisk/table.hpp"

namespace ubirisk {

// Preprocessing pipeline, applied in a fixed order every time a model is
// trained or scored: lump rare categories -> GLM target encoding ->
// bagged-tree imputation -> Yeo-Johnson -> z-score. Optionally expands
// pairwise interaction columns (which then pass through Yeo-Johnson and
// z-score like any numeric column). All statistics are learned on training
// rows only and frozen.

struct RecipeConfig {
    double lump_threshold = 0.05;  // categories at or below this share are lumped
    int bag_trees = 25;
    int bag_min_leaf = 5;
    std::vector<std::string> impute_columns = {"commute_distance"};
    std::vector<std::string> interaction_sources;  // empty = no interactions
    std::uint64_t seed = 17;  // drives the imputer's bootstrap resamples
};

inline constexpr const char* kLumpCategory = "other";

struct LumpResult {
    std::vector<std::string> column;  // rare categories replaced by kLumpCategory
    std::set<std::string> lumped;
};

/// Categories with training frequency <= threshold collapse into "other".
LumpResult lump_rare(const std::vector<std::string>& column, double threshold);

/// Intercept-free one-hot logistic regression of y on the column. For this
/// saturated design the MLE coefficient of category j is logit(mean of y in
/// category j); pure 0/1 categories clamp at logit(0.5/n_j) from either side.
std::map<std::string, double> target_encode_fit(const std::vector<std::string>& column,
                                                const std::vector<int>& y);

struct BagImputeModel {
    std::string target;
    std::vector<std::string> predictors;  // column names, in input-table order
    std::vector<CartTree> trees;
    double observed_min = 0.0;
    double observed_max = 0.0;

    /// Mean of the tree predictions; row values aligned to `predictors`.
    double predict(const std::vector<double>& row) const;
};

/// Bagged regression trees for one numeric column: each tree fits a
/// with-replacement bootstrap of the rows where the target is observed,
/// using every other column as predictor.
BagImputeModel bag_impute_fit(const FeatureTable& table, const std::string& target_column,
                              int n_trees, int min_leaf, std::uint64_t seed);

/// Four-branch Yeo-Johnson transform; theta plays the usual exponent role.
double yeo_johnson(double x, double theta);

/// Gaussian profile log-likelihood of the transformed sample, including the
/// sign-aware (theta-1) * sum(log(|x|+1)) Jacobian term.
double yeo_johnson_log_likelihood(const std::vector<double>& column, double theta);

/// Maximum-likelihood theta over [-5, 5] by golden-section search
/// (tolerance 1e-6). Columns with fewer than two distinct values get the
/// identity theta = 1.
double yeo_johnson_fit(const std::vector<double>& column);

struct ZScore {
    double mean = 0.0;
    double sd = 1.0;
};

/// Training mean and n-1 standard deviation. sd of 0 is reported as-is; the
/// recipe drops such columns.
ZScore zscore_fit(const std::vector<double>& column);

/// (x - mean) / sd with frozen training statistics.
std::vector<double> zscore_apply(const std::vector<double>& column, const ZScore& z);

std::vector<std::pair<std::string, std::string>> make_interaction_set(
    std::vector<std::string> sources);

/// Appends one product column per unordered source pair, named "a:b" with
/// a < b lexicographically.
FeatureTable expand_interactions(const FeatureTable& table,
                                 const std::vector<std::string>& sources);

/// The 10 classical features plus the 7 telematics features whose group
/// means separate claimants from non-claimants; C(17,2) = 136 pairs.
const std::vector<std::string>& default_interaction_sources();

struct CategoricalStep {
    std::set<std::string> lumped;
    std::map<std::string, double> encoding;  // includes "other" when anything was lumped
    double fallback = 0.0;  // count-weighted mean coefficient, for unseen categories
};

struct NumericStep {
    std::string name;
    double theta = 1.0;
    ZScore z;
    bool dropped = false;  // zero post-transform variance
};

class FittedRecipe {
  public:
    RecipeConfig config;
    std::vector<ColumnDesc> input_columns;
    std::map<std::string, CategoricalStep> categorical;
    std::map<std::string, BagImputeModel> imputers;
    std::vector<NumericStep> numeric;  // output order: input order, then interactions
    std::vector<std::pair<std::string, std::string>> interactions;
    std::vector<std::string> warnings;

    std::vector<std::string> output_columns() const;
    std::string to_json() const;
    static FittedRecipe from_json(const std::string& text);
};

FittedRecipe recipe_fit(const FeatureTable& train, const RecipeConfig& config = {});

/// Applies frozen statistics; output is all-numeric with no missing values.
/// Unseen categories map to the lump category's encoding when one exists,
/// otherwise to the training-set weighted mean coefficient.
FeatureTable recipe_apply(const FittedRecipe& recipe, const FeatureTable& table);

}  // namespace ubirisk
