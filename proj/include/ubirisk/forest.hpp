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
#include <string>
#include <vector>

#include "ubirisk/cart.hpp"
#include "ubirisk/table.hpp"

namespace ubirisk {

// Random-forest binary classifier: B trees, each grown on an n-row
// with-replacement bootstrap using a per-tree feature subset sampled without
// replacement (once per tree, not per node). Trees are CART with Gini
// impurity, unbounded depth, and a minimum node size to split.

struct ForestSpec {
    int n_trees = 1000;         // B
    int features_per_tree = 1;  // p*, 1 <= p* <= p
    int min_split = 2;          // n*: a node needs at least this many rows to split
    std::uint64_t seed = 0;
    bool bootstrap = true;  // test hook: false trains every tree on the original rows
};

struct ForestModel {
    ForestSpec spec;
    std::vector<std::string> columns;
    std::vector<CartTree> trees;
    std::vector<std::vector<int>> tree_features;  // column indices used by each tree

    std::string to_json() const;
    static ForestModel from_json(const std::string& text);
};

/// One CART classification tree on all rows, restricted to `features`
/// (column indices). Leaves predict the class-1 share.
CartTree fit_tree(const FeatureTable& table, const std::vector<int>& features, int min_split);

ForestModel fit_forest(const FeatureTable& table, const ForestSpec& spec, int jobs = 1);

std::vector<double> forest_predict(const ForestModel& model, const FeatureTable& table);

/// Mean decrease in Gini impurity: per feature, the (node share * impurity
/// decrease) summed over its split nodes, averaged over trees. Descending;
/// ties break lexicographically.
std::vector<std::pair<std::string, double>> forest_importance(const ForestModel& model);

}  // namespace ubirisk
