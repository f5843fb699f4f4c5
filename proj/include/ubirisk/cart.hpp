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

#include <functional>
#include <vector>

namespace ubirisk {

enum class SplitCriterion { Gini, Variance };

/// Gini impurity 1 - sum_c (n_c/n)^2 for binary class counts.
double gini_impurity(size_t count0, size_t count1);

struct CartNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x <= threshold go left
    double value = 0.0;      // leaf prediction: class-1 share or target mean
    int left = -1;
    int right = -1;
    int n_rows = 0;
    // (n_node/n_root) * impurity decrease, recorded on split nodes for
    // mean-decrease importance.
    double weighted_decrease = 0.0;
};

struct CartTree {
    std::vector<CartNode> nodes;  // nodes[0] is the root; empty means unfit

    /// Predicts one row; `at(feature)` returns the feature value.
    double predict(const std::function<double(int)>& at) const;
    double predict_row(const std::vector<const std::vector<double>*>& columns, size_t row) const;
};

struct CartConfig {
    SplitCriterion criterion = SplitCriterion::Gini;
    int min_split = 2;  // a node splits only if it holds at least this many rows
    int min_leaf = 1;   // children below this size are not considered
};

/// Grows a CART tree by exhaustive best-split search over the given feature
/// columns. Candidate thresholds are midpoints between consecutive distinct
/// sorted values; ties in impurity decrease resolve to the lowest feature
/// index, then the lowest threshold. Growth stops on min_split, purity, or
/// when no split strictly decreases impurity. Depth is unbounded.
///
/// `rows` may contain repeated indices (bootstrap samples).
CartTree fit_cart(const std::vector<const std::vector<double>*>& columns,
                  const std::vector<double>& target, std::vector<int> rows,
                  const std::vector<int>& features, const CartConfig& config);

}  // namespace ubirisk
