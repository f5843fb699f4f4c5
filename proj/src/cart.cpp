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

#include "ubirisk/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stack>

#include "ubirisk/common.hpp"

namespace ubirisk {

double gini_impurity(size_t count0, size_t count1) {
    const size_t total = count0 + count1;
    if (total == 0) throw NumericError("gini impurity of an empty node");
    const double p0 = static_cast<double>(count0) / static_cast<double>(total);
    const double p1 = static_cast<double>(count1) / static_cast<double>(total);
    return 1.0 - p0 * p0 - p1 * p1;
}

double CartTree::predict(const std::function<double(int)>& at) const {
    const CartNode* node = &nodes.front();
    while (node->feature >= 0) {
        node = at(node->feature) <= node->threshold ? &nodes[node->left] : &nodes[node->right];
    }
    return node->value;
}

double CartTree::predict_row(const std::vector<const std::vector<double>*>& columns,
                             size_t row) const {
    const CartNode* node = &nodes.front();
    while (node->feature >= 0) {
        node = (*columns[node->feature])[row] <= node->threshold ? &nodes[node->left]
                                                                 : &nodes[node->right];
    }
    return node->value;
}

namespace {

struct Pending {
    int node;
    size_t begin;
    size_t end;
};

// Impurity of a node under the configured criterion: Gini for classification,
// mean squared error for regression.
double node_impurity(SplitCriterion crit, double sum, double sum_sq, double n) {
    if (crit == SplitCriterion::Gini) {
        const double p1 = sum / n;
        return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1);
    }
    const double m = sum / n;
    return sum_sq / n - m * m;
}

}  // namespace

// Presorted-lists CART: every feature keeps a (value, target) sequence sorted
// once at the root; splits partition each sequence stably, so per-node scans
// are linear and no re-sorting happens below the root.
CartTree fit_cart(const std::vector<const std::vector<double>*>& columns,
                  const std::vector<double>& target, std::vector<int> rows,
                  const std::vector<int>& features, const CartConfig& config) {
    if (rows.empty()) throw NumericError("fit_cart: no rows");
    if (features.empty()) throw NumericError("fit_cart: no features");

    const size_t m = rows.size();
    const size_t n_feat = features.size();

    // Per feature: positions into `rows`, feature values, and targets, all in
    // ascending value order (ties by position for determinism).
    std::vector<std::vector<int>> pos(n_feat, std::vector<int>(m));
    std::vector<std::vector<double>> val(n_feat, std::vector<double>(m));
    std::vector<std::vector<double>> tgt(n_feat, std::vector<double>(m));
    for (size_t fi = 0; fi < n_feat; ++fi) {
        const std::vector<double>& col = *columns[static_cast<size_t>(features[fi])];
        auto& p = pos[fi];
        std::iota(p.begin(), p.end(), 0);
        std::sort(p.begin(), p.end(), [&](int a, int b) {
            const double va = col[static_cast<size_t>(rows[static_cast<size_t>(a)])];
            const double vb = col[static_cast<size_t>(rows[static_cast<size_t>(b)])];
            return va != vb ? va < vb : a < b;
        });
        for (size_t i = 0; i < m; ++i) {
            const int row = rows[static_cast<size_t>(p[i])];
            val[fi][i] = col[static_cast<size_t>(row)];
            tgt[fi][i] = target[static_cast<size_t>(row)];
        }
    }

    std::vector<char> go_left(m);
    std::vector<int> pos_scratch(m);
    std::vector<double> val_scratch(m), tgt_scratch(m);

    CartTree tree;
    tree.nodes.push_back({});
    std::stack<Pending> pending;
    pending.push({0, 0, m});

    while (!pending.empty()) {
        auto [node_idx, begin, end] = pending.top();
        pending.pop();
        const size_t count = end - begin;
        const double n = static_cast<double>(count);

        double sum = 0.0, sum_sq = 0.0;
        for (size_t i = begin; i < end; ++i) {
            const double y = tgt[0][i];
            sum += y;
            sum_sq += y * y;
        }
        const double impurity = node_impurity(config.criterion, sum, sum_sq, n);

        tree.nodes[node_idx].n_rows = static_cast<int>(count);
        tree.nodes[node_idx].value = sum / n;

        if (count < static_cast<size_t>(config.min_split) || impurity <= 1e-12) continue;

        // Best split: scan each feature's sorted slice; candidate thresholds
        // are midpoints between consecutive distinct values. Strict > keeps
        // the first (lowest feature index, lowest threshold) on exact ties.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_decrease = 1e-12;
        for (size_t fi = 0; fi < n_feat; ++fi) {
            const double* v = val[fi].data();
            const double* y = tgt[fi].data();
            if (v[begin] == v[end - 1]) continue;
            double left_sum = 0.0, left_sq = 0.0;
            for (size_t i = begin + 1; i < end; ++i) {
                const double yy = y[i - 1];
                left_sum += yy;
                left_sq += yy * yy;
                if (v[i] == v[i - 1]) continue;
                const size_t n_left = i - begin;
                const size_t n_right = end - i;
                if (n_left < static_cast<size_t>(config.min_leaf) ||
                    n_right < static_cast<size_t>(config.min_leaf))
                    continue;
                const double imp_left = node_impurity(config.criterion, left_sum, left_sq,
                                                      static_cast<double>(n_left));
                const double imp_right = node_impurity(config.criterion, sum - left_sum,
                                                       sum_sq - left_sq,
                                                       static_cast<double>(n_right));
                const double decrease =
                    impurity - (static_cast<double>(n_left) * imp_left +
                                static_cast<double>(n_right) * imp_right) /
                                   n;
                if (decrease > best_decrease) {
                    // When two values are so close their midpoint rounds onto
                    // the right one, fall back to the left value so the
                    // realized partition matches the candidate's counts.
                    double threshold = 0.5 * (v[i - 1] + v[i]);
                    if (!(threshold < v[i])) threshold = v[i - 1];
                    best_feature = features[fi];
                    best_threshold = threshold;
                    best_decrease = decrease;
                }
            }
        }
        if (best_feature < 0) continue;

        // Mark positions going left, then stably partition every feature's
        // slice so both children stay value-sorted.
        size_t n_left = 0;
        {
            size_t fi = 0;
            while (features[fi] != best_feature) ++fi;
            for (size_t i = begin; i < end; ++i) {
                const char left = val[fi][i] <= best_threshold;
                go_left[static_cast<size_t>(pos[fi][i])] = left;
                n_left += static_cast<size_t>(left);
            }
        }
        if (n_left == 0 || n_left == count) continue;  // numerically degenerate

        for (size_t fi = 0; fi < n_feat; ++fi) {
            size_t out_left = begin;
            size_t out_right = 0;
            for (size_t i = begin; i < end; ++i) {
                if (go_left[static_cast<size_t>(pos[fi][i])]) {
                    pos[fi][out_left] = pos[fi][i];
                    val[fi][out_left] = val[fi][i];
                    tgt[fi][out_left] = tgt[fi][i];
                    ++out_left;
                } else {
                    pos_scratch[out_right] = pos[fi][i];
                    val_scratch[out_right] = val[fi][i];
                    tgt_scratch[out_right] = tgt[fi][i];
                    ++out_right;
                }
            }
            std::copy(pos_scratch.begin(), pos_scratch.begin() + static_cast<long>(out_right),
                      pos[fi].begin() + static_cast<long>(out_left));
            std::copy(val_scratch.begin(), val_scratch.begin() + static_cast<long>(out_right),
                      val[fi].begin() + static_cast<long>(out_left));
            std::copy(tgt_scratch.begin(), tgt_scratch.begin() + static_cast<long>(out_right),
                      tgt[fi].begin() + static_cast<long>(out_left));
        }
        const size_t mid = begin + n_left;

        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});

        CartNode& node = tree.nodes[node_idx];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.weighted_decrease = best_decrease * n / static_cast<double>(m);
        node.left = left_idx;
        node.right = right_idx;
        pending.push({left_idx, begin, mid});
        pending.push({right_idx, mid, end});
    }
    return tree;
}

}  // namespace ubirisk
