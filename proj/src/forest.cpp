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

#include "ubirisk/forest.hpp"

#include <algorithm>
#include <map>

#include "ubirisk/common.hpp"
#include "ubirisk/parallel.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/tree_json.hpp"

namespace ubirisk {

namespace {

struct ColumnView {
    std::vector<const std::vector<double>*> cols;
    std::vector<double> target;
};

ColumnView view_of(const FeatureTable& table) {
    if (table.n_rows() == 0) throw DataError("empty table");
    ColumnView v;
    v.cols.reserve(table.n_cols());
    for (size_t j = 0; j < table.n_cols(); ++j) v.cols.push_back(&table.numeric(j));
    v.target.reserve(table.n_rows());
    for (int y : table.response()) v.target.push_back(static_cast<double>(y));
    return v;
}

}  // namespace

CartTree fit_tree(const FeatureTable& table, const std::vector<int>& features, int min_split) {
    ColumnView v = view_of(table);
    std::vector<int> rows(table.n_rows());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    CartConfig cfg;
    cfg.criterion = SplitCriterion::Gini;
    cfg.min_split = min_split;
    return fit_cart(v.cols, v.target, std::move(rows), features, cfg);
}

ForestModel fit_forest(const FeatureTable& table, const ForestSpec& spec, int jobs) {
    const size_t p = table.n_cols();
    const size_t n = table.n_rows();
    if (spec.n_trees < 1) throw UsageError("forest needs at least one tree");
    if (spec.features_per_tree < 1 || static_cast<size_t>(spec.features_per_tree) > p)
        throw UsageError("features_per_tree must be in [1, number of columns]");
    if (spec.min_split < 2) throw UsageError("min_split must be >= 2");

    ColumnView v = view_of(table);
    ForestModel model;
    model.spec = spec;
    model.columns = table.column_names();
    model.trees.resize(static_cast<size_t>(spec.n_trees));
    model.tree_features.resize(static_cast<size_t>(spec.n_trees));

    CartConfig cfg;
    cfg.criterion = SplitCriterion::Gini;
    cfg.min_split = spec.min_split;

    parallel_for(static_cast<size_t>(spec.n_trees), jobs, [&](size_t b) {
        Rng rng(spec.seed, 0xf0e57000u + b);
        std::vector<int> rows(n);
        if (spec.bootstrap) {
            for (auto& r : rows) r = static_cast<int>(rng.below(n));
        } else {
            for (size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
        }
        // Partial Fisher-Yates: first p* entries are a without-replacement draw.
        std::vector<int> pool(p);
        for (size_t j = 0; j < p; ++j) pool[j] = static_cast<int>(j);
        for (int j = 0; j < spec.features_per_tree; ++j) {
            size_t pick = static_cast<size_t>(j) + static_cast<size_t>(rng.below(p - j));
            std::swap(pool[static_cast<size_t>(j)], pool[pick]);
        }
        std::vector<int> features(pool.begin(), pool.begin() + spec.features_per_tree);
        std::sort(features.begin(), features.end());
        model.tree_features[b] = features;
        model.trees[b] = fit_cart(v.cols, v.target, std::move(rows), features, cfg);
    });
    return model;
}

std::vector<double> forest_predict(const ForestModel& model, const FeatureTable& table) {
    if (table.column_names() != model.columns)
        throw DataError("forest_predict: table columns do not match the model's contract");
    ColumnView v = view_of(table);
    std::vector<double> out(table.n_rows(), 0.0);
    for (const auto& tree : model.trees) {
        for (size_t i = 0; i < out.size(); ++i) out[i] += tree.predict_row(v.cols, i);
    }
    const double inv_b = 1.0 / static_cast<double>(model.trees.size());
    for (auto& o : out) o *= inv_b;
    return out;
}

std::vector<std::pair<std::string, double>> forest_importance(const ForestModel& model) {
    std::vector<double> total(model.columns.size(), 0.0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) total[static_cast<size_t>(node.feature)] += node.weighted_decrease;
        }
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(total.size());
    const double inv_b = 1.0 / static_cast<double>(model.trees.size());
    for (size_t j = 0; j < total.size(); ++j)
        out.emplace_back(model.columns[j], total[j] * inv_b);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

std::string ForestModel::to_json() const {
    nlohmann::json doc;
    doc["spec"] = {{"n_trees", spec.n_trees},
                   {"features_per_tree", spec.features_per_tree},
                   {"min_split", spec.min_split},
                   {"seed", spec.seed},
                   {"bootstrap", spec.bootstrap}};
    doc["columns"] = columns;
    doc["tree_features"] = tree_features;
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : this->trees) trees.push_back(cart_tree_to_json(t));
    doc["trees"] = trees;
    return doc.dump();
}

ForestModel ForestModel::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad forest json: ") + e.what());
    }
    ForestModel model;
    const auto& s = doc.at("spec");
    model.spec.n_trees = s.at("n_trees").get<int>();
    model.spec.features_per_tree = s.at("features_per_tree").get<int>();
    model.spec.min_split = s.at("min_split").get<int>();
    model.spec.seed = s.at("seed").get<std::uint64_t>();
    model.spec.bootstrap = s.at("bootstrap").get<bool>();
    model.columns = doc.at("columns").get<std::vector<std::string>>();
    model.tree_features = doc.at("tree_features").get<std::vector<std::vector<int>>>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(cart_tree_from_json(t));
    return model;
}

}  // namespace ubirisk
