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

#include "ubirisk/study.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"
#include "ubirisk/parallel.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/tuning.hpp"

namespace ubirisk {

std::vector<double> bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                                  int b, std::uint64_t seed, int* redraws, bool identity_first) {
    if (scores.size() != labels.size() || scores.empty())
        throw DataError("bootstrap_auc: bad scores/labels");
    if (b < 1) throw UsageError("bootstrap_auc: b must be >= 1");
    {
        bool pos = false, neg = false;
        for (int y : labels) (y ? pos : neg) = true;
        if (!pos || !neg) throw DataError("bootstrap_auc: test rows hold a single class");
    }

    const size_t n = scores.size();
    Rng rng(seed, 0xb007u);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(b));
    std::vector<double> s(n);
    std::vector<int> y(n);
    int total_redraws = 0;

    for (int rep = 0; rep < b; ++rep) {
        if (identity_first && rep == 0) {
            out.push_back(auc(scores, labels));
            continue;
        }
        int consecutive = 0;
        while (true) {
            bool pos = false, neg = false;
            for (size_t i = 0; i < n; ++i) {
                const size_t pick = static_cast<size_t>(rng.below(n));
                s[i] = scores[pick];
                y[i] = labels[pick];
                (y[i] ? pos : neg) = true;
            }
            if (pos && neg) break;
            ++total_redraws;
            if (++consecutive > 1000)
                throw NumericError("bootstrap_auc: over 1000 consecutive single-class resamples");
        }
        out.push_back(auc(s, y));
    }
    if (redraws) *redraws = total_redraws;
    return out;
}

int redundancy_point(const std::vector<BootstrapDistribution>& distributions, double delta) {
    if (distributions.size() != 13) throw UsageError("redundancy_point expects k = 0..12");
    if (!(delta > 0.0)) throw UsageError("redundancy_point: delta must be positive");
    std::vector<double> med(13);
    for (size_t k = 0; k < 13; ++k) med[k] = median(distributions[k].replicate_auc);
    for (int k = 1; k <= 12; ++k) {
        bool plateau = true;
        for (int j = k + 1; j <= 12; ++j) {
            if (med[static_cast<size_t>(j)] - med[static_cast<size_t>(k)] > delta) {
                plateau = false;
                break;
            }
        }
        if (plateau) return k;
    }
    return 12;
}

StudyResult run_study(const std::vector<VehicleContract>& contracts, LeapMethod method,
                      const StudyConfig& config) {
    if (config.b < 100) throw UsageError("run_study: b must be >= 100");
    StudyResult result;
    result.method = method;
    result.config = config;
    const std::vector<double> lambdas =
        config.lambdas.empty() ? lambda_grid() : config.lambdas;

    // All 13 datasets first; any undefined-feature failure names its k.
    std::vector<FeatureTable> datasets;
    datasets.reserve(13);
    for (int k = 0; k <= 12; ++k) {
        try {
            datasets.push_back(build_dataset(contracts, {method, k}));
        } catch (const std::runtime_error& e) {
            throw DataError("study: dataset k=" + std::to_string(k) + " failed to build: " +
                            e.what());
        }
    }

    // One vin partition and one CV plan shared by all 13 datasets; row order
    // is identical across k, so the plan rows align everywhere.
    const auto train_vins =
        split_vins(datasets[0].row_ids(), config.train_frac, config.split_seed);
    auto [train0, test0] = apply_split(datasets[0], train_vins);
    const CvPlan plan = CvPlan::stratified(train0.response(), config.cv_folds, config.cv_seed);

    // The 13 dataset pipelines are independent jobs; every seed is fixed up
    // front so the outcome does not depend on scheduling.
    result.distributions.resize(13);
    std::vector<std::string> notes(13);
    parallel_for(13, config.jobs, [&](size_t ki) {
        const int k = static_cast<int>(ki);
        auto [train_raw, test_raw] = apply_split(datasets[ki], train_vins);
        try {
            TuneResult tuned = grid_search_glm(train_raw, lambdas, {1.0}, plan, config.recipe);
            const double lambda_star = tuned.best().params[0].second;

            FittedRecipe recipe = recipe_fit(train_raw, config.recipe);
            FeatureTable train = recipe_apply(recipe, train_raw);
            FeatureTable test = recipe_apply(recipe, test_raw);
            GlmModel model = fit_penalized(train, {lambda_star, 1.0});

            BootstrapDistribution dist;
            dist.method = method;
            dist.k = k;
            dist.tuned_lambda = lambda_star;
            std::vector<double> scores = predict(model, test);
            dist.point_auc = auc(scores, test.response());
            dist.replicate_auc = bootstrap_auc(scores, test.response(), config.b,
                                               config.bootstrap_seed, &dist.redraws);
            if (config.b >= 100) {
                const auto [mn, mx] =
                    std::minmax_element(dist.replicate_auc.begin(), dist.replicate_auc.end());
                if (dist.point_auc < *mn || dist.point_auc > *mx)
                    notes[ki] = "statistical anomaly: point AUC outside replicate range at k=" +
                                std::to_string(k);
            }
            result.distributions[ki] = std::move(dist);
        } catch (const NumericError& e) {
            throw NumericError("study: dataset k=" + std::to_string(k) + " failed: " + e.what());
        }
    });
    for (auto& note : notes)
        if (!note.empty()) result.notes.push_back(std::move(note));

    result.redundancy_k = redundancy_point(result.distributions, config.delta);
    return result;
}

void StudyResult::write_csv(std::ostream& out) const {
    out << "k,replicate_index,auc\n";
    for (const auto& dist : distributions) {
        for (size_t r = 0; r < dist.replicate_auc.size(); ++r)
            out << dist.k << ',' << r << ',' << format_double(dist.replicate_auc[r]) << '\n';
    }
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double idx = p * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(idx);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

std::string StudyResult::summary_json() const {
    nlohmann::json per_k = nlohmann::json::array();
    for (const auto& dist : distributions) {
        std::vector<double> sorted = dist.replicate_auc;
        std::sort(sorted.begin(), sorted.end());
        per_k.push_back({{"k", dist.k},
                         {"tuned_lambda", dist.tuned_lambda},
                         {"point_auc", dist.point_auc},
                         {"min", sorted.front()},
                         {"q1", quantile_sorted(sorted, 0.25)},
                         {"median", quantile_sorted(sorted, 0.5)},
                         {"q3", quantile_sorted(sorted, 0.75)},
                         {"max", sorted.back()},
                         {"redraws", dist.redraws}});
    }
    nlohmann::json doc;
    doc["method"] = to_string(method);
    doc["redundancy_k"] = redundancy_k;
    doc["delta"] = config.delta;
    doc["b"] = config.b;
    doc["seeds"] = {{"split", config.split_seed},
                    {"cv", config.cv_seed},
                    {"bootstrap", config.bootstrap_seed}};
    doc["train_frac"] = config.train_frac;
    doc["cv_folds"] = config.cv_folds;
    doc["per_k"] = per_k;
    doc["notes"] = notes;
    return doc.dump(2);
}

ImportanceComparison compare_importance(
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>&
        model_importances,
    const std::map<std::string, ColumnOrigin>& origins) {
    if (model_importances.empty()) throw UsageError("compare_importance: no models");
    ImportanceComparison cmp;
    std::map<std::string, std::vector<int>> ranks;
    for (const auto& [model_name, importance] : model_importances) {
        cmp.model_names.push_back(model_name);
        for (size_t pos = 0; pos < importance.size(); ++pos)
            ranks[importance[pos].first].push_back(static_cast<int>(pos) + 1);
    }

    double tele_sum = 0.0, clas_sum = 0.0;
    size_t tele_n = 0, clas_n = 0;
    for (const auto& [column, rank_list] : ranks) {
        if (rank_list.size() != model_importances.size())
            throw DataError("compare_importance: models rank different column sets (" + column +
                            ")");
        ImportanceRow row;
        row.column = column;
        auto it = origins.find(column);
        row.origin = it != origins.end() ? it->second : ColumnOrigin::Classical;
        row.rank_per_model = rank_list;
        double sum = 0.0;
        for (int r : rank_list) sum += r;
        row.avg_rank = sum / static_cast<double>(rank_list.size());
        if (row.origin == ColumnOrigin::Telematics) {
            tele_sum += sum;
            tele_n += rank_list.size();
        } else if (row.origin == ColumnOrigin::Classical) {
            clas_sum += sum;
            clas_n += rank_list.size();
        }
        cmp.rows.push_back(std::move(row));
    }
    std::sort(cmp.rows.begin(), cmp.rows.end(), [](const auto& a, const auto& b) {
        if (a.avg_rank != b.avg_rank) return a.avg_rank < b.avg_rank;
        return a.column < b.column;
    });
    cmp.telematics_avg_rank = tele_n ? tele_sum / static_cast<double>(tele_n) : 0.0;
    cmp.classical_avg_rank = clas_n ? clas_sum / static_cast<double>(clas_n) : 0.0;
    return cmp;
}

void ImportanceComparison::write_csv(std::ostream& out) const {
    out << "column,origin";
    for (const auto& name : model_names) out << ",rank_" << name;
    out << ",avg_rank\n";
    for (const auto& row : rows) {
        out << row.column << ',' << to_string(row.origin);
        for (int r : row.rank_per_model) out << ',' << r;
        out << ',' << format_double(row.avg_rank) << '\n';
    }
}

}  // namespace ubirisk
