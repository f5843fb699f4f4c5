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

#include "ubirisk/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

namespace ubirisk {

std::vector<double> lambda_grid() {
    std::vector<double> grid(100);
    for (int i = 1; i <= 100; ++i)
        grid[static_cast<size_t>(i - 1)] = std::pow(10.0, -10.0 + (i - 1) / 9.9);
    return grid;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("auc: scores/labels length mismatch");
    const size_t n = scores.size();
    size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<size_t>(y);
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes must be present");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Midranks over tied scores; rank sums are exact multiples of 1/2.
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (size_t t = i; t <= j; ++t)
            if (labels[order[t]]) pos_rank_sum += midrank;
        i = j + 1;
    }
    const double u = pos_rank_sum -
                     0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

CvPlan CvPlan::stratified(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("cross-validation needs k >= 2");
    const size_t n = y.size();
    if (n < static_cast<size_t>(k)) throw UsageError("fewer rows than folds");

    std::vector<int> pos_rows, neg_rows;
    for (size_t i = 0; i < n; ++i) (y[i] ? pos_rows : neg_rows).push_back(static_cast<int>(i));

    Rng rng(seed, 0xcf01du);
    rng.shuffle(pos_rows);
    rng.shuffle(neg_rows);

    // Per-fold class-1 counts: n1/k each, the remainder spread over a seeded
    // random fold order. Fold totals n/k (+1 for the first n%k folds of the
    // same order) keep sizes within one of each other; negatives fill the gap.
    std::vector<int> fold_order(static_cast<size_t>(k));
    std::iota(fold_order.begin(), fold_order.end(), 0);
    rng.shuffle(fold_order);

    const size_t n1 = pos_rows.size();
    std::vector<size_t> pos_count(static_cast<size_t>(k), n1 / static_cast<size_t>(k));
    for (size_t r = 0; r < n1 % static_cast<size_t>(k); ++r)
        ++pos_count[static_cast<size_t>(fold_order[r])];
    std::vector<size_t> total(static_cast<size_t>(k), n / static_cast<size_t>(k));
    for (size_t r = 0; r < n % static_cast<size_t>(k); ++r)
        ++total[static_cast<size_t>(fold_order[r])];

    CvPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of_row.assign(n, -1);
    size_t next_pos = 0, next_neg = 0;
    for (int f = 0; f < k; ++f) {
        const size_t fp = pos_count[static_cast<size_t>(f)];
        if (total[static_cast<size_t>(f)] < fp)
            throw NumericError("stratified fold assignment infeasible (near single-class data)");
        const size_t fn = total[static_cast<size_t>(f)] - fp;
        for (size_t t = 0; t < fp; ++t)
            plan.fold_of_row[static_cast<size_t>(pos_rows[next_pos++])] = f;
        for (size_t t = 0; t < fn; ++t)
            plan.fold_of_row[static_cast<size_t>(neg_rows[next_neg++])] = f;
    }
    return plan;
}

namespace {

std::pair<std::vector<size_t>, std::vector<size_t>> fold_rows(const CvPlan& plan, int fold) {
    std::vector<size_t> train, held;
    for (size_t i = 0; i < plan.fold_of_row.size(); ++i)
        (plan.fold_of_row[i] == fold ? held : train).push_back(i);
    return {train, held};
}

void require_both_classes(const FeatureTable& t, int fold) {
    bool pos = false, neg = false;
    for (int y : t.response()) (y ? pos : neg) = true;
    if (!pos || !neg)
        throw NumericError("fold " + std::to_string(fold) +
                           " holds a single class; use a stratified plan");
}

}  // namespace

CvScore cv_auc(const FeatureTable& table, const PipelineFn& fit, const CvPlan& plan) {
    if (plan.fold_of_row.size() != table.n_rows())
        throw UsageError("cv plan does not match the table");
    CvScore score;
    for (int f = 0; f < plan.k; ++f) {
        auto [train_rows, held_rows] = fold_rows(plan, f);
        FeatureTable train = table.subset(train_rows);
        FeatureTable held = table.subset(held_rows);
        require_both_classes(held, f);
        ScoreFn scorer = fit(train);
        std::vector<double> s = scorer(held);
        score.per_fold.push_back(auc(s, held.response()));
    }
    score.mean_auc = mean(score.per_fold);
    score.sd_auc = score.per_fold.size() > 1 ? sample_sd(score.per_fold) : 0.0;
    return score;
}

const TuneCandidate& TuneResult::best() const {
    if (best_index < 0) throw NumericError("tuning produced no successful candidate");
    return candidates[static_cast<size_t>(best_index)];
}

void TuneResult::write_csv(std::ostream& out) const {
    if (candidates.empty()) return;
    for (const auto& [name, value] : candidates.front().params) out << name << ',';
    out << "mean_cv_auc,sd_cv_auc,failed,selected\n";
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        for (const auto& [name, value] : c.params) out << format_double(value) << ',';
        if (c.failed)
            out << ",,1,";
        else
            out << format_double(c.mean_auc) << ',' << format_double(c.sd_auc) << ",0,";
        out << (static_cast<int>(i) == best_index ? 1 : 0) << '\n';
    }
}

std::string TuneResult::summary_json() const {
    nlohmann::json doc;
    doc["n_candidates"] = candidates.size();
    doc["notes"] = notes;
    if (best_index >= 0) {
        const auto& b = best();
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [name, value] : b.params) params[name] = value;
        doc["best"] = {{"params", params}, {"mean_cv_auc", b.mean_auc}, {"sd_cv_auc", b.sd_auc}};
    }
    return doc.dump(2);
}

TuneResult grid_search_glm(const FeatureTable& table, const std::vector<double>& lambdas,
                           const std::vector<double>& alphas, const CvPlan& plan,
                           const RecipeConfig& recipe_config) {
    if (lambdas.empty() || alphas.empty()) throw UsageError("empty hyperparameter grid");
    if (plan.fold_of_row.size() != table.n_rows())
        throw UsageError("cv plan does not match the table");

    // Descending lambda order for warm starts; results are reported in the
    // caller's grid order.
    std::vector<size_t> desc(lambdas.size());
    std::iota(desc.begin(), desc.end(), size_t{0});
    std::sort(desc.begin(), desc.end(),
              [&](size_t a, size_t b) { return lambdas[a] > lambdas[b]; });

    TuneResult result;
    // candidate index = a * lambdas.size() + l
    std::vector<std::vector<double>> fold_auc(alphas.size() * lambdas.size());
    std::vector<bool> failed(alphas.size() * lambdas.size(), false);

    for (int f = 0; f < plan.k; ++f) {
        auto [train_rows, held_rows] = fold_rows(plan, f);
        FeatureTable train_raw = table.subset(train_rows);
        FeatureTable held_raw = table.subset(held_rows);
        require_both_classes(held_raw, f);

        FittedRecipe recipe = recipe_fit(train_raw, recipe_config);
        FeatureTable train = recipe_apply(recipe, train_raw);
        FeatureTable held = recipe_apply(recipe, held_raw);

        for (size_t a = 0; a < alphas.size(); ++a) {
            GlmModel warm;
            bool have_warm = false;
            for (size_t li : desc) {
                const size_t cand = a * lambdas.size() + li;
                GlmFitOptions opts;
                opts.warm_start = have_warm ? &warm : nullptr;
                try {
                    GlmModel model = fit_penalized(train, {lambdas[li], alphas[a]}, opts);
                    std::vector<double> s = predict(model, held);
                    fold_auc[cand].push_back(auc(s, held.response()));
                    warm = std::move(model);
                    have_warm = true;
                } catch (const NumericError& e) {
                    failed[cand] = true;
                    result.notes.push_back("fold " + std::to_string(f) + " lambda " +
                                           format_double(lambdas[li]) + " alpha " +
                                           format_double(alphas[a]) + ": " + e.what());
                }
            }
        }
    }

    for (size_t a = 0; a < alphas.size(); ++a) {
        for (size_t li = 0; li < lambdas.size(); ++li) {
            const size_t cand = a * lambdas.size() + li;
            TuneCandidate c;
            c.params = {{"lambda", lambdas[li]}, {"alpha", alphas[a]}};
            if (failed[cand] || fold_auc[cand].size() != static_cast<size_t>(plan.k)) {
                c.failed = true;
            } else {
                c.mean_auc = mean(fold_auc[cand]);
                c.sd_auc = fold_auc[cand].size() > 1 ? sample_sd(fold_auc[cand]) : 0.0;
            }
            result.candidates.push_back(std::move(c));
        }
    }

    // Winner: max mean AUC; ties prefer smaller lambda, then larger alpha.
    for (size_t i = 0; i < result.candidates.size(); ++i) {
        const auto& c = result.candidates[i];
        if (c.failed) continue;
        if (result.best_index < 0) {
            result.best_index = static_cast<int>(i);
            continue;
        }
        const auto& b = result.candidates[static_cast<size_t>(result.best_index)];
        const double cl = c.params[0].second, ca = c.params[1].second;
        const double bl = b.params[0].second, ba = b.params[1].second;
        if (c.mean_auc > b.mean_auc ||
            (c.mean_auc == b.mean_auc && (cl < bl || (cl == bl && ca > ba))))
            result.best_index = static_cast<int>(i);
    }
    return result;
}

TuneResult bayes_opt_forest(const FeatureTable& table, const IntBox& bounds, const CvPlan& plan,
                            const BayesBudget& budget, const ForestSpec& base_spec,
                            const RecipeConfig& recipe_config, int jobs) {
    if (bounds.bounds.size() != 2)
        throw UsageError("bayes_opt_forest expects 2-D bounds: (features_per_tree, min_split)");
    if (budget.total < budget.initial)
        throw UsageError("bayes_opt_forest: budget smaller than the initial design");

    auto objective = [&](const std::vector<int>& point) {
        ForestSpec spec = base_spec;
        spec.features_per_tree = point[0];
        spec.min_split = point[1];
        PipelineFn pipeline = [&recipe_config, spec, jobs](const FeatureTable& train) -> ScoreFn {
            auto recipe = std::make_shared<FittedRecipe>(recipe_fit(train, recipe_config));
            FeatureTable prepped = recipe_apply(*recipe, train);
            ForestSpec fold_spec = spec;
            fold_spec.features_per_tree =
                std::min(fold_spec.features_per_tree, static_cast<int>(prepped.n_cols()));
            auto model = std::make_shared<ForestModel>(fit_forest(prepped, fold_spec, jobs));
            return [recipe, model](const FeatureTable& t) {
                return forest_predict(*model, recipe_apply(*recipe, t));
            };
        };
        return cv_auc(table, pipeline, plan).mean_auc;
    };

    BayesOptResult opt = bayes_opt_max(objective, bounds, budget.initial, budget.total,
                                       /*xi=*/0.01, /*seed=*/base_spec.seed);

    TuneResult result;
    for (size_t i = 0; i < opt.points.size(); ++i) {
        TuneCandidate c;
        c.params = {{"features_per_tree", static_cast<double>(opt.points[i][0])},
                    {"min_split", static_cast<double>(opt.points[i][1])}};
        c.mean_auc = opt.values[i];
        result.candidates.push_back(std::move(c));
    }
    // Max AUC; ties prefer the lexicographically smaller (p*, n*).
    for (size_t i = 0; i < result.candidates.size(); ++i) {
        if (result.best_index < 0) {
            result.best_index = static_cast<int>(i);
            continue;
        }
        const auto& c = result.candidates[i];
        const auto& b = result.candidates[static_cast<size_t>(result.best_index)];
        if (c.mean_auc > b.mean_auc ||
            (c.mean_auc == b.mean_auc && c.params < b.params))
            result.best_index = static_cast<int>(i);
    }
    return result;
}

}  // namespace ubirisk
