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

#include "ubirisk/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/tree_json.hpp"
#include "ubirisk/stats.hpp"

namespace ubirisk {

LumpResult lump_rare(const std::vector<std::string>& column, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw UsageError("lump threshold must be in (0, 1)");
    std::map<std::string, size_t> counts;
    for (const auto& v : column) ++counts[v];
    const double n = static_cast<double>(column.size());

    LumpResult out;
    for (const auto& [cat, cnt] : counts) {
        if (static_cast<double>(cnt) / n <= threshold) out.lumped.insert(cat);
    }
    out.column.reserve(column.size());
    for (const auto& v : column)
        out.column.push_back(out.lumped.count(v) ? kLumpCategory : v);
    return out;
}

std::map<std::string, double> target_encode_fit(const std::vector<std::string>& column,
                                                const std::vector<int>& y) {
    if (column.size() != y.size()) throw DataError("target_encode_fit: length mismatch");
    if (column.empty()) throw DataError("target_encode_fit: empty column");
    std::map<std::string, std::pair<size_t, size_t>> counts;  // category -> (n, n_pos)
    for (size_t i = 0; i < column.size(); ++i) {
        auto& c = counts[column[i]];
        ++c.first;
        c.second += static_cast<size_t>(y[i]);
    }
    std::map<std::string, double> coef;
    for (const auto& [cat, c] : counts) {
        const double nj = static_cast<double>(c.first);
        double m = static_cast<double>(c.second) / nj;
        // Pure categories have a divergent intercept-free MLE; clamp.
        if (c.second == 0) m = 0.5 / nj;
        if (c.second == c.first) m = 1.0 - 0.5 / nj;
        coef[cat] = logit(m);
    }
    return coef;
}

double BagImputeModel::predict(const std::vector<double>& row) const {
    double sum = 0.0;
    for (const auto& tree : trees)
        sum += tree.predict([&](int j) { return row[static_cast<size_t>(j)]; });
    return sum / static_cast<double>(trees.size());
}

BagImputeModel bag_impute_fit(const FeatureTable& table, const std::string& target_column,
                              int n_trees, int min_leaf, std::uint64_t seed) {
    if (n_trees < 1) throw UsageError("bag_impute_fit: need at least one tree");
    const int target_idx = table.find_column(target_column);
    if (target_idx < 0) throw DataError("bag_impute_fit: no column " + target_column);
    const auto& target = table.numeric(static_cast<size_t>(target_idx));

    BagImputeModel model;
    model.target = target_column;
    std::vector<const std::vector<double>*> columns;
    for (size_t j = 0; j < table.n_cols(); ++j) {
        if (static_cast<int>(j) == target_idx) continue;
        const auto& col = table.numeric(j);  // throws if a categorical survived this far
        for (double v : col)
            if (std::isnan(v))
                throw DataError("bag_impute_fit: predictor " + table.desc(j).name +
                                " has missing values");
        model.predictors.push_back(table.desc(j).name);
        columns.push_back(&col);
    }
    if (columns.empty()) throw DataError("bag_impute_fit: no predictor columns");

    std::vector<int> observed;
    for (size_t i = 0; i < target.size(); ++i)
        if (!std::isnan(target[i])) observed.push_back(static_cast<int>(i));
    if (observed.empty()) throw DataError("bag_impute_fit: no observed values in " + target_column);

    model.observed_min = target[observed.front()];
    model.observed_max = target[observed.front()];
    for (int r : observed) {
        model.observed_min = std::min(model.observed_min, target[r]);
        model.observed_max = std::max(model.observed_max, target[r]);
    }

    std::vector<int> features(columns.size());
    for (size_t j = 0; j < columns.size(); ++j) features[j] = static_cast<int>(j);

    CartConfig cart_cfg;
    cart_cfg.criterion = SplitCriterion::Variance;
    cart_cfg.min_leaf = min_leaf;
    cart_cfg.min_split = 2 * min_leaf;

    model.trees.reserve(static_cast<size_t>(n_trees));
    for (int b = 0; b < n_trees; ++b) {
        Rng rng(seed, 0xba60000u + static_cast<std::uint64_t>(b));
        std::vector<int> rows(observed.size());
        for (auto& r : rows)
            r = observed[static_cast<size_t>(rng.below(observed.size()))];
        model.trees.push_back(fit_cart(columns, target, std::move(rows), features, cart_cfg));
    }
    return model;
}

double yeo_johnson(double x, double theta) {
    if (x >= 0.0) {
        if (theta == 0.0) return std::log1p(x);
        // expm1 form avoids cancellation when theta is tiny but nonzero.
        if (std::fabs(theta) < 1e-4) return std::expm1(theta * std::log1p(x)) / theta;
        return (std::pow(x + 1.0, theta) - 1.0) / theta;
    }
    const double e = 2.0 - theta;
    if (e == 0.0) return -std::log1p(-x);
    if (std::fabs(e) < 1e-4) return -std::expm1(e * std::log1p(-x)) / e;
    return -(std::pow(1.0 - x, e) - 1.0) / e;
}

double yeo_johnson_log_likelihood(const std::vector<double>& column, double theta) {
    const size_t n = column.size();
    double jac = 0.0;
    std::vector<double> z(n);
    for (size_t i = 0; i < n; ++i) {
        z[i] = yeo_johnson(column[i], theta);
        const double sign = column[i] >= 0.0 ? 1.0 : -1.0;
        jac += sign * std::log1p(std::fabs(column[i]));
    }
    double m = 0.0;
    for (double v : z) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : z) var += (v - m) * (v - m);
    var /= static_cast<double>(n);
    if (!(var > 0.0) || !std::isfinite(var))
        return -std::numeric_limits<double>::infinity();
    return -0.5 * static_cast<double>(n) * std::log(var) + (theta - 1.0) * jac;
}

double yeo_johnson_fit(const std::vector<double>& column) {
    std::vector<double> distinct = column;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) return 1.0;

    // Golden-section maximization; the profile likelihood is unimodal in
    // practice on [-5, 5].
    constexpr double kInvPhi = 0.6180339887498949;
    double a = -5.0, b = 5.0;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = yeo_johnson_log_likelihood(column, c);
    double fd = yeo_johnson_log_likelihood(column, d);
    while (b - a > 1e-6) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = yeo_johnson_log_likelihood(column, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = yeo_johnson_log_likelihood(column, d);
        }
    }
    return 0.5 * (a + b);
}

ZScore zscore_fit(const std::vector<double>& column) {
    if (column.size() < 2) throw NumericError("zscore_fit: need at least 2 values");
    ZScore z;
    z.mean = mean(column);
    z.sd = sample_sd(column);
    return z;
}

std::vector<double> zscore_apply(const std::vector<double>& column, const ZScore& z) {
    if (!(z.sd > 0.0)) throw NumericError("zscore_apply: zero standard deviation");
    std::vector<double> out(column.size());
    for (size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - z.mean) / z.sd;
    return out;
}

std::vector<std::pair<std::string, std::string>> make_interaction_set(
    std::vector<std::string> sources) {
    std::sort(sources.begin(), sources.end());
    if (std::adjacent_find(sources.begin(), sources.end()) != sources.end())
        throw DataError("interaction sources contain duplicates");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (size_t i = 0; i < sources.size(); ++i)
        for (size_t j = i + 1; j < sources.size(); ++j)
            pairs.emplace_back(sources[i], sources[j]);
    return pairs;
}

FeatureTable expand_interactions(const FeatureTable& table,
                                 const std::vector<std::string>& sources) {
    auto pairs = make_interaction_set(sources);
    FeatureTable out = table;
    for (const auto& [a, b] : pairs) {
        const auto& va = table.numeric(a);
        const auto& vb = table.numeric(b);
        std::vector<double> prod(va.size());
        for (size_t i = 0; i < va.size(); ++i) prod[i] = va[i] * vb[i];
        out.add_numeric({a + ":" + b, ColumnKind::Numeric, ColumnOrigin::Interaction},
                        std::move(prod));
    }
    return out;
}

const std::vector<std::string>& default_interaction_sources() {
    static const std::vector<std::string> kSources = {
        // classical
        "annual_distance", "commute_distance", "conv_count_3_yrs_minor", "gender",
        "marital_status", "pmt_plan", "veh_age", "veh_use", "years_claim_free",
        "years_licensed",
        // telematics with significant group-mean differences
        "avg_daily_distance", "avg_daily_nb_trips", "med_trip_avg_speed",
        "max_trip_max_speed", "frac_expo_noon", "frac_expo_evening",
        "frac_expo_peak_evening"};
    return kSources;
}

std::vector<std::string> FittedRecipe::output_columns() const {
    std::vector<std::string> names;
    for (const auto& step : numeric)
        if (!step.dropped) names.push_back(step.name);
    return names;
}

std::string FittedRecipe::to_json() const {
    nlohmann::json doc;
    doc["config"] = {{"lump_threshold", config.lump_threshold},
                     {"bag_trees", config.bag_trees},
                     {"bag_min_leaf", config.bag_min_leaf},
                     {"impute_columns", config.impute_columns},
                     {"interaction_sources", config.interaction_sources},
                     {"seed", config.seed}};
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& d : input_columns)
        cols.push_back({{"name", d.name}, {"kind", to_string(d.kind)}, {"origin", to_string(d.origin)}});
    doc["input_columns"] = cols;

    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [name, step] : categorical) {
        cats[name] = {{"lumped", std::vector<std::string>(step.lumped.begin(), step.lumped.end())},
                      {"encoding", step.encoding},
                      {"fallback", step.fallback}};
    }
    doc["categorical"] = cats;

    nlohmann::json imps = nlohmann::json::object();
    for (const auto& [name, model] : imputers) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : model.trees) trees.push_back(cart_tree_to_json(t));
        imps[name] = {{"predictors", model.predictors},
                      {"observed_min", model.observed_min},
                      {"observed_max", model.observed_max},
                      {"trees", trees}};
    }
    doc["imputers"] = imps;

    nlohmann::json nums = nlohmann::json::array();
    for (const auto& step : numeric) {
        nums.push_back({{"name", step.name},
                        {"theta", step.theta},
                        {"mean", step.z.mean},
                        {"sd", step.z.sd},
                        {"dropped", step.dropped}});
    }
    doc["numeric"] = nums;
    doc["interactions"] = interactions;
    doc["warnings"] = warnings;
    return doc.dump(2);
}

FittedRecipe FittedRecipe::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad recipe json: ") + e.what());
    }
    FittedRecipe recipe;
    const auto& cfg = doc.at("config");
    recipe.config.lump_threshold = cfg.at("lump_threshold").get<double>();
    recipe.config.bag_trees = cfg.at("bag_trees").get<int>();
    recipe.config.bag_min_leaf = cfg.at("bag_min_leaf").get<int>();
    recipe.config.impute_columns = cfg.at("impute_columns").get<std::vector<std::string>>();
    recipe.config.interaction_sources =
        cfg.at("interaction_sources").get<std::vector<std::string>>();
    recipe.config.seed = cfg.at("seed").get<std::uint64_t>();

    for (const auto& c : doc.at("input_columns")) {
        recipe.input_columns.push_back({c.at("name").get<std::string>(),
                                        column_kind_from_string(c.at("kind").get<std::string>()),
                                        column_origin_from_string(c.at("origin").get<std::string>())});
    }
    for (const auto& [name, j] : doc.at("categorical").items()) {
        CategoricalStep step;
        auto lumped = j.at("lumped").get<std::vector<std::string>>();
        step.lumped = std::set<std::string>(lumped.begin(), lumped.end());
        step.encoding = j.at("encoding").get<std::map<std::string, double>>();
        step.fallback = j.at("fallback").get<double>();
        recipe.categorical[name] = std::move(step);
    }
    for (const auto& [name, j] : doc.at("imputers").items()) {
        BagImputeModel model;
        model.target = name;
        model.predictors = j.at("predictors").get<std::vector<std::string>>();
        model.observed_min = j.at("observed_min").get<double>();
        model.observed_max = j.at("observed_max").get<double>();
        for (const auto& t : j.at("trees")) model.trees.push_back(cart_tree_from_json(t));
        recipe.imputers[name] = std::move(model);
    }
    for (const auto& j : doc.at("numeric")) {
        NumericStep step;
        step.name = j.at("name").get<std::string>();
        step.theta = j.at("theta").get<double>();
        step.z.mean = j.at("mean").get<double>();
        step.z.sd = j.at("sd").get<double>();
        step.dropped = j.at("dropped").get<bool>();
        recipe.numeric.push_back(std::move(step));
    }
    recipe.interactions =
        doc.at("interactions").get<std::vector<std::pair<std::string, std::string>>>();
    recipe.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return recipe;
}

namespace {

/// Numeric view of a table after lumping + encoding: original numeric columns
/// pass through, categorical columns become their encoded values.
FeatureTable encode_stage(const FittedRecipe& recipe, const FeatureTable& table) {
    FeatureTable out(table.row_ids(), table.response());
    for (size_t j = 0; j < table.n_cols(); ++j) {
        const ColumnDesc& desc = table.desc(j);
        if (desc.kind == ColumnKind::Numeric) {
            out.add_numeric(desc, table.numeric(j));
            continue;
        }
        const auto& step = recipe.categorical.at(desc.name);
        const auto& raw = table.categorical(j);
        std::vector<double> encoded(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            const std::string& cat = step.lumped.count(raw[i]) ? kLumpCategory : raw[i];
            auto it = step.encoding.find(cat);
            if (it != step.encoding.end()) {
                encoded[i] = it->second;
            } else {
                auto lump_it = step.encoding.find(kLumpCategory);
                encoded[i] = lump_it != step.encoding.end() ? lump_it->second : step.fallback;
            }
        }
        out.add_numeric({desc.name, ColumnKind::Numeric, desc.origin}, std::move(encoded));
    }
    return out;
}

void impute_column(const BagImputeModel& model, FeatureTable& encoded, size_t j) {
    std::vector<size_t> missing;
    {
        const auto& col = encoded.numeric(j);
        for (size_t i = 0; i < col.size(); ++i)
            if (std::isnan(col[i])) missing.push_back(i);
    }
    if (missing.empty()) return;
    std::vector<double> row(model.predictors.size());
    std::vector<size_t> pred_idx(model.predictors.size());
    for (size_t p = 0; p < model.predictors.size(); ++p) {
        int idx = encoded.find_column(model.predictors[p]);
        if (idx < 0) throw DataError("imputer predictor missing: " + model.predictors[p]);
        pred_idx[p] = static_cast<size_t>(idx);
    }
    for (size_t i : missing) {
        for (size_t p = 0; p < pred_idx.size(); ++p) row[p] = encoded.numeric(pred_idx[p])[i];
        encoded.numeric_mut(j)[i] = model.predict(row);
    }
}

void impute_stage(const FittedRecipe& recipe, FeatureTable& encoded) {
    for (size_t j = 0; j < encoded.n_cols(); ++j) {
        const std::string& name = encoded.desc(j).name;
        bool has_missing = false;
        for (double v : encoded.numeric(j))
            if (std::isnan(v)) {
                has_missing = true;
                break;
            }
        if (!has_missing) continue;
        auto it = recipe.imputers.find(name);
        if (it == recipe.imputers.end())
            throw DataError("column " + name + " has missing values but no imputation model");
        impute_column(it->second, encoded, j);
    }
}

}  // namespace

FittedRecipe recipe_fit(const FeatureTable& train, const RecipeConfig& config) {
    if (train.n_rows() < 2) throw DataError("recipe_fit: need at least 2 training rows");
    FittedRecipe recipe;
    recipe.config = config;
    recipe.input_columns = train.columns();

    // Categorical path: lump, then encode against the response.
    for (size_t j = 0; j < train.n_cols(); ++j) {
        const ColumnDesc& desc = train.desc(j);
        if (desc.kind != ColumnKind::Categorical) continue;
        LumpResult lump = lump_rare(train.categorical(j), config.lump_threshold);
        CategoricalStep step;
        step.lumped = std::move(lump.lumped);
        step.encoding = target_encode_fit(lump.column, train.response());
        double weighted = 0.0;
        std::map<std::string, size_t> counts;
        for (const auto& v : lump.column) ++counts[v];
        for (const auto& [cat, coef] : step.encoding)
            weighted += coef * static_cast<double>(counts.at(cat));
        step.fallback = weighted / static_cast<double>(train.n_rows());
        recipe.categorical[desc.name] = std::move(step);
    }

    FeatureTable encoded = encode_stage(recipe, train);

    // Imputation models for designated columns that actually have holes.
    // Fitted and applied in order so a later imputer sees completed columns.
    for (const auto& name : config.impute_columns) {
        int j = encoded.find_column(name);
        if (j < 0) continue;
        const auto& col = encoded.numeric(static_cast<size_t>(j));
        const bool has_missing = std::any_of(col.begin(), col.end(),
                                             [](double v) { return std::isnan(v); });
        if (!has_missing) continue;
        BagImputeModel model = bag_impute_fit(encoded, name, config.bag_trees,
                                              config.bag_min_leaf, config.seed);
        impute_column(model, encoded, static_cast<size_t>(j));
        recipe.imputers[name] = std::move(model);
    }

    for (size_t j = 0; j < encoded.n_cols(); ++j) {
        const auto& col = encoded.numeric(j);
        for (double v : col)
            if (std::isnan(v))
                throw DataError("column " + encoded.desc(j).name +
                                " still has missing values after imputation");
    }

    if (!config.interaction_sources.empty())
        encoded = expand_interactions(encoded, config.interaction_sources);

    recipe.interactions = config.interaction_sources.empty()
                              ? std::vector<std::pair<std::string, std::string>>{}
                              : make_interaction_set(config.interaction_sources);

    // Numeric path: Yeo-Johnson, then z-score; constant columns are dropped.
    for (size_t j = 0; j < encoded.n_cols(); ++j) {
        NumericStep step;
        step.name = encoded.desc(j).name;
        const auto& col = encoded.numeric(j);
        step.theta = yeo_johnson_fit(col);
        std::vector<double> transformed(col.size());
        for (size_t i = 0; i < col.size(); ++i) transformed[i] = yeo_johnson(col[i], step.theta);
        step.z = zscore_fit(transformed);
        if (!(step.z.sd > 0.0)) {
            step.dropped = true;
            step.z.sd = 1.0;
            recipe.warnings.push_back("dropped zero-variance column " + step.name);
        }
        recipe.numeric.push_back(std::move(step));
    }
    return recipe;
}

FeatureTable recipe_apply(const FittedRecipe& recipe, const FeatureTable& table) {
    if (table.columns().size() != recipe.input_columns.size())
        throw DataError("recipe_apply: column count mismatch");
    for (size_t j = 0; j < recipe.input_columns.size(); ++j) {
        if (table.desc(j).name != recipe.input_columns[j].name ||
            table.desc(j).kind != recipe.input_columns[j].kind)
            throw DataError("recipe_apply: column mismatch at position " + std::to_string(j) +
                            ": expected " + recipe.input_columns[j].name);
    }

    FeatureTable encoded = encode_stage(recipe, table);
    impute_stage(recipe, encoded);
    if (!recipe.interactions.empty())
        encoded = expand_interactions(encoded, recipe.config.interaction_sources);

    FeatureTable out(table.row_ids(), table.response());
    for (const NumericStep& step : recipe.numeric) {
        if (step.dropped) continue;
        const size_t src = static_cast<size_t>(encoded.find_column(step.name));
        const auto& col = encoded.numeric(src);
        std::vector<double> v(col.size());
        for (size_t i = 0; i < col.size(); ++i) {
            if (std::isnan(col[i]))
                throw DataError("column " + step.name + " has missing values at apply time");
            v[i] = (yeo_johnson(col[i], step.theta) - step.z.mean) / step.z.sd;
        }
        out.add_numeric({step.name, ColumnKind::Numeric, encoded.desc(src).origin}, std::move(v));
    }
    return out;
}

}  // namespace ubirisk
