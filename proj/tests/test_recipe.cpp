#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ubirisk/cart.hpp"
#include "ubirisk/common.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

using namespace ubirisk;

TEST_CASE("lump_rare") {
    // 90/6/4 percent split with a 5% threshold lumps only C.
    std::vector<std::string> col;
    for (int i = 0; i < 90; ++i) col.push_back("A");
    for (int i = 0; i < 6; ++i) col.push_back("B");
    for (int i = 0; i < 4; ++i) col.push_back("C");
    auto lumped = lump_rare(col, 0.05);
    CHECK(lumped.lumped == std::set<std::string>{"C"});
    CHECK(std::count(lumped.column.begin(), lumped.column.end(), "other") == 4);

    // All frequent: identity.
    std::vector<std::string> even = {"x", "y", "x", "y"};
    auto none = lump_rare(even, 0.05);
    CHECK(none.lumped.empty());
    CHECK(none.column == even);

    // 95/3/2: B and C merge into one category of mass 5%.
    std::vector<std::string> col2;
    for (int i = 0; i < 95; ++i) col2.push_back("A");
    for (int i = 0; i < 3; ++i) col2.push_back("B");
    for (int i = 0; i < 2; ++i) col2.push_back("C");
    auto both = lump_rare(col2, 0.05);
    CHECK(both.lumped == std::set<std::string>{"B", "C"});
    CHECK(std::count(both.column.begin(), both.column.end(), "other") == 5);
}

TEST_CASE("target encoding is the logit of the category mean") {
    // 100 women with mean 0.09, 100 men with mean 0.11.
    std::vector<std::string> col;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        col.push_back("woman");
        y.push_back(i < 9);
    }
    for (int i = 0; i < 100; ++i) {
        col.push_back("man");
        y.push_back(i < 11);
    }
    auto enc = target_encode_fit(col, y);
    CHECK(enc.at("woman") == doctest::Approx(logit(0.09)).epsilon(1e-12));
    CHECK(enc.at("man") == doctest::Approx(logit(0.11)).epsilon(1e-12));
    CHECK(enc.at("woman") == doctest::Approx(-2.3136).epsilon(1e-4));
    CHECK(enc.at("man") == doctest::Approx(-2.0907).epsilon(1e-4));

    // Category mean 1/2 encodes to zero.
    std::vector<std::string> half = {"a", "a"};
    std::vector<int> half_y = {0, 1};
    CHECK(target_encode_fit(half, half_y).at("a") == 0.0);
}

TEST_CASE("target encoding matches the intercept-free MLE oracle") {
    Rng rng(123);
    std::vector<std::string> col;
    std::vector<int> y;
    std::map<std::string, std::vector<int>> groups;
    const char* cats[3] = {"p", "q", "r"};
    for (int i = 0; i < 120; ++i) {
        const char* c = cats[rng.below(3)];
        const int yi = rng.bernoulli(c[0] == 'p' ? 0.2 : c[0] == 'q' ? 0.5 : 0.8) ? 1 : 0;
        col.push_back(c);
        y.push_back(yi);
        groups[c].push_back(yi);
    }
    auto enc = target_encode_fit(col, y);
    for (const auto& [cat, ys] : groups) {
        CHECK(enc.at(cat) ==
              doctest::Approx(oracles::intercept_free_logit_mle(ys)).epsilon(1e-8));
    }

    // Pure categories clamp instead of diverging.
    std::vector<std::string> pure = {"z", "z", "z", "z", "w", "w"};
    std::vector<int> pure_y = {0, 0, 0, 0, 1, 1};
    auto clamped = target_encode_fit(pure, pure_y);
    CHECK(clamped.at("z") == doctest::Approx(logit(0.5 / 4.0)));
    CHECK(clamped.at("w") == doctest::Approx(logit(1.0 - 0.5 / 2.0)));

    // Encoding preserves the order of the category means.
    CHECK(enc.at("p") < enc.at("q"));
    CHECK(enc.at("q") < enc.at("r"));
}

namespace {

FeatureTable numeric_table(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& cols,
                           std::vector<int> y) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < y.size(); ++i) ids.push_back("r" + std::to_string(i));
    FeatureTable t(ids, std::move(y));
    for (size_t j = 0; j < names.size(); ++j)
        t.add_numeric({names[j], ColumnKind::Numeric, ColumnOrigin::Classical}, cols[j]);
    return t;
}

}  // namespace

TEST_CASE("bagged imputation") {
    // Constant observed target: every imputation equals that constant.
    {
        std::vector<double> target = {5.0, 5.0, 5.0, 5.0, std::nan(""), std::nan("")};
        std::vector<double> x = {1, 2, 3, 4, 5, 6};
        auto t = numeric_table({"target", "x"}, {target, x}, {0, 1, 0, 1, 0, 1});
        auto model = bag_impute_fit(t, "target", 10, 1, 7);
        CHECK(model.predict({9.0}) == doctest::Approx(5.0));
    }
    // Depth-1 deterministic fixture: a single regression tree on a binary
    // predictor predicts exactly the branch means.
    {
        std::vector<double> target = {2.0, 2.0, 10.0, 10.0};
        std::vector<double> x = {0, 0, 1, 1};
        std::vector<const std::vector<double>*> cols = {&x};
        CartConfig cfg;
        cfg.criterion = SplitCriterion::Variance;
        auto tree = fit_cart(cols, target, {0, 1, 2, 3}, {0}, cfg);
        CHECK(tree.predict([](int) { return 0.0; }) == 2.0);
        CHECK(tree.predict([](int) { return 1.0; }) == 10.0);

        // The bagged version converges to the same branch means.
        std::vector<double> with_hole = {2.0, 2.0, 10.0, 10.0, std::nan("")};
        std::vector<double> xs = {0, 0, 1, 1, 1};
        auto t = numeric_table({"target", "x"}, {with_hole, xs}, {0, 1, 0, 1, 0});
        // Bootstrap resamples occasionally miss one branch entirely, so the
        // averages sit near (not on) the branch means, inside the data range.
        auto model = bag_impute_fit(t, "target", 400, 1, 3);
        CHECK(model.predict({1.0}) > 8.0);
        CHECK(model.predict({0.0}) < 4.0);
        CHECK(model.predict({1.0}) <= 10.0);
        CHECK(model.predict({0.0}) >= 2.0);
    }
    // Imputations never leave the observed range.
    {
        Rng rng(99);
        std::vector<double> target, x1, x2;
        for (int i = 0; i < 200; ++i) {
            x1.push_back(rng.normal());
            x2.push_back(rng.uniform(0.0, 4.0));
            const bool missing = rng.bernoulli(0.25);
            target.push_back(missing ? std::nan("")
                                     : 3.0 * x1.back() + x2.back() + rng.normal());
        }
        auto t = numeric_table({"target", "a", "b"}, {target, x1, x2},
                               std::vector<int>(200, 0));
        auto model = bag_impute_fit(t, "target", 25, 5, 11);
        Rng probe(100);
        for (int i = 0; i < 100; ++i) {
            const double pred = model.predict({probe.normal(0.0, 3.0), probe.uniform(-2.0, 6.0)});
            CHECK(pred >= model.observed_min);
            CHECK(pred <= model.observed_max);
        }
    }
    // No observed values at all is an error.
    {
        std::vector<double> target = {std::nan(""), std::nan("")};
        std::vector<double> x = {1, 2};
        auto t = numeric_table({"target", "x"}, {target, x}, {0, 1});
        CHECK_THROWS_AS(bag_impute_fit(t, "target", 5, 1, 1), DataError);
    }
}

TEST_CASE("yeo-johnson transform identities") {
    for (double theta : {-2.0, -0.5, 0.0, 0.7, 1.0, 2.0, 3.5})
        CHECK(yeo_johnson(0.0, theta) == 0.0);
    for (double x : {0.0, 0.5, 3.0, 42.0}) CHECK(yeo_johnson(x, 1.0) == x);
    CHECK(yeo_johnson(3.0, 0.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(yeo_johnson(-3.0, 2.0) == doctest::Approx(-std::log(4.0)).epsilon(1e-15));

    // Strictly increasing in x, continuous across the theta singularities.
    Rng rng(4);
    for (double theta : {-3.0, 0.0, 1e-9, 1.0, 2.0, 2.0 + 1e-9, 4.0}) {
        double prev = yeo_johnson(-50.0, theta);
        for (double x = -49.0; x <= 50.0; x += 1.0) {
            const double cur = yeo_johnson(x, theta);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    // The removable singularities: theta -> 0 matters on the positive branch,
    // theta -> 2 on the negative branch.
    for (double x : {0.4, 7.3, 12.0})
        CHECK(std::fabs(yeo_johnson(x, 1e-9) - yeo_johnson(x, 0.0)) < 1e-7);
    for (double x : {-12.0, -7.3, -0.4})
        CHECK(std::fabs(yeo_johnson(x, 2.0 + 1e-9) - yeo_johnson(x, 2.0)) < 1e-7);
}

TEST_CASE("yeo-johnson maximum likelihood fit") {
    // Near-normal data keeps theta close to 1.
    Rng rng(2024);
    std::vector<double> normal(1000);
    for (auto& v : normal) v = rng.normal();
    const double theta_normal = yeo_johnson_fit(normal);
    CHECK(std::fabs(theta_normal - 1.0) < 0.3);

    // Log-normal data wants a log-like transform: theta < 1, and the
    // golden-section optimum matches a dense profile-likelihood grid.
    std::vector<double> skewed(600);
    for (auto& v : skewed) v = std::exp(rng.normal());
    const double theta_skewed = yeo_johnson_fit(skewed);
    CHECK(theta_skewed < 1.0);
    const double grid = oracles::yj_grid_argmax(skewed, -5.0, 5.0, 20000);
    CHECK(theta_skewed == doctest::Approx(grid).epsilon(1e-3));

    // Symmetric two-point sample: the profile likelihood is symmetric around
    // theta = 1, so the grid argmax and the fit agree there too.
    std::vector<double> two = {-2.0, 2.0, -2.0, 2.0};
    const double ll_lo = yeo_johnson_log_likelihood(two, 0.3);
    const double ll_hi = yeo_johnson_log_likelihood(two, 1.7);
    CHECK(ll_lo == doctest::Approx(ll_hi).epsilon(1e-9));

    // Degenerate column: identity.
    CHECK(yeo_johnson_fit({3.0, 3.0, 3.0}) == 1.0);
}

TEST_CASE("z-score") {
    auto z = zscore_fit({1.0, 2.0, 3.0});
    CHECK(z.mean == 2.0);
    CHECK(z.sd == 1.0);
}

TEST_CASE("interaction expansion") {
    std::vector<std::vector<double>> cols = {{1, 2}, {3, 4}, {0, 0}};
    auto t = numeric_table({"b", "a", "zero"}, cols, {0, 1});
    auto expanded = expand_interactions(t, {"b", "a", "zero"});
    CHECK(expanded.n_cols() == 6);
    CHECK(expanded.find_column("a:b") >= 0);
    CHECK(expanded.find_column("a:zero") >= 0);
    CHECK(expanded.find_column("b:zero") >= 0);
    CHECK(expanded.numeric("a:b") == std::vector<double>{3.0, 8.0});
    CHECK(expanded.numeric("a:zero") == std::vector<double>{0.0, 0.0});
    CHECK(expanded.desc(3).origin == ColumnOrigin::Interaction);

    CHECK(make_interaction_set(default_interaction_sources()).size() == 136);
    CHECK_THROWS_AS(make_interaction_set({"x", "x"}), DataError);
}

namespace {

FeatureTable recipe_fixture(int n, std::uint64_t seed, bool with_missing = true) {
    Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<int> y;
    std::vector<double> num1, num2, commute;
    std::vector<std::string> cat;
    for (int i = 0; i < n; ++i) {
        ids.push_back("v" + std::to_string(i));
        y.push_back(rng.bernoulli(0.3) ? 1 : 0);
        num1.push_back(std::exp(rng.normal()));
        num2.push_back(rng.uniform(-4.0, 9.0));
        commute.push_back(with_missing && rng.bernoulli(0.2) ? std::nan("")
                                                             : rng.uniform(0.5, 40.0));
        const double u = rng.uniform();
        cat.push_back(u < 0.5 ? "red" : u < 0.95 ? "blue" : "green");
    }
    FeatureTable t(ids, y);
    t.add_numeric({"num1", ColumnKind::Numeric, ColumnOrigin::Telematics}, num1);
    t.add_numeric({"commute_distance", ColumnKind::Numeric, ColumnOrigin::Classical}, commute);
    t.add_categorical({"color", ColumnKind::Categorical, ColumnOrigin::Classical}, cat);
    t.add_numeric({"num2", ColumnKind::Numeric, ColumnOrigin::Classical}, num2);
    return t;
}

}  // namespace

TEST_CASE("recipe end to end") {
    auto train = recipe_fixture(300, 1);
    auto recipe = recipe_fit(train);

    // green (~5%) gets lumped into "other" at the default threshold ... or
    // kept, depending on the draw; either way the encoding covers the lumped
    // category when one exists.
    const auto& step = recipe.categorical.at("color");
    if (!step.lumped.empty()) CHECK(step.encoding.count("other") == 1);

    auto out = recipe_apply(recipe, train);
    CHECK(out.all_numeric());
    CHECK(out.n_rows() == train.n_rows());

    // Output columns standardized: mean 0, sd 1 (training rows).
    for (size_t j = 0; j < out.n_cols(); ++j) {
        const auto& col = out.numeric(j);
        CHECK(std::fabs(mean(col)) < 1e-12);
        CHECK(sample_sd(col) == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : col) CHECK(!std::isnan(v));
    }

    // Purity: applying twice gives identical matrices.
    auto out2 = recipe_apply(recipe, train);
    for (size_t j = 0; j < out.n_cols(); ++j) CHECK(out.numeric(j) == out2.numeric(j));

    // Test rows use training statistics, not their own.
    auto test = recipe_fixture(100, 2);
    auto test_out = recipe_apply(recipe, test);
    CHECK(std::fabs(mean(test_out.numeric(0))) > 1e-6);

    // Unseen category at apply time maps to the lump/fallback encoding.
    auto weird = recipe_fixture(5, 3, false);
    FeatureTable modified(weird.row_ids(), weird.response());
    modified.add_numeric(weird.desc(0), weird.numeric(0));
    modified.add_numeric(weird.desc(1), weird.numeric(1));
    std::vector<std::string> cats(5, "ultraviolet");
    modified.add_categorical(weird.desc(2), cats);
    modified.add_numeric(weird.desc(3), weird.numeric(3));
    auto weird_out = recipe_apply(recipe, modified);
    const double expected_code = step.lumped.empty() ? step.fallback : step.encoding.at("other");
    const auto& color_step =
        *std::find_if(recipe.numeric.begin(), recipe.numeric.end(),
                      [](const NumericStep& s) { return s.name == "color"; });
    const double expected_out =
        (yeo_johnson(expected_code, color_step.theta) - color_step.z.mean) / color_step.z.sd;
    for (double v : weird_out.numeric("color")) CHECK(v == doctest::Approx(expected_out));
}

TEST_CASE("recipe matches hand-executed steps on a small fixture") {
    // One categorical, one numeric with a missing value.
    std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f"};
    std::vector<int> y = {1, 0, 0, 1, 0, 1};
    FeatureTable t(ids, y);
    t.add_numeric({"x", ColumnKind::Numeric, ColumnOrigin::Classical},
                  {1.0, 2.0, std::nan(""), 4.0, 5.0, 6.0});
    t.add_categorical({"g", ColumnKind::Categorical, ColumnOrigin::Classical},
                      {"m", "m", "m", "f", "f", "f"});

    RecipeConfig config;
    config.impute_columns = {"x"};
    config.bag_trees = 30;
    config.bag_min_leaf = 1;
    auto recipe = recipe_fit(t, config);
    auto out = recipe_apply(recipe, t);

    // Step 1: no lumping (both categories at 50%).
    CHECK(recipe.categorical.at("g").lumped.empty());
    // Step 2: encoding = logit of the category means (1/3 and 2/3).
    const double enc_m = logit(1.0 / 3.0);
    const double enc_f = logit(2.0 / 3.0);
    CHECK(recipe.categorical.at("g").encoding.at("m") == doctest::Approx(enc_m));
    CHECK(recipe.categorical.at("g").encoding.at("f") == doctest::Approx(enc_f));
    // Step 3: the imputer sees the encoded table; with the missing row's
    // encoded g = enc_m its prediction must sit inside the observed range.
    REQUIRE(recipe.imputers.count("x") == 1);
    const double imputed = recipe.imputers.at("x").predict({enc_m});
    CHECK(imputed >= 1.0);
    CHECK(imputed <= 6.0);
    // Steps 4-5 on the completed column, by hand.
    std::vector<double> completed = {1.0, 2.0, imputed, 4.0, 5.0, 6.0};
    const double theta = yeo_johnson_fit(completed);
    const auto* x_step = &recipe.numeric.front();
    CHECK(x_step->name == "x");
    CHECK(x_step->theta == doctest::Approx(theta));
    std::vector<double> transformed;
    for (double v : completed) transformed.push_back(yeo_johnson(v, theta));
    const double m = mean(transformed);
    const double sd = sample_sd(transformed);
    for (size_t i = 0; i < 6; ++i) {
        CHECK(out.numeric("x")[i] == doctest::Approx((transformed[i] - m) / sd).epsilon(1e-12));
    }
}

TEST_CASE("recipe reduces to yeo-johnson + z-score on clean numeric tables") {
    auto t = numeric_table({"a", "b"}, {{1, 2, 3, 4}, {5, 1, 9, 2}}, {0, 1, 0, 1});
    auto recipe = recipe_fit(t);
    CHECK(recipe.categorical.empty());
    CHECK(recipe.imputers.empty());
    CHECK(recipe.numeric.size() == 2);
}

TEST_CASE("no leakage: recipe is a pure function of training rows") {
    auto train = recipe_fixture(200, 5);
    auto recipe1 = recipe_fit(train);
    // Perturbing any *test* row cannot touch the fitted statistics; fitting
    // again on the same training rows is bit-identical.
    auto recipe2 = recipe_fit(train);
    CHECK(recipe1.to_json() == recipe2.to_json());

    // Serialization round-trips and the deserialized recipe scores identically.
    auto restored = FittedRecipe::from_json(recipe1.to_json());
    auto test = recipe_fixture(60, 6);
    auto a = recipe_apply(recipe1, test);
    auto b = recipe_apply(restored, test);
    for (size_t j = 0; j < a.n_cols(); ++j) CHECK(a.numeric(j) == b.numeric(j));
}

TEST_CASE("zero-variance columns are dropped with a warning") {
    auto t = numeric_table({"const", "x"}, {{3, 3, 3, 3}, {1, 2, 3, 4}}, {0, 1, 0, 1});
    auto recipe = recipe_fit(t);
    auto out = recipe_apply(recipe, t);
    CHECK(out.n_cols() == 1);
    CHECK(out.find_column("const") == -1);
    REQUIRE(recipe.warnings.size() == 1);
    CHECK(recipe.warnings[0].find("const") != std::string::npos);
}
