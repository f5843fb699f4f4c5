#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "ubirisk/common.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/study.hpp"
#include "ubirisk/synth.hpp"
#include "ubirisk/tuning.hpp"

using namespace ubirisk;

TEST_CASE("bootstrap_auc basics") {
    std::vector<double> scores = {0.1, 0.4, 0.35, 0.8, 0.7, 0.2, 0.9, 0.05, 0.6, 0.5};
    std::vector<int> labels = {0, 0, 1, 1, 1, 0, 1, 0, 1, 0};

    // Identity hook: replicate 0 equals the point AUC.
    auto reps = bootstrap_auc(scores, labels, 1, 5, nullptr, /*identity_first=*/true);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0] == auc(scores, labels));

    // Constant scores: every replicate is exactly 1/2.
    std::vector<double> flat(10, 0.3);
    auto flat_reps = bootstrap_auc(flat, labels, 50, 2);
    for (double a : flat_reps) CHECK(a == 0.5);

    // Replicates always lie in [0, 1]; determinism per seed.
    auto a1 = bootstrap_auc(scores, labels, 200, 7);
    auto a2 = bootstrap_auc(scores, labels, 200, 7);
    CHECK(a1 == a2);
    for (double a : a1) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }

    std::vector<int> ones(10, 1);
    CHECK_THROWS_AS(bootstrap_auc(scores, ones, 10, 1), DataError);
}

TEST_CASE("bootstrap replicate mean approaches the exact resample mean") {
    // 10 rows: the exact bootstrap distribution is an enumerable mixture over
    // resample count vectors (c_0..c_9), sum 10, weighted multinomially and
    // conditioned on both classes appearing (single-class draws are redrawn).
    std::vector<double> scores = {0.12, 0.3, 0.3, 0.44, 0.52, 0.61, 0.61, 0.7, 0.86, 0.9};
    std::vector<int> labels = {0, 0, 1, 0, 1, 0, 1, 1, 0, 1};
    const size_t n = 10;

    std::vector<double> log_fact(n + 1, 0.0);
    for (size_t i = 1; i <= n; ++i) log_fact[i] = log_fact[i - 1] + std::log(i);

    double mean_sum = 0.0, weight_sum = 0.0;
    std::vector<int> counts(n, 0);
    std::function<void(size_t, int)> walk = [&](size_t idx, int used) {
        if (idx == n - 1) {
            counts[idx] = static_cast<int>(n) - used;
            std::vector<double> s;
            std::vector<int> y;
            bool pos = false, neg = false;
            double log_w = log_fact[n] - n * std::log(static_cast<double>(n));
            for (size_t i = 0; i < n; ++i) {
                log_w -= log_fact[static_cast<size_t>(counts[i])];
                for (int c = 0; c < counts[i]; ++c) {
                    s.push_back(scores[i]);
                    y.push_back(labels[i]);
                    (labels[i] ? pos : neg) = true;
                }
            }
            if (pos && neg) {
                const double w = std::exp(log_w);
                mean_sum += w * auc(s, y);
                weight_sum += w;
            }
            return;
        }
        for (int c = 0; c + used <= static_cast<int>(n); ++c) {
            counts[idx] = c;
            walk(idx + 1, used + c);
        }
    };
    walk(0, 0);
    const double exact_mean = mean_sum / weight_sum;

    auto reps = bootstrap_auc(scores, labels, 2000, 99);
    CHECK(std::fabs(mean(reps) - exact_mean) < 0.02);
}

namespace {

BootstrapDistribution dist_with_median(int k, double med) {
    BootstrapDistribution d;
    d.k = k;
    d.replicate_auc = {med - 0.01, med, med + 0.01};
    d.point_auc = med;
    return d;
}

}  // namespace

TEST_CASE("redundancy point") {
    // Constructed plateau: medians rise to 0.63 at k=3 and stay.
    {
        std::vector<double> medians = {0.55, 0.60, 0.62, 0.63, 0.63, 0.63, 0.63,
                                       0.63, 0.63, 0.63, 0.63, 0.63, 0.63};
        std::vector<BootstrapDistribution> dists;
        for (int k = 0; k <= 12; ++k)
            dists.push_back(dist_with_median(k, medians[static_cast<size_t>(k)]));
        CHECK(redundancy_point(dists, 0.005) == 3);
    }
    // Strictly increasing with steps above delta: never redundant, k* = 12.
    {
        std::vector<BootstrapDistribution> dists;
        for (int k = 0; k <= 12; ++k) dists.push_back(dist_with_median(k, 0.5 + 0.01 * k));
        CHECK(redundancy_point(dists, 0.005) == 12);
    }
    // Monotone decreasing: k* = 1 immediately.
    {
        std::vector<BootstrapDistribution> dists;
        for (int k = 0; k <= 12; ++k) dists.push_back(dist_with_median(k, 0.7 - 0.01 * k));
        CHECK(redundancy_point(dists, 0.005) == 1);
    }
    std::vector<BootstrapDistribution> short_list(3);
    CHECK_THROWS_AS(redundancy_point(short_list, 0.005), UsageError);
}

TEST_CASE("compare_importance") {
    using Imp = std::vector<std::pair<std::string, double>>;
    Imp lasso = {{"night", 0.9}, {"annual", 0.5}, {"speed", 0.1}};
    Imp forest = {{"night", 4.0}, {"speed", 2.0}, {"annual", 1.0}};
    std::map<std::string, ColumnOrigin> origins = {
        {"night", ColumnOrigin::Telematics},
        {"speed", ColumnOrigin::Telematics},
        {"annual", ColumnOrigin::Classical}};

    auto cmp = compare_importance({{"lasso", lasso}, {"forest", forest}}, origins);
    REQUIRE(cmp.rows.size() == 3);
    CHECK(cmp.rows[0].column == "night");
    CHECK(cmp.rows[0].avg_rank == 1.0);
    // telematics ranks: night 1,1; speed 3,2 -> mean 1.75; classical: 2,3 -> 2.5.
    CHECK(cmp.telematics_avg_rank == doctest::Approx(1.75));
    CHECK(cmp.classical_avg_rank == doctest::Approx(2.5));

    // Identical importance vectors give identical rank columns.
    auto same = compare_importance({{"a", lasso}, {"b", lasso}}, origins);
    for (const auto& row : same.rows) CHECK(row.rank_per_model[0] == row.rank_per_model[1]);

    // 3-feature fixture ranks follow the hand-sorted order.
    auto solo = compare_importance({{"lasso", lasso}}, origins);
    CHECK(solo.rows[0].column == "night");
    CHECK(solo.rows[1].column == "annual");
    CHECK(solo.rows[2].column == "speed");
}

TEST_CASE("smoke study on a small synthetic cohort") {
    GeneratorConfig gen;
    gen.n_vehicles = 220;
    gen.seed = 42;
    gen.trips_per_day = 1.2;
    gen.claim_rate = 0.25;  // desk scale: keep folds well-populated
    auto data = generate(gen);

    std::istringstream contracts_csv(data.contracts_csv);
    auto contracts = assemble_contracts(data.trips, contracts_csv);
    REQUIRE(contracts.size() == 220);

    StudyConfig cfg;
    cfg.b = 100;
    cfg.cv_folds = 3;
    cfg.lambdas = {1e-4, 1e-2};  // smoke grid
    cfg.recipe.bag_trees = 5;
    auto result = run_study(contracts, LeapMethod::TimeLeap, cfg);

    REQUIRE(result.distributions.size() == 13);
    for (int k = 0; k <= 12; ++k) {
        const auto& d = result.distributions[static_cast<size_t>(k)];
        CHECK(d.k == k);
        CHECK(d.replicate_auc.size() == 100);
        for (double a : d.replicate_auc) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }
    }
    CHECK(result.redundancy_k >= 1);
    CHECK(result.redundancy_k <= 12);

    // Bit-for-bit reproducibility from the recorded seeds.
    auto rerun = run_study(contracts, LeapMethod::TimeLeap, cfg);
    for (int k = 0; k <= 12; ++k) {
        CHECK(rerun.distributions[static_cast<size_t>(k)].replicate_auc ==
              result.distributions[static_cast<size_t>(k)].replicate_auc);
        CHECK(rerun.distributions[static_cast<size_t>(k)].tuned_lambda ==
              result.distributions[static_cast<size_t>(k)].tuned_lambda);
    }

    // Partition invariance: the same vin set backs every dataset of both
    // methods, so the test rows agree everywhere.
    auto tl_12 = build_dataset(contracts, {LeapMethod::TimeLeap, 12});
    auto dl_3 = build_dataset(contracts, {LeapMethod::DistanceLeap, 3});
    CHECK(tl_12.row_ids() == dl_3.row_ids());
    auto vins = split_vins(tl_12.row_ids(), 0.7, cfg.split_seed);
    auto [tl_train, tl_test] = apply_split(tl_12, vins);
    auto [dl_train, dl_test] = apply_split(dl_3, vins);
    CHECK(tl_test.row_ids() == dl_test.row_ids());
    CHECK(tl_train.row_ids() == dl_train.row_ids());

    // CSV output shape.
    std::ostringstream csv;
    result.write_csv(csv);
    std::istringstream lines(csv.str());
    std::string line;
    size_t rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 + 13 * 100);

    auto summary = result.summary_json();
    CHECK(summary.find("redundancy_k") != std::string::npos);
}
