#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ubirisk/common.hpp"
#include "ubirisk/featurize.hpp"
#include "ubirisk/linear_model.hpp"
#include "ubirisk/recipe.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/synth.hpp"
#include "ubirisk/tuning.hpp"

using namespace ubirisk;

TEST_CASE("smoke config emits parseable csv that assembles cleanly") {
    GeneratorConfig gen;
    gen.n_vehicles = 50;
    gen.seed = 7;
    gen.trips_per_day = 1.0;
    gen.claim_rate = 0.2;
    auto data = generate(gen);

    std::ostringstream trips_csv;
    serialize_trips(data.trips, trips_csv);
    std::istringstream trips_in(trips_csv.str());
    auto parsed = parse_trips(trips_in);
    CHECK(parsed.errors.empty());
    CHECK(parsed.trips.size() == data.trips.size());

    std::istringstream contracts_in(data.contracts_csv);
    AssembleStats stats;
    auto contracts = assemble_contracts(parsed.trips, contracts_in, &stats);
    CHECK(contracts.size() == 50);
    CHECK(stats.trips_outside_window == 0);

    // Claim indicators in the csv agree with the ground truth vector.
    size_t row = 0;
    for (const auto& c : contracts) {
        const size_t idx = static_cast<size_t>(std::stoi(c.vin.substr(1)));
        CHECK(c.claimed == data.claimed[idx]);
        ++row;
    }

    // Determinism per seed.
    auto again = generate(gen);
    CHECK(again.contracts_csv == data.contracts_csv);
    CHECK(again.trips.size() == data.trips.size());
    for (size_t i = 0; i < data.trips.size(); ++i) {
        CHECK(again.trips[i].departure == data.trips[i].departure);
        CHECK(again.trips[i].distance_km == data.trips[i].distance_km);
    }
}

TEST_CASE("infeasible claim rates are rejected") {
    GeneratorConfig gen;
    gen.n_vehicles = 10;
    gen.claim_rate = 0.0;
    CHECK_THROWS_AS(generate(gen), DataError);
    gen.claim_rate = 1.5;
    CHECK_THROWS_AS(generate(gen), DataError);
    gen.claim_rate = 0.001;  // expected claims < 1 for 10 vehicles
    CHECK_THROWS_AS(generate(gen), DataError);
}

TEST_CASE("stationary features converge to the class means") {
    // One class, no jitter, no ramp: per-vehicle features computed from the
    // full year approach the configured class behavior.
    GeneratorConfig gen;
    gen.n_vehicles = 30;
    gen.seed = 3;
    gen.saturation_months = 0;
    gen.trait_spread = 0.0;
    gen.trips_per_day_jitter = 0.0;
    gen.trips_per_day = 6.0;  // ~2200 trips per vehicle
    gen.claim_rate = 0.2;
    LatentClass only;
    only.name = "only";
    only.weight = 1.0;
    only.night_share = 0.08;
    only.evening_share = 0.12;
    only.log_median_km = 1.6;
    only.speed_mean = 40.0;
    gen.classes = {only};
    auto data = generate(gen);

    std::istringstream contracts_in(data.contracts_csv);
    auto contracts = assemble_contracts(data.trips, contracts_in);
    auto table = build_dataset(contracts, {LeapMethod::TimeLeap, 12});

    // Trip-count night share approximates distance-weighted share because
    // distances are independent of the departure window.
    const auto& night = table.numeric("frac_expo_night");
    CHECK(mean(night) == doctest::Approx(0.08).epsilon(0.12));
    const auto& evening = table.numeric("frac_expo_evening");
    CHECK(mean(evening) == doctest::Approx(0.12).epsilon(0.12));
    const auto& trips_per_day = table.numeric("avg_daily_nb_trips");
    CHECK(mean(trips_per_day) == doctest::Approx(6.0).epsilon(0.05));
    const auto& med_km = table.numeric("med_trip_distance");
    CHECK(mean(med_km) == doctest::Approx(std::exp(1.6)).epsilon(0.1));
}

TEST_CASE("zero signal coefficients give chance-level separation") {
    GeneratorConfig gen;
    gen.n_vehicles = 600;
    gen.seed = 5;
    gen.trips_per_day = 1.0;
    gen.claim_rate = 0.3;
    gen.signal = {{"night", 0.0}};
    auto data = generate(gen);
    // With no signal the true scores are constant: AUC against them is
    // undefined, so check the claim rate instead and that a telematics
    // feature carries no information.
    double rate = 0.0;
    for (int y : data.claimed) rate += y;
    rate /= static_cast<double>(data.claimed.size());
    CHECK(rate == doctest::Approx(0.3).epsilon(0.15));

    std::istringstream contracts_in(data.contracts_csv);
    auto contracts = assemble_contracts(data.trips, contracts_in);
    auto table = build_dataset(contracts, {LeapMethod::TimeLeap, 12});
    const auto& night = table.numeric("frac_expo_night");
    CHECK(std::fabs(auc(night, table.response()) - 0.5) < 0.08);
}

TEST_CASE("a planted night-driving signal tops the lasso importance ranking") {
    int wins = 0;
    const int seeds = 5;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        GeneratorConfig gen;
        gen.n_vehicles = 500;
        gen.seed = seed;
        gen.trips_per_day = 1.5;
        gen.claim_rate = 0.2;
        gen.saturation_months = 0;
        gen.signal = {{"night", 1.6}};
        auto data = generate(gen);

        std::istringstream contracts_in(data.contracts_csv);
        auto contracts = assemble_contracts(data.trips, contracts_in);
        auto table = build_dataset(contracts, {LeapMethod::TimeLeap, 12});

        RecipeConfig rc;
        rc.bag_trees = 5;
        auto recipe = recipe_fit(table, rc);
        auto prepped = recipe_apply(recipe, table);
        auto model = fit_penalized(prepped, {3e-3, 1.0});
        auto imp = glm_importance(model);
        if (imp[0].first == "frac_expo_night") ++wins;
    }
    CHECK(wins >= 4);
}
