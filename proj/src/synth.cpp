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

#include "ubirisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"
#include "ubirisk/timeutil.hpp"

namespace ubirisk {

std::vector<LatentClass> GeneratorConfig::default_classes() {
    return {
        {"safe", 0.45, 0.015, 0.05, 1.70, 42.0, 0.9},
        {"urban", 0.35, 0.035, 0.10, 1.55, 38.0, 1.15},
        {"night", 0.20, 0.12, 0.16, 1.85, 47.0, 1.0},
    };
}

std::map<std::string, double> GeneratorConfig::default_signal() {
    // Weighted toward traits whose telematics estimates converge quickly
    // (mileage, speed); the exposure-fraction traits carry smaller weights.
    return {{"night", 0.15}, {"evening", 0.1}, {"daily_km", 0.8}, {"speed", 0.35}};
}

namespace {

struct VehicleTraits {
    int latent_class;
    double rate;          // trips per day
    double night_share;   // stationary
    double evening_share;
    double log_median_km;
    double speed_mean;
    double weekend_mult;   // scales Saturday/Sunday usage
    double max_speed_mult; // vehicle-level center of the max/avg speed ratio
};

// Hour-of-day profile for trips that are neither night nor evening:
// daytime commuting shape over hours 6..19.
constexpr double kDayHourWeights[24] = {0, 0, 0, 0, 0, 0, 2, 6, 5, 3, 3, 4,
                                        5, 4, 3, 4, 6, 7, 5, 3, 0, 0, 0, 0};

// Mild weekday usage texture; mean is ~1 so the rate scale is preserved.
constexpr double kWeekdayMult[7] = {1.05, 1.05, 1.05, 1.05, 1.0, 1.0, 0.8};

}  // namespace

SynthData generate(const GeneratorConfig& config) {
    if (config.n_vehicles < 1) throw UsageError("generate: n_vehicles must be positive");
    if (!(config.claim_rate > 0.0 && config.claim_rate < 1.0))
        throw DataError("generate: claim rate must lie strictly inside (0, 1)");
    if (config.claim_rate * config.n_vehicles < 1.0)
        throw DataError("generate: claim rate infeasible for this cohort size");
    if (config.contract_span_days < 364 || config.contract_span_days > 366)
        throw UsageError("generate: contract_span_days must be a full year (364..366)");

    auto start = parse_date(config.contract_start);
    if (!start) throw UsageError("generate: bad contract_start date");
    const std::int64_t start_day = *start;
    const std::int64_t start_sec = start_day * kSecondsPerDay;

    const auto classes =
        config.classes.empty() ? GeneratorConfig::default_classes() : config.classes;
    std::vector<double> class_weights;
    for (const auto& c : classes) class_weights.push_back(c.weight);

    const auto signal = config.signal.empty() ? GeneratorConfig::default_signal() : config.signal;

    const size_t n = static_cast<size_t>(config.n_vehicles);
    std::vector<VehicleTraits> traits(n);
    for (size_t i = 0; i < n; ++i) {
        Rng rng(config.seed, 0x7ea1000000u + i);
        const size_t cls = rng.categorical(class_weights);
        const LatentClass& c = classes[cls];
        const double spread = config.trait_spread;
        VehicleTraits t;
        t.latent_class = static_cast<int>(cls);
        t.rate = config.trips_per_day * c.trips_per_day_mult *
                 std::exp(rng.normal(0.0, config.trips_per_day_jitter));
        t.night_share = sigmoid(logit(c.night_share) + rng.normal(0.0, 0.55 * spread));
        t.evening_share = sigmoid(logit(c.evening_share) + rng.normal(0.0, 0.45 * spread));
        t.log_median_km = c.log_median_km + rng.normal(0.0, 0.45 * spread);
        t.speed_mean = c.speed_mean + rng.normal(0.0, 3.5 * spread);
        t.weekend_mult = std::exp(rng.normal(0.0, 0.35));
        t.max_speed_mult = std::clamp(rng.normal(1.5, 0.12), 1.25, 1.75);
        traits[i] = t;
    }

    // True trait vector per vehicle, z-scored across the cohort.
    auto trait_value = [&](const VehicleTraits& t, const std::string& name) {
        if (name == "night") return t.night_share;
        if (name == "evening") return t.evening_share;
        if (name == "daily_km") return t.rate * std::exp(t.log_median_km);
        if (name == "speed") return t.speed_mean;
        throw UsageError("generate: unknown signal trait '" + name + "'");
    };
    std::vector<double> score(n, 0.0);
    for (const auto& [name, coef] : signal) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = trait_value(traits[i], name);
        const double m = mean(v);
        const double sd = sample_sd(v);
        if (!(sd > 0.0)) continue;
        for (size_t i = 0; i < n; ++i) score[i] += coef * (v[i] - m) / sd;
    }

    // Intercept hits the target marginal claim rate by bisection.
    double lo = -40.0, hi = 40.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double rate = 0.0;
        for (size_t i = 0; i < n; ++i) rate += sigmoid(mid + score[i]);
        rate /= static_cast<double>(n);
        (rate < config.claim_rate ? lo : hi) = mid;
    }
    const double intercept = 0.5 * (lo + hi);

    SynthData data;
    data.trips.reserve(n * static_cast<size_t>(config.trips_per_day * 365.0));
    std::ostringstream contracts;
    contracts << kContractCsvHeader << '\n';

    // The saturation mechanism: trip rates ramp up over the first
    // `saturation_months` months and are stationary afterwards, so short
    // telematics windows see fewer trips and therefore noisier feature
    // estimates. Driving style itself (night share, distances, speeds) is
    // stationary from day one.
    const int horizon = std::max(config.saturation_months, 0);
    auto month_rate_weight = [&](int month) {
        if (horizon == 0) return 1.0;
        return std::pow(std::min(1.0, static_cast<double>(month) /
                                          static_cast<double>(horizon)),
                        config.ramp_exponent);
    };
    const std::int64_t end_day = start_day + config.contract_span_days;

    for (size_t i = 0; i < n; ++i) {
        Rng rng(config.seed, 0x7e57000000u + i);
        char vin_buf[24];
        std::snprintf(vin_buf, sizeof vin_buf, "V%06zu", i);
        const std::string vin(vin_buf);
        data.vins.push_back(vin);
        data.true_score.push_back(intercept + score[i]);
        const int claimed = rng.bernoulli(sigmoid(intercept + score[i])) ? 1 : 0;
        data.claimed.push_back(claimed);

        const VehicleTraits& t = traits[i];
        std::vector<TripRecord> trips;
        auto make_trip = [&](int d) {
            TripRecord rec;
            rec.vin = vin;
            int hour;
            const double u = rng.uniform();
            if (u < t.night_share) {
                hour = static_cast<int>(rng.below(6));
            } else if (u < t.night_share + t.evening_share) {
                hour = 20 + static_cast<int>(rng.below(4));
            } else {
                hour = static_cast<int>(rng.categorical(
                    std::vector<double>(kDayHourWeights, kDayHourWeights + 24)));
            }
            rec.departure = start_sec + static_cast<std::int64_t>(d) * kSecondsPerDay +
                            hour * 3600 + static_cast<std::int64_t>(rng.below(3600));
            rec.distance_km =
                std::clamp(std::exp(t.log_median_km + rng.normal(0.0, 0.9)), 0.3, 400.0);
            // Longer trips run faster on average (highway share).
            double avg_speed = t.speed_mean + 8.0 * std::log1p(rec.distance_km / 10.0) +
                               rng.normal(0.0, 7.0);
            avg_speed = std::clamp(avg_speed, 8.0, 135.0);
            // Uniform max/avg ratio around a vehicle-level center; a single
            // shared ratio band would make the two speed medians collinear.
            const double ratio =
                std::max(1.05, rng.uniform(t.max_speed_mult - 0.15, t.max_speed_mult + 0.15));
            rec.max_speed_kmh = std::min(190.0, avg_speed * ratio);
            const double duration_h = rec.distance_km / avg_speed;
            rec.arrival =
                rec.departure + static_cast<std::int64_t>(std::ceil(duration_h * 3600.0));
            return rec;
        };

        // Trips may depart on any day of the window, end day included.
        for (int d = 0; d <= config.contract_span_days; ++d) {
            const int month = static_cast<int>(d / kDaysPerMonth) + 1;
            const int wd = weekday_from_days(start_day + d);
            // Weekend usage varies per vehicle; this keeps the day-of-week
            // exposure fractions from being a fixed linear combination.
            const double wd_mult = wd >= 5 ? kWeekdayMult[wd] * t.weekend_mult : kWeekdayMult[wd];
            const int n_trips = rng.poisson(t.rate * month_rate_weight(month) * wd_mult);
            for (int trip = 0; trip < n_trips; ++trip) trips.push_back(make_trip(d));
        }
        // Every vehicle gets at least one first-month trip so that even the
        // shortest telematics window is defined.
        bool first_month = false;
        for (const auto& rec : trips)
            first_month = first_month || rec.departure < start_sec + 28 * kSecondsPerDay;
        if (!first_month) trips.push_back(make_trip(static_cast<int>(rng.below(28))));

        std::stable_sort(trips.begin(), trips.end(), [](const TripRecord& a, const TripRecord& b) {
            return a.departure < b.departure;
        });
        for (size_t tn = 0; tn < trips.size(); ++tn)
            trips[tn].trip_number = static_cast<int>(tn) + 1;
        data.trips.insert(data.trips.end(), std::make_move_iterator(trips.begin()),
                          std::make_move_iterator(trips.end()));

        // Classical profile. annual_distance can carry a configurable echo of
        // the true mileage; everything else is pure noise.
        const double true_daily = t.rate * std::exp(t.log_median_km);
        const double annual_noise = std::exp(rng.normal(9.45, 0.35));  // ~median 12,700 km
        const double annual_echo = true_daily * 365.25 * rng.uniform(0.8, 1.1);
        const double annual =
            config.classical_signal * annual_echo + (1.0 - config.classical_signal) * annual_noise;
        const bool commute_missing = rng.bernoulli(config.commute_missing_rate);
        const double commute = std::exp(rng.normal(2.2, 0.7));
        const double conv = static_cast<double>(rng.poisson(0.3));
        const double veh_age = static_cast<double>(rng.below(16));
        const char* gender = rng.uniform() < 0.46 ? "female" : "male";
        const double mu = rng.uniform();
        const char* marital = mu < 0.30 ? "single" : mu < 0.82 ? "married"
                                                 : mu < 0.95   ? "divorced"
                                                               : "widowed";
        const double pu = rng.uniform();
        const char* pmt = pu < 0.40 ? "annual" : pu < 0.85 ? "monthly" : "semi_annual";
        const double vu = rng.uniform();
        const char* use = vu < 0.55 ? "commute" : vu < 0.85 ? "pleasure"
                                              : vu < 0.97  ? "business"
                                                           : "farm";
        const double claim_free = static_cast<double>(rng.below(21));
        const double licensed = 3.0 + static_cast<double>(rng.below(43));

        contracts << vin << ',' << format_date(start_day) << ',' << format_date(end_day) << ','
                  << claimed << ',' << format_double(std::round(annual)) << ',';
        if (!commute_missing) contracts << format_double(std::round(commute * 10.0) / 10.0);
        contracts << ',' << format_double(conv) << ',' << gender << ',' << marital << ',' << pmt
                  << ',' << format_double(veh_age) << ',' << use << ','
                  << format_double(claim_free) << ',' << format_double(licensed) << '\n';
    }

    data.contracts_csv = contracts.str();
    return data;
}

}  // namespace ubirisk
