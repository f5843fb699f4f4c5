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

#include "ubirisk/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "ubirisk/common.hpp"
#include "ubirisk/rng.hpp"
#include "ubirisk/stats.hpp"

namespace ubirisk {

const std::array<std::string, 14>& TelematicsFeatures::names() {
    static const std::array<std::string, 14> kNames = {
        "avg_daily_distance",   "avg_daily_nb_trips",     "med_trip_avg_speed",
        "med_trip_distance",    "med_trip_max_speed",     "max_trip_max_speed",
        "prop_long_trip",       "frac_expo_night",        "frac_expo_noon",
        "frac_expo_evening",    "frac_expo_peak_morning", "frac_expo_peak_evening",
        "frac_expo_mon_to_thu", "frac_expo_fri_sat"};
    return kNames;
}

std::array<double, 14> TelematicsFeatures::values() const {
    return {avg_daily_distance,   avg_daily_nb_trips,     med_trip_avg_speed,
            med_trip_distance,    med_trip_max_speed,     max_trip_max_speed,
            prop_long_trip,       frac_expo_night,        frac_expo_noon,
            frac_expo_evening,    frac_expo_peak_morning, frac_expo_peak_evening,
            frac_expo_mon_to_thu, frac_expo_fri_sat};
}

std::string to_string(LeapMethod m) {
    return m == LeapMethod::TimeLeap ? "tl" : "dl";
}

LeapMethod leap_method_from_string(const std::string& s) {
    if (s == "tl" || s == "TL") return LeapMethod::TimeLeap;
    if (s == "dl" || s == "DL") return LeapMethod::DistanceLeap;
    throw UsageError("unknown leap method '" + s + "', expected tl or dl");
}

// 365.25/12 days in seconds; exact since 365.25 * 86400 is divisible by 12.
constexpr std::int64_t kMonthSeconds = 2629800;

Truncation truncate_with_exposure(const VehicleContract& contract, LeapSpec spec) {
    if (spec.k < 1) throw UsageError("truncate_trips requires k >= 1");
    Truncation out;
    if (spec.method == LeapMethod::TimeLeap) {
        const std::int64_t limit = contract.window_begin_sec() + spec.k * kMonthSeconds;
        for (const auto& t : contract.trips) {
            if (t.departure < limit) out.trips.push_back(t);
        }
        out.exposure_days = std::min(spec.k * kDaysPerMonth, kDaysPerYear);
        return out;
    }
    const double budget_km = 1000.0 * spec.k;
    double cum = 0.0;
    out.exposure_days = kDaysPerYear;
    for (const auto& t : contract.trips) {
        if (cum + t.distance_km > budget_km) {
            // First trip crossing the budget marks the end of the observation.
            out.exposure_days =
                static_cast<double>(t.departure - contract.window_begin_sec()) /
                static_cast<double>(kSecondsPerDay);
            break;
        }
        cum += t.distance_km;
        out.trips.push_back(t);
    }
    out.exposure_days = std::max(out.exposure_days, 1.0 / 1440.0);
    return out;
}

std::vector<TripRecord> truncate_trips(const VehicleContract& contract, LeapSpec spec) {
    return truncate_with_exposure(contract, spec).trips;
}

namespace {

constexpr int kHour = 3600;

bool weekday_mon_fri(int wd) { return wd <= 4; }

}  // namespace

TelematicsFeatures telematics_features(const std::vector<TripRecord>& trips,
                                       double exposure_days) {
    if (trips.empty()) throw DataError("telematics features undefined for an empty trip list");
    if (!(exposure_days > 0.0)) throw UsageError("exposure_days must be positive");

    TelematicsFeatures f;
    const double n = static_cast<double>(trips.size());

    double total_km = 0.0;
    double night = 0.0, noon = 0.0, evening = 0.0, peak_am = 0.0, peak_pm = 0.0;
    double mon_thu = 0.0, fri_sat = 0.0;
    size_t long_trips = 0;
    std::vector<double> avg_speeds, distances, max_speeds;
    avg_speeds.reserve(trips.size());
    distances.reserve(trips.size());
    max_speeds.reserve(trips.size());

    for (const auto& t : trips) {
        total_km += t.distance_km;
        distances.push_back(t.distance_km);
        max_speeds.push_back(t.max_speed_kmh);
        if (t.duration_hours() > 0.0) avg_speeds.push_back(t.avg_speed_kmh());
        if (t.distance_km > 100.0) ++long_trips;

        const int sod = second_of_day(t.departure);
        const int wd = weekday_from_days(day_of_timestamp(t.departure));
        if (sod < 6 * kHour) night += t.distance_km;
        if (sod >= 11 * kHour && sod < 14 * kHour) noon += t.distance_km;
        if (sod >= 20 * kHour) evening += t.distance_km;
        if (weekday_mon_fri(wd) && sod >= 7 * kHour && sod < 9 * kHour) peak_am += t.distance_km;
        if (weekday_mon_fri(wd) && sod >= 17 * kHour && sod < 20 * kHour) peak_pm += t.distance_km;
        if (wd <= 3) mon_thu += t.distance_km;
        if (wd == 4 || wd == 5) fri_sat += t.distance_km;
    }

    f.avg_daily_distance = total_km / exposure_days;
    f.avg_daily_nb_trips = n / exposure_days;
    // Zero-duration trips have no meaningful average speed and are skipped.
    f.med_trip_avg_speed = avg_speeds.empty() ? 0.0 : median(std::move(avg_speeds));
    f.med_trip_distance = median(std::move(distances));
    f.med_trip_max_speed = median(max_speeds);
    f.max_trip_max_speed = *std::max_element(max_speeds.begin(), max_speeds.end());
    f.prop_long_trip = static_cast<double>(long_trips) / n;
    if (total_km > 0.0) {
        f.frac_expo_night = night / total_km;
        f.frac_expo_noon = noon / total_km;
        f.frac_expo_evening = evening / total_km;
        f.frac_expo_peak_morning = peak_am / total_km;
        f.frac_expo_peak_evening = peak_pm / total_km;
        f.frac_expo_mon_to_thu = mon_thu / total_km;
        f.frac_expo_fri_sat = fri_sat / total_km;
    }
    return f;
}

FeatureTable build_dataset(const std::vector<VehicleContract>& contracts, LeapSpec spec,
                           DatasetStats* stats) {
    if (contracts.empty()) throw DataError("build_dataset: no contracts");
    if (spec.k < 0 || spec.k > 12) throw UsageError("leap index k must be in 0..12");

    DatasetStats local{};
    std::vector<const VehicleContract*> rows;
    rows.reserve(contracts.size());
    for (const auto& c : contracts) {
        if (c.zero_trips) {
            ++local.excluded_zero_trip;
            continue;
        }
        rows.push_back(&c);
    }
    if (rows.empty()) throw DataError("build_dataset: all vehicles have zero trips");

    const size_t n = rows.size();
    std::vector<std::string> vins(n);
    std::vector<int> y(n);
    for (size_t i = 0; i < n; ++i) {
        vins[i] = rows[i]->vin;
        y[i] = rows[i]->claimed;
    }
    FeatureTable table(std::move(vins), std::move(y));

    auto classical_num = [&](const std::string& name, auto getter) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = getter(rows[i]->classical);
        table.add_numeric({name, ColumnKind::Numeric, ColumnOrigin::Classical}, std::move(v));
    };
    auto classical_cat = [&](const std::string& name, auto getter) {
        std::vector<std::string> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = getter(rows[i]->classical);
        table.add_categorical({name, ColumnKind::Categorical, ColumnOrigin::Classical},
                              std::move(v));
    };

    classical_num("annual_distance", [](const ClassicalProfile& c) { return c.annual_distance; });
    classical_num("commute_distance", [](const ClassicalProfile& c) {
        return c.commute_distance ? *c.commute_distance : std::nan("");
    });
    classical_num("conv_count_3_yrs_minor",
                  [](const ClassicalProfile& c) { return c.conv_count_3_yrs_minor; });
    classical_cat("gender", [](const ClassicalProfile& c) { return c.gender; });
    classical_cat("marital_status", [](const ClassicalProfile& c) { return c.marital_status; });
    classical_cat("pmt_plan", [](const ClassicalProfile& c) { return c.pmt_plan; });
    classical_num("veh_age", [](const ClassicalProfile& c) { return c.veh_age; });
    classical_cat("veh_use", [](const ClassicalProfile& c) { return c.veh_use; });
    classical_num("years_claim_free",
                  [](const ClassicalProfile& c) { return c.years_claim_free; });
    classical_num("years_licensed", [](const ClassicalProfile& c) { return c.years_licensed; });

    if (spec.k >= 1) {
        std::vector<std::array<double, 14>> values(n);
        for (size_t i = 0; i < n; ++i) {
            Truncation tr = truncate_with_exposure(*rows[i], spec);
            if (tr.trips.empty())
                throw DataError("vin " + rows[i]->vin + ": no trips in " + to_string(spec.method) +
                                " window k=" + std::to_string(spec.k) +
                                ", telematics features undefined");
            values[i] = telematics_features(tr.trips, tr.exposure_days).values();
        }
        const auto& names = TelematicsFeatures::names();
        for (size_t j = 0; j < names.size(); ++j) {
            std::vector<double> col(n);
            for (size_t i = 0; i < n; ++i) col[i] = values[i][j];
            table.add_numeric({names[j], ColumnKind::Numeric, ColumnOrigin::Telematics},
                              std::move(col));
        }
    }
    if (stats) *stats = local;
    return table;
}

std::unordered_set<std::string> split_vins(const std::vector<std::string>& vins,
                                           double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw UsageError("train_frac must be in (0, 1)");
    std::vector<std::string> sorted = vins;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    Rng rng(seed, 0x5711u);
    rng.shuffle(sorted);
    size_t n_train = static_cast<size_t>(
        std::floor(train_frac * static_cast<double>(sorted.size()) + 1e-9));
    n_train = std::min(std::max<size_t>(n_train, 1), sorted.size() - 1);
    return std::unordered_set<std::string>(sorted.begin(), sorted.begin() + n_train);
}

std::pair<FeatureTable, FeatureTable> apply_split(
    const FeatureTable& table, const std::unordered_set<std::string>& train_vins) {
    std::vector<size_t> train_rows, test_rows;
    for (size_t i = 0; i < table.n_rows(); ++i) {
        if (train_vins.count(table.row_ids()[i]))
            train_rows.push_back(i);
        else
            test_rows.push_back(i);
    }
    return {table.subset(train_rows), table.subset(test_rows)};
}

std::pair<FeatureTable, FeatureTable> split_train_test(const FeatureTable& table,
                                                       double train_frac, std::uint64_t seed) {
    return apply_split(table, split_vins(table.row_ids(), train_frac, seed));
}

}  // namespace ubirisk
