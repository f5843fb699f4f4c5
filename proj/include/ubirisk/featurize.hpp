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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "ubirisk/table.hpp"
#include "ubirisk/trip_store.hpp"

namespace ubirisk {

/// The 14 vehicle-level telematics features. Daily averages divide by the
/// observation exposure; medians are taken over per-trip values; the eight
/// exposure fractions are distance-weighted with every trip assigned wholly
/// to the time window of its departure instant.
struct TelematicsFeatures {
    double avg_daily_distance = 0.0;
    double avg_daily_nb_trips = 0.0;
    double med_trip_avg_speed = 0.0;
    double med_trip_distance = 0.0;
    double med_trip_max_speed = 0.0;
    double max_trip_max_speed = 0.0;
    double prop_long_trip = 0.0;  // long trip: distance > 100 km
    double frac_expo_night = 0.0;         // 0h-6h
    double frac_expo_noon = 0.0;          // 11h-14h
    double frac_expo_evening = 0.0;       // 20h-24h
    double frac_expo_peak_morning = 0.0;  // 7h-9h Mon-Fri
    double frac_expo_peak_evening = 0.0;  // 17h-20h Mon-Fri
    double frac_expo_mon_to_thu = 0.0;
    double frac_expo_fri_sat = 0.0;

    static const std::array<std::string, 14>& names();
    std::array<double, 14> values() const;
};

enum class LeapMethod { TimeLeap, DistanceLeap };

std::string to_string(LeapMethod m);
LeapMethod leap_method_from_string(const std::string& s);

/// k = 0 means the classical-only dataset (no telematics columns).
struct LeapSpec {
    LeapMethod method = LeapMethod::TimeLeap;
    int k = 12;
};

/// Trips retained by a truncation, plus the exposure the daily averages
/// should divide by: k months for TL, elapsed days up to the cutoff trip for
/// DL, the full 365.25-day year when nothing is cut.
struct Truncation {
    std::vector<TripRecord> trips;
    double exposure_days = 0.0;
};

Truncation truncate_with_exposure(const VehicleContract& contract, LeapSpec spec);

/// Spec k >= 1. TL keeps trips departing within the first k*(365.25/12) days;
/// DL keeps the maximal departure-ordered prefix with cumulative distance
/// <= 1000*k km (the first trip crossing the budget is excluded).
std::vector<TripRecord> truncate_trips(const VehicleContract& contract, LeapSpec spec);

TelematicsFeatures telematics_features(const std::vector<TripRecord>& trips,
                                       double exposure_days);

struct DatasetStats {
    size_t excluded_zero_trip = 0;
};

/// Builds D_k for one method: 10 classical columns, then (for k >= 1) the 14
/// telematics columns, then the response. Row order follows the contract
/// order and is identical for every k, so all 13 datasets of a method
/// describe the same vehicles in the same order. Zero-trip vehicles are
/// excluded from every dataset (including k = 0) and counted.
FeatureTable build_dataset(const std::vector<VehicleContract>& contracts, LeapSpec spec,
                           DatasetStats* stats = nullptr);

/// Seeded vin-level partition; reused across all datasets of a study so that
/// every D_k sees the same train/test vehicles.
std::unordered_set<std::string> split_vins(const std::vector<std::string>& vins,
                                           double train_frac, std::uint64_t seed);

std::pair<FeatureTable, FeatureTable> apply_split(const FeatureTable& table,
                                                  const std::unordered_set<std::string>& train_vins);

std::pair<FeatureTable, FeatureTable> split_train_test(const FeatureTable& table,
                                                       double train_frac, std::uint64_t seed);

}  // namespace ubirisk
