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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ubirisk/trip_store.hpp"

namespace ubirisk {

// Trip-summary generator with a planted, configurable risk signal so the
// full study runs at desk scale against known ground truth. Each vehicle
// draws latent traits (night/evening shares, trip distance scale, speed)
// around its latent class; the claim probability is logistic in the
// standardized stationary traits. Trip rates ramp up over the first
// `saturation_months` months and are stationary afterwards, so telematics
// windows shorter than the horizon see fewer trips and carry a noisier
// version of the signal.

struct LatentClass {
    std::string name;
    double weight = 1.0;
    double night_share = 0.03;    // share of trips departing 0h-6h
    double evening_share = 0.08;  // share of trips departing 20h-24h
    double log_median_km = 1.8;   // log of the median trip distance
    double speed_mean = 44.0;     // baseline average trip speed, km/h
    double trips_per_day_mult = 1.0;
};

struct GeneratorConfig {
    int n_vehicles = 3000;
    std::uint64_t seed = 1;
    std::string contract_start = "2023-01-02";  // a Monday
    int contract_span_days = 365;               // contract_end - contract_start
    double claim_rate = 0.053;
    int saturation_months = 3;  // 0 means the full rate from day one
    // Month-m trip rate multiplier is min(m / saturation_months, 1)^ramp_exponent;
    // exponents above 1 mean a slow start, sharpening the saturation knee.
    double ramp_exponent = 3.0;
    double trips_per_day = 4.6;  // stationary per-vehicle mean, before the ramp
    double trips_per_day_jitter = 0.25;  // sd of the per-vehicle log rate
    double trait_spread = 1.0;           // scales all between-vehicle trait sds
    double commute_missing_rate = 0.2;
    std::vector<LatentClass> classes;  // empty = the built-in three classes
    // Claim-model coefficients on standardized true traits. Recognized trait
    // names: night, evening, daily_km, speed. Empty = default telematics-only
    // signal.
    std::map<std::string, double> signal;
    // Correlation knob between annual_distance (a classical feature) and the
    // true daily distance; 0 keeps the classical columns signal-free.
    double classical_signal = 0.0;

    static std::vector<LatentClass> default_classes();
    static std::map<std::string, double> default_signal();
};

struct SynthData {
    std::vector<TripRecord> trips;
    std::string contracts_csv;
    // Ground truth for oracle checks, aligned with vin order V000000..:
    std::vector<std::string> vins;
    std::vector<double> true_score;  // linear predictor of the claim model
    std::vector<int> claimed;
};

SynthData generate(const GeneratorConfig& config);

}  // namespace ubirisk
