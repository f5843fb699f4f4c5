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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ubirisk/timeutil.hpp"

namespace ubirisk {

/// One trip summary row. Timestamps are naive local seconds since epoch.
struct TripRecord {
    std::string vin;
    int trip_number = 0;
    std::int64_t departure = 0;
    std::int64_t arrival = 0;
    double distance_km = 0.0;
    double max_speed_kmh = 0.0;

    double duration_hours() const {
        return static_cast<double>(arrival - departure) / 3600.0;
    }

    /// 0 for zero-duration trips; such trips are skipped by the average-speed
    /// median but still count toward distance and exposure features.
    double avg_speed_kmh() const {
        double h = duration_hours();
        return h > 0.0 ? distance_km / h : 0.0;
    }
};

struct ClassicalProfile {
    double annual_distance = 0.0;
    std::optional<double> commute_distance;  // the only field allowed to be missing
    double conv_count_3_yrs_minor = 0.0;
    std::string gender;
    std::string marital_status;
    std::string pmt_plan;
    double veh_age = 0.0;
    std::string veh_use;
    double years_claim_free = 0.0;
    double years_licensed = 0.0;
};

/// One vehicle's earliest full-year contract with its in-window trips.
struct VehicleContract {
    std::string vin;
    std::int64_t start_day = 0;  // civil days since epoch
    std::int64_t end_day = 0;    // last day of the contract, inclusive
    std::vector<TripRecord> trips;  // ordered by (departure, trip_number)
    ClassicalProfile classical;
    int claimed = 0;
    bool zero_trips = false;

    std::int64_t window_begin_sec() const { return start_day * kSecondsPerDay; }
    /// Exclusive end of the trip window: end of the contract's last day.
    std::int64_t window_end_sec() const { return (end_day + 1) * kSecondsPerDay; }
};

struct RowError {
    size_t line;  // 1-based, header is line 1
    std::string message;
};

struct TripParseResult {
    std::vector<TripRecord> trips;
    std::vector<RowError> errors;
};

inline constexpr const char* kTripCsvHeader =
    "vin,trip_number,departure,arrival,distance,max_speed";
inline constexpr const char* kContractCsvHeader =
    "vin,contract_start,contract_end,claimed,annual_distance,commute_distance,"
    "conv_count_3_yrs_minor,gender,marital_status,pmt_plan,veh_age,veh_use,"
    "years_claim_free,years_licensed";

/// Parses the trip CSV. Bad rows are reported with their line number and do
/// not abort the parse; a mismatched header throws DataError.
TripParseResult parse_trips(std::istream& source);

/// Inverse of parse_trips for accepted rows.
void serialize_trips(const std::vector<TripRecord>& trips, std::ostream& out);

struct AssembleStats {
    size_t vins_without_full_year = 0;
    size_t trips_outside_window = 0;
    size_t zero_trip_vehicles = 0;
};

/// Joins trips with contract rows: keeps the earliest one-year contract per
/// vin, attaches the trips departing inside the contract window, and drops
/// vins that never held a full-year contract. "One year" means an end-start
/// span of 364..366 days, absorbing leap years.
std::vector<VehicleContract> assemble_contracts(const std::vector<TripRecord>& trips,
                                                std::istream& contracts_csv,
                                                AssembleStats* stats = nullptr);

}  // namespace ubirisk
