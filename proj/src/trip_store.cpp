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

#include "ubirisk/trip_store.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"

namespace ubirisk {

TripParseResult parse_trips(std::istream& source) {
    TripParseResult result;
    std::string line;
    if (!getline_trimmed(source, line))
        throw DataError("trip csv: empty input, expected header '" + std::string(kTripCsvHeader) + "'");
    if (line != kTripCsvHeader)
        throw DataError("trip csv: header mismatch, expected '" + std::string(kTripCsvHeader) +
                        "' got '" + line + "'");

    size_t line_no = 1;
    while (getline_trimmed(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        auto reject = [&](const std::string& msg) { result.errors.push_back({line_no, msg}); };
        if (fields.size() != 6) {
            reject("expected 6 fields, got " + std::to_string(fields.size()));
            continue;
        }
        TripRecord trip;
        trip.vin = std::string(fields[0]);
        if (trip.vin.empty()) {
            reject("empty vin");
            continue;
        }
        auto number = parse_long(fields[1]);
        if (!number || *number <= 0) {
            reject("bad trip_number '" + std::string(fields[1]) + "'");
            continue;
        }
        trip.trip_number = static_cast<int>(*number);
        auto dep = parse_datetime(fields[2]);
        if (!dep) {
            reject("malformed departure timestamp '" + std::string(fields[2]) + "'");
            continue;
        }
        auto arr = parse_datetime(fields[3]);
        if (!arr) {
            reject("malformed arrival timestamp '" + std::string(fields[3]) + "'");
            continue;
        }
        trip.departure = *dep;
        trip.arrival = *arr;
        if (trip.arrival < trip.departure) {
            reject("non-positive duration: arrival before departure");
            continue;
        }
        auto dist = parse_double(fields[4]);
        if (!dist || *dist < 0.0) {
            reject("negative or malformed distance '" + std::string(fields[4]) + "'");
            continue;
        }
        trip.distance_km = *dist;
        auto speed = parse_double(fields[5]);
        if (!speed || *speed < 0.0) {
            reject("negative or malformed max_speed '" + std::string(fields[5]) + "'");
            continue;
        }
        trip.max_speed_kmh = *speed;
        result.trips.push_back(std::move(trip));
    }
    return result;
}

void serialize_trips(const std::vector<TripRecord>& trips, std::ostream& out) {
    out << kTripCsvHeader << '\n';
    for (const auto& t : trips) {
        out << t.vin << ',' << t.trip_number << ',' << format_datetime(t.departure) << ','
            << format_datetime(t.arrival) << ',' << format_double(t.distance_km) << ','
            << format_double(t.max_speed_kmh) << '\n';
    }
}

namespace {

struct ContractRow {
    std::int64_t start_day;
    std::int64_t end_day;
    int claimed;
    ClassicalProfile classical;
};

bool is_full_year(std::int64_t start_day, std::int64_t end_day) {
    std::int64_t span = end_day - start_day;
    return span >= 364 && span <= 366;
}

ClassicalProfile parse_classical(const std::vector<std::string_view>& f, size_t line_no) {
    auto bad = [&](const char* what) -> DataError {
        return DataError("contract csv line " + std::to_string(line_no) + ": " + what);
    };
    auto number = [&](std::string_view s, const char* what) {
        auto v = parse_double(s);
        if (!v || *v < 0.0) throw bad(what);
        return *v;
    };
    ClassicalProfile c;
    c.annual_distance = number(f[4], "bad annual_distance");
    if (f[5].empty()) {
        c.commute_distance = std::nullopt;
    } else {
        c.commute_distance = number(f[5], "bad commute_distance");
    }
    c.conv_count_3_yrs_minor = number(f[6], "bad conv_count_3_yrs_minor");
    c.gender = std::string(f[7]);
    c.marital_status = std::string(f[8]);
    c.pmt_plan = std::string(f[9]);
    c.veh_age = number(f[10], "bad veh_age");
    c.veh_use = std::string(f[11]);
    c.years_claim_free = number(f[12], "bad years_claim_free");
    c.years_licensed = number(f[13], "bad years_licensed");
    return c;
}

}  // namespace

std::vector<VehicleContract> assemble_contracts(const std::vector<TripRecord>& trips,
                                                std::istream& contracts_csv,
                                                AssembleStats* stats) {
    std::string line;
    if (!getline_trimmed(contracts_csv, line) || line != kContractCsvHeader)
        throw DataError("contract csv: header mismatch, expected '" +
                        std::string(kContractCsvHeader) + "'");

    // Earliest full-year contract per vin; duplicate (vin, start) rows are an error.
    std::map<std::string, ContractRow> selected;
    std::set<std::string> all_vins;
    std::set<std::pair<std::string, std::int64_t>> seen;
    AssembleStats local{};
    size_t line_no = 1;
    while (getline_trimmed(contracts_csv, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 14)
            throw DataError("contract csv line " + std::to_string(line_no) + ": expected 14 fields");
        std::string vin(fields[0]);
        auto start = parse_date(fields[1]);
        auto end = parse_date(fields[2]);
        if (vin.empty() || !start || !end || *end < *start)
            throw DataError("contract csv line " + std::to_string(line_no) + ": bad vin or dates");
        if (!seen.insert({vin, *start}).second)
            throw DataError("contract csv line " + std::to_string(line_no) +
                            ": duplicate contract for vin " + vin);
        auto claimed = parse_long(fields[3]);
        if (!claimed || (*claimed != 0 && *claimed != 1))
            throw DataError("contract csv line " + std::to_string(line_no) + ": bad claim indicator");
        all_vins.insert(vin);
        if (!is_full_year(*start, *end)) continue;
        ContractRow row{*start, *end, static_cast<int>(*claimed), parse_classical(fields, line_no)};
        auto it = selected.find(vin);
        if (it == selected.end() || row.start_day < it->second.start_day)
            selected[vin] = std::move(row);
    }
    local.vins_without_full_year = all_vins.size() - selected.size();

    std::unordered_map<std::string, std::vector<const TripRecord*>> by_vin;
    for (const auto& t : trips) by_vin[t.vin].push_back(&t);

    std::vector<VehicleContract> out;
    out.reserve(selected.size());
    for (auto& [vin, row] : selected) {
        VehicleContract c;
        c.vin = vin;
        c.start_day = row.start_day;
        c.end_day = row.end_day;
        c.claimed = row.claimed;
        c.classical = std::move(row.classical);
        auto it = by_vin.find(vin);
        if (it != by_vin.end()) {
            const std::int64_t lo = c.window_begin_sec();
            const std::int64_t hi = c.window_end_sec();
            for (const TripRecord* t : it->second) {
                if (t->departure >= lo && t->departure < hi) {
                    c.trips.push_back(*t);
                } else {
                    ++local.trips_outside_window;
                }
            }
        }
        std::sort(c.trips.begin(), c.trips.end(), [](const TripRecord& a, const TripRecord& b) {
            return a.departure != b.departure ? a.departure < b.departure
                                              : a.trip_number < b.trip_number;
        });
        std::set<int> numbers;
        for (const auto& t : c.trips) {
            if (!numbers.insert(t.trip_number).second)
                throw DataError("vin " + vin + ": duplicate trip_number " +
                                std::to_string(t.trip_number) + " inside contract window");
        }
        c.zero_trips = c.trips.empty();
        if (c.zero_trips) ++local.zero_trip_vehicles;
        out.push_back(std::move(c));
    }
    if (stats) *stats = local;
    return out;
}

}  // namespace ubirisk
