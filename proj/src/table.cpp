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

#include "ubirisk/table.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "ubirisk/common.hpp"
#include "ubirisk/csv.hpp"

namespace ubirisk {

std::string to_string(ColumnKind kind) {
    return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

std::string to_string(ColumnOrigin origin) {
    switch (origin) {
        case ColumnOrigin::Classical: return "classical";
        case ColumnOrigin::Telematics: return "telematics";
        case ColumnOrigin::Interaction: return "interaction";
    }
    return "classical";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "categorical") return ColumnKind::Categorical;
    throw DataError("unknown column kind: " + s);
}

ColumnOrigin column_origin_from_string(const std::string& s) {
    if (s == "classical") return ColumnOrigin::Classical;
    if (s == "telematics") return ColumnOrigin::Telematics;
    if (s == "interaction") return ColumnOrigin::Interaction;
    throw DataError("unknown column origin: " + s);
}

FeatureTable::FeatureTable(std::vector<std::string> row_ids, std::vector<int> response)
    : row_ids_(std::move(row_ids)), response_(std::move(response)) {
    if (row_ids_.size() != response_.size())
        throw DataError("row ids and response length mismatch");
    for (int y : response_)
        if (y != 0 && y != 1) throw DataError("response values must be 0 or 1");
}

int FeatureTable::find_column(const std::string& name) const {
    for (size_t j = 0; j < descs_.size(); ++j)
        if (descs_[j].name == name) return static_cast<int>(j);
    return -1;
}

std::vector<std::string> FeatureTable::column_names() const {
    std::vector<std::string> names;
    names.reserve(descs_.size());
    for (const auto& d : descs_) names.push_back(d.name);
    return names;
}

const std::vector<double>& FeatureTable::numeric(size_t j) const {
    if (descs_.at(j).kind != ColumnKind::Numeric)
        throw DataError("column " + descs_[j].name + " is not numeric");
    return num_[j];
}

const std::vector<double>& FeatureTable::numeric(const std::string& name) const {
    int j = find_column(name);
    if (j < 0) throw DataError("no such column: " + name);
    return numeric(static_cast<size_t>(j));
}

std::vector<double>& FeatureTable::numeric_mut(size_t j) {
    if (descs_.at(j).kind != ColumnKind::Numeric)
        throw DataError("column " + descs_[j].name + " is not numeric");
    return num_[j];
}

const std::vector<std::string>& FeatureTable::categorical(size_t j) const {
    if (descs_.at(j).kind != ColumnKind::Categorical)
        throw DataError("column " + descs_[j].name + " is not categorical");
    return cat_[j];
}

const std::vector<std::string>& FeatureTable::categorical(const std::string& name) const {
    int j = find_column(name);
    if (j < 0) throw DataError("no such column: " + name);
    return categorical(static_cast<size_t>(j));
}

void FeatureTable::add_numeric(ColumnDesc desc, std::vector<double> values) {
    if (values.size() != n_rows()) throw DataError("column length mismatch: " + desc.name);
    if (find_column(desc.name) >= 0) throw DataError("duplicate column name: " + desc.name);
    desc.kind = ColumnKind::Numeric;
    descs_.push_back(std::move(desc));
    num_.push_back(std::move(values));
    cat_.emplace_back();
}

void FeatureTable::add_categorical(ColumnDesc desc, std::vector<std::string> values) {
    if (values.size() != n_rows()) throw DataError("column length mismatch: " + desc.name);
    if (find_column(desc.name) >= 0) throw DataError("duplicate column name: " + desc.name);
    desc.kind = ColumnKind::Categorical;
    descs_.push_back(std::move(desc));
    num_.emplace_back();
    cat_.push_back(std::move(values));
}

bool FeatureTable::all_numeric() const {
    for (const auto& d : descs_)
        if (d.kind != ColumnKind::Numeric) return false;
    return true;
}

FeatureTable FeatureTable::subset(const std::vector<size_t>& rows) const {
    std::vector<std::string> ids;
    std::vector<int> y;
    ids.reserve(rows.size());
    y.reserve(rows.size());
    for (size_t r : rows) {
        ids.push_back(row_ids_.at(r));
        y.push_back(response_.at(r));
    }
    FeatureTable out(std::move(ids), std::move(y));
    for (size_t j = 0; j < descs_.size(); ++j) {
        if (descs_[j].kind == ColumnKind::Numeric) {
            std::vector<double> v;
            v.reserve(rows.size());
            for (size_t r : rows) v.push_back(num_[j][r]);
            out.add_numeric(descs_[j], std::move(v));
        } else {
            std::vector<std::string> v;
            v.reserve(rows.size());
            for (size_t r : rows) v.push_back(cat_[j][r]);
            out.add_categorical(descs_[j], std::move(v));
        }
    }
    return out;
}

void FeatureTable::write_csv(std::ostream& out) const {
    out << "vin";
    for (const auto& d : descs_) out << ',' << d.name;
    out << ",y\n";
    for (size_t i = 0; i < n_rows(); ++i) {
        out << row_ids_[i];
        for (size_t j = 0; j < descs_.size(); ++j) {
            out << ',';
            if (descs_[j].kind == ColumnKind::Numeric) {
                double v = num_[j][i];
                if (!std::isnan(v)) out << format_double(v);
            } else {
                out << cat_[j][i];
            }
        }
        out << ',' << response_[i] << '\n';
    }
}

std::string FeatureTable::sidecar_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& d : descs_) {
        cols.push_back({{"name", d.name}, {"kind", to_string(d.kind)}, {"origin", to_string(d.origin)}});
    }
    nlohmann::json rows = nlohmann::json::object();
    for (size_t i = 0; i < row_ids_.size(); ++i) rows[row_ids_[i]] = i;
    nlohmann::json doc = {{"columns", cols}, {"row_of_vin", rows}};
    return doc.dump(2);
}

FeatureTable FeatureTable::read_csv(std::istream& in, const std::string& sidecar_json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(sidecar_json);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad sidecar json: ") + e.what());
    }
    std::vector<ColumnDesc> descs;
    for (const auto& c : doc.at("columns")) {
        descs.push_back({c.at("name").get<std::string>(),
                         column_kind_from_string(c.at("kind").get<std::string>()),
                         column_origin_from_string(c.at("origin").get<std::string>())});
    }

    std::string line;
    if (!getline_trimmed(in, line)) throw DataError("empty feature table csv");
    auto header = split_csv_line(line);
    if (header.size() != descs.size() + 2 || header.front() != "vin" || header.back() != "y")
        throw DataError("feature table header does not match sidecar");
    for (size_t j = 0; j < descs.size(); ++j)
        if (header[j + 1] != descs[j].name)
            throw DataError("feature table header does not match sidecar");

    std::vector<std::string> ids;
    std::vector<int> y;
    std::vector<std::vector<double>> nums(descs.size());
    std::vector<std::vector<std::string>> cats(descs.size());
    size_t line_no = 1;
    while (getline_trimmed(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != descs.size() + 2)
            throw DataError("line " + std::to_string(line_no) + ": wrong field count");
        ids.emplace_back(fields.front());
        auto yv = parse_long(fields.back());
        if (!yv || (*yv != 0 && *yv != 1))
            throw DataError("line " + std::to_string(line_no) + ": bad response");
        y.push_back(static_cast<int>(*yv));
        for (size_t j = 0; j < descs.size(); ++j) {
            auto f = fields[j + 1];
            if (descs[j].kind == ColumnKind::Numeric) {
                if (f.empty()) {
                    nums[j].push_back(std::nan(""));
                } else {
                    auto v = parse_double(f);
                    if (!v)
                        throw DataError("line " + std::to_string(line_no) + ": bad numeric value in " +
                                        descs[j].name);
                    nums[j].push_back(*v);
                }
            } else {
                cats[j].emplace_back(f);
            }
        }
    }
    FeatureTable out(std::move(ids), std::move(y));
    for (size_t j = 0; j < descs.size(); ++j) {
        if (descs[j].kind == ColumnKind::Numeric)
            out.add_numeric(descs[j], std::move(nums[j]));
        else
            out.add_categorical(descs[j], std::move(cats[j]));
    }
    return out;
}

}  // namespace ubirisk
