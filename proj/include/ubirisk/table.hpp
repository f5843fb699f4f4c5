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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ubirisk {

enum class ColumnKind { Numeric, Categorical };
enum class ColumnOrigin { Classical, Telematics, Interaction };

std::string to_string(ColumnKind kind);
std::string to_string(ColumnOrigin origin);
ColumnKind column_kind_from_string(const std::string& s);
ColumnOrigin column_origin_from_string(const std::string& s);

struct ColumnDesc {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    ColumnOrigin origin = ColumnOrigin::Classical;

    bool operator==(const ColumnDesc&) const = default;
};

/// Rectangular dataset: one row per vehicle, a response column y in {0,1},
/// and a mix of numeric and categorical feature columns. Missing numeric
/// values are NaN (only commute_distance may legitimately be missing).
class FeatureTable {
  public:
    FeatureTable() = default;
    FeatureTable(std::vector<std::string> row_ids, std::vector<int> response);

    size_t n_rows() const { return row_ids_.size(); }
    size_t n_cols() const { return descs_.size(); }

    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<int>& response() const { return response_; }
    const std::vector<ColumnDesc>& columns() const { return descs_; }
    const ColumnDesc& desc(size_t j) const { return descs_.at(j); }

    /// Index of a column by name, or -1.
    int find_column(const std::string& name) const;
    std::vector<std::string> column_names() const;

    const std::vector<double>& numeric(size_t j) const;
    const std::vector<double>& numeric(const std::string& name) const;
    std::vector<double>& numeric_mut(size_t j);
    const std::vector<std::string>& categorical(size_t j) const;
    const std::vector<std::string>& categorical(const std::string& name) const;

    void add_numeric(ColumnDesc desc, std::vector<double> values);
    void add_categorical(ColumnDesc desc, std::vector<std::string> values);

    bool all_numeric() const;

    /// New table with the given rows, in the given order.
    FeatureTable subset(const std::vector<size_t>& rows) const;

    void write_csv(std::ostream& out) const;
    std::string sidecar_json() const;
    static FeatureTable read_csv(std::istream& in, const std::string& sidecar_json);

  private:
    std::vector<std::string> row_ids_;
    std::vector<int> response_;
    std::vector<ColumnDesc> descs_;
    // Parallel to descs_: exactly one of the two stores is populated per column.
    std::vector<std::vector<double>> num_;
    std::vector<std::vector<std::string>> cat_;
};

}  // namespace ubirisk
